#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "poisonrank/errors.hpp"
#include "poisonrank/harness.hpp"
#include "poisonrank/movielens.hpp"

using namespace poisonrank;

namespace {

ExperimentSpec pbm_spec() {
  ExperimentSpec spec;
  spec.name = "pbm";
  spec.model = ClickModel::kPositionBased;
  spec.num_items = 8;
  spec.list_len = 4;
  spec.horizon = 1500;
  spec.replications = 6;
  spec.seed = 7101;
  spec.strategy = AttackStrategy::kPbmAttack;
  spec.target = kTargetLastItem;
  spec.protected_items.kind = ProtectedSpec::Kind::kTopMeans;
  return spec;
}

}  // namespace

TEST_CASE("logging grid") {
  CHECK(log_stride(1) == 1);
  CHECK(log_stride(10000) == 1);
  CHECK(log_stride(10001) == 2);
  CHECK(log_stride(100000) == 10);
  CHECK(log_stride(123456) == 13);

  ExperimentSpec spec = pbm_spec();
  spec.horizon = 25;
  spec.replications = 1;
  const ReplicationResult r = run_replication(spec, 0, {});
  REQUIRE(r.metrics.rounds.size() == 25);
  CHECK(r.metrics.rounds.front() == 1);
  CHECK(r.metrics.rounds.back() == 25);
}

TEST_CASE("spec validation") {
  ExperimentSpec spec;
  spec.model = ClickModel::kSingleArm;
  spec.num_items = 4;
  spec.list_len = 2;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.list_len = 1;
  spec.validate();

  spec.strategy = AttackStrategy::kPbmAttack;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.strategy = AttackStrategy::kUcbAttack;
  spec.validate();
  spec.model = ClickModel::kPositionBased;
  spec.list_len = 2;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.strategy = AttackStrategy::kModifiedJun;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.strategy = AttackStrategy::kCascadeAttack;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.strategy = AttackStrategy::kPbmAttack;
  spec.validate();

  SUBCASE("scalar ranges") {
    spec.horizon = 0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.horizon = 100;
    spec.delta = 0.6;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.delta = 0.05;
    spec.epsilon = 0.0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
  }
  SUBCASE("target rules") {
    spec.target = 4;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.target = kTargetMinMean;  // needs fixed means
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.means.kind = MeanSpec::Kind::kInline;
    spec.means.values = {0.5, 0.4, 0.3, 0.2};
    spec.validate();
    spec.means.values = {0.5, 0.4};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
  }
  SUBCASE("kappa rules") {
    spec.kappa.kind = KappaSpec::Kind::kInline;
    spec.kappa.values = {1.0};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.kappa.values = {1.0, 0.5};
    spec.validate();
    spec.kappa.kind = KappaSpec::Kind::kGeometric;
    spec.kappa.rho = 1.5;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
  }
  SUBCASE("pinned protected items") {
    spec.protected_items.kind = ProtectedSpec::Kind::kPinned;
    spec.protected_items.pinned = {1, 1};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.protected_items.pinned = {1, 7};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
  }
}

TEST_CASE("kappa resolution") {
  ExperimentSpec spec = pbm_spec();
  const std::vector<double> k = resolve_kappa(spec);
  REQUIRE(k.size() == 4);
  CHECK(k[0] == doctest::Approx(1.0));
  CHECK(k[1] == doctest::Approx(0.9));
  CHECK(k[2] == doctest::Approx(0.81));
  CHECK(k[3] == doctest::Approx(0.729));

  spec.kappa.kind = KappaSpec::Kind::kInline;
  spec.kappa.values = {1.0, 0.5, 0.25, 0.125};
  CHECK(resolve_kappa(spec) == spec.kappa.values);

  spec.model = ClickModel::kSingleArm;
  CHECK(resolve_kappa(spec).empty());
}

TEST_CASE("target and protected resolution") {
  ExperimentSpec spec = pbm_spec();
  spec.horizon = 10;
  spec.replications = 1;
  spec.num_items = 4;
  spec.list_len = 2;
  spec.means.kind = MeanSpec::Kind::kInline;
  spec.means.values = {0.9, 0.5, 0.8, 0.1};

  SUBCASE("last item with the strongest companions") {
    const ReplicationResult r = run_replication(spec, 0, spec.means.values);
    CHECK(r.metrics.target == 3);
    CHECK(r.metrics.protected_set == std::vector<int>{3, 0});
  }
  SUBCASE("minimum mean target") {
    spec.target = kTargetMinMean;
    spec.means.values = {0.9, 0.1, 0.8, 0.5};
    const ReplicationResult r = run_replication(spec, 0, spec.means.values);
    CHECK(r.metrics.target == 1);
  }
  SUBCASE("target mean override lands in the resolved means") {
    spec.means.target_mean = 0.3;
    const ReplicationResult r = run_replication(spec, 0, spec.means.values);
    CHECK(r.metrics.means_used[3] == doctest::Approx(0.3));
  }
  SUBCASE("pinned set must have exactly the list length") {
    spec.protected_items.kind = ProtectedSpec::Kind::kPinned;
    spec.protected_items.pinned = {1};
    const ReplicationResult r = run_replication(spec, 0, spec.means.values);
    CHECK(r.metrics.protected_set == std::vector<int>{3, 1});
    spec.protected_items.pinned = {0, 1};
    CHECK_THROWS_AS(run_replication(spec, 0, spec.means.values), ConfigError);
  }
  SUBCASE("single item strategies protect only the target") {
    spec.strategy = AttackStrategy::kTrivial1;
    const ReplicationResult r = run_replication(spec, 0, spec.means.values);
    CHECK(r.metrics.protected_set == std::vector<int>{3});
  }
  SUBCASE("random sets are valid and reproducible") {
    spec.protected_items.kind = ProtectedSpec::Kind::kRandom;
    const ReplicationResult a = run_replication(spec, 0, spec.means.values);
    const ReplicationResult b = run_replication(spec, 0, spec.means.values);
    CHECK(a.metrics.protected_set == b.metrics.protected_set);
    REQUIRE(a.metrics.protected_set.size() == 2);
    CHECK(a.metrics.protected_set[0] == 3);
    CHECK(a.metrics.protected_set[1] != 3);
  }
}

TEST_CASE("replications are deterministic") {
  const ExperimentSpec spec = pbm_spec();
  const ReplicationResult a = run_replication(spec, 2, {});
  const ReplicationResult b = run_replication(spec, 2, {});
  CHECK(a.metrics.chosen == b.metrics.chosen);
  CHECK(a.metrics.cost == b.metrics.cost);
  CHECK(a.metrics.final_pulls == b.metrics.final_pulls);
  CHECK(a.metrics.means_used == b.metrics.means_used);
}

TEST_CASE("threaded and serial runs agree") {
  const ExperimentSpec spec = pbm_spec();
  const Aggregate serial = run_experiment(spec, 1);
  const Aggregate threaded = run_experiment(spec, 4);
  CHECK(serial.rounds == threaded.rounds);
  CHECK(serial.chosen_mean == threaded.chosen_mean);
  CHECK(serial.cost_mean == threaded.cost_mean);
  CHECK(serial.cost_std == threaded.cost_std);
  CHECK(serial.final_ratio_mean == threaded.final_ratio_mean);
  CHECK(serial.final_cost_std == threaded.final_cost_std);
  CHECK(serial.concentrated_count == threaded.concentrated_count);
  REQUIRE(serial.per_rep.size() == threaded.per_rep.size());
  for (std::size_t r = 0; r < serial.per_rep.size(); ++r) {
    CHECK(serial.per_rep[r].chosen == threaded.per_rep[r].chosen);
    CHECK(serial.per_rep[r].cost == threaded.per_rep[r].cost);
  }
}

TEST_CASE("setup draws are not disturbed by the attack") {
  ExperimentSpec a = pbm_spec();
  a.strategy = AttackStrategy::kNone;
  a.protected_items.kind = ProtectedSpec::Kind::kRandom;
  ExperimentSpec b = pbm_spec();
  b.strategy = AttackStrategy::kGeneralAttack;
  b.protected_items.kind = ProtectedSpec::Kind::kRandom;
  for (int rep = 0; rep < 3; ++rep) {
    const ReplicationResult ra = run_replication(a, rep, {});
    const ReplicationResult rb = run_replication(b, rep, {});
    CHECK(ra.metrics.means_used == rb.metrics.means_used);
    CHECK(ra.metrics.target == rb.metrics.target);
    CHECK(ra.metrics.protected_set == rb.metrics.protected_set);
  }
}

TEST_CASE("aggregation uses the sample standard deviation") {
  Metrics base;
  base.rounds = {1, 2};
  std::vector<Metrics> reps(3, base);
  reps[0].chosen = {1, 10};
  reps[1].chosen = {1, 20};
  reps[2].chosen = {1, 30};
  reps[0].cost = {0, 1};
  reps[1].cost = {0, 2};
  reps[2].cost = {0, 3};
  const Aggregate agg = aggregate(reps);
  CHECK(agg.chosen_mean[1] == doctest::Approx(20.0));
  CHECK(agg.chosen_std[1] == doctest::Approx(10.0));
  CHECK(agg.cost_mean[1] == doctest::Approx(2.0));
  CHECK(agg.cost_std[1] == doctest::Approx(1.0));
  CHECK(agg.ratio_mean[1] == doctest::Approx(10.0));  // chosen / round 2
  CHECK(agg.final_ratio_mean == doctest::Approx(10.0));
  CHECK(agg.final_cost_mean == doctest::Approx(2.0));

  Metrics odd = base;
  odd.rounds = {1, 3};
  odd.chosen = {1, 1};
  odd.cost = {0, 0};
  std::vector<Metrics> bad{reps[0], odd};
  CHECK_THROWS_AS(aggregate(bad), InvariantError);
  CHECK_THROWS_AS(aggregate(std::vector<Metrics>{}), InvariantError);

  std::vector<Metrics> single{reps[0]};
  const Aggregate one = aggregate(single);
  CHECK(one.chosen_std[1] == doctest::Approx(0.0));
}

TEST_CASE("trace replay matches the recorded ledgers") {
  ExperimentSpec spec = pbm_spec();
  spec.horizon = 400;
  const ReplicationResult r = run_replication(spec, 1, {}, true);
  REQUIRE(r.trace.size() == 400);

  long long cost = 0;
  long attacked = 0, chosen = 0;
  std::vector<long> pulls(spec.num_items, 0);
  for (const RoundRecord& rec : r.trace) {
    bool any = false;
    for (std::size_t i = 0; i < rec.alpha.size(); ++i) {
      CHECK(rec.alpha[i] >= -1);
      CHECK(rec.alpha[i] <= 1);
      CHECK(static_cast<int>(rec.post_clicks[i]) ==
            static_cast<int>(rec.pre_clicks[i]) - rec.alpha[i]);
      cost += std::abs(rec.alpha[i]);
      any |= rec.alpha[i] != 0;
    }
    attacked += any ? 1 : 0;
    bool has_target = false;
    for (int a : rec.action) {
      ++pulls[a];  // every slot is examined under the position model
      has_target |= a == r.metrics.target;
    }
    chosen += has_target ? 1 : 0;
  }
  CHECK(cost == r.metrics.final_cost());
  CHECK(attacked == r.metrics.attacked_rounds);
  CHECK(chosen == r.metrics.chosen.back());
  CHECK(pulls == r.metrics.final_pulls);
}

TEST_CASE("cascade traces observe the corrupted prefix") {
  ExperimentSpec spec = pbm_spec();
  spec.model = ClickModel::kCascade;
  spec.strategy = AttackStrategy::kCascadeAttack;
  spec.horizon = 400;
  const ReplicationResult r = run_replication(spec, 0, {}, true);
  std::vector<long> pulls(spec.num_items, 0);
  for (const RoundRecord& rec : r.trace) {
    const int cp = first_click(rec.post_clicks);
    const int observed =
        cp == kNoClick ? static_cast<int>(rec.action.size()) : cp + 1;
    for (int i = 0; i < observed; ++i) ++pulls[rec.action[i]];
  }
  CHECK(pulls == r.metrics.final_pulls);
}

TEST_CASE("untouched learners concentrate on an optimal target") {
  ExperimentSpec spec;
  spec.model = ClickModel::kSingleArm;
  spec.num_items = 2;
  spec.list_len = 1;
  spec.horizon = 5000;
  spec.replications = 3;
  spec.seed = 515;
  spec.strategy = AttackStrategy::kNone;
  spec.target = 0;
  spec.means.kind = MeanSpec::Kind::kInline;
  spec.means.values = {0.9, 0.2};
  const Aggregate agg = run_experiment(spec);
  CHECK(agg.final_ratio_mean > 0.9);
}

TEST_CASE("uncorrupted means concentrate within the radius") {
  ExperimentSpec spec;
  spec.model = ClickModel::kSingleArm;
  spec.num_items = 4;
  spec.list_len = 1;
  spec.horizon = 2000;
  spec.replications = 10;
  spec.seed = 99;
  spec.strategy = AttackStrategy::kNone;
  spec.target = 0;
  const Aggregate agg = run_experiment(spec);
  CHECK(agg.concentrated_count >= 8);
}

TEST_CASE("attacked single recommendation runs stay within the pull bound") {
  ExperimentSpec spec;
  spec.model = ClickModel::kSingleArm;
  spec.num_items = 4;
  spec.list_len = 1;
  spec.horizon = 2000;
  spec.replications = 10;
  spec.seed = 12;
  spec.strategy = AttackStrategy::kUcbAttack;
  spec.delta0 = 0.3;
  spec.delta = 0.1;
  // Index ties break toward item 0, so a target there is never starved by
  // the early rounds where every corrupted mean sits at zero. The target's
  // mean must also clear delta0 with room for the confidence radius, or the
  // suppression floor clamps at zero and the logarithmic cap has no teeth.
  spec.target = 0;
  spec.means.target_mean = 0.7;
  const Aggregate agg = run_experiment(spec);
  long violations_while_concentrated = 0;
  for (const Metrics& m : agg.per_rep)
    if (m.means_concentrated) violations_while_concentrated += m.pull_bound_violations;
  CHECK(violations_while_concentrated == 0);
}

TEST_CASE("budget attacks never break their conservative bound") {
  ExperimentSpec spec = pbm_spec();
  spec.horizon = 800;
  spec.replications = 4;
  spec.check_conservative = true;
  CHECK(run_experiment(spec).conservative_violations == 0);

  spec.model = ClickModel::kCascade;
  spec.strategy = AttackStrategy::kCascadeAttack;
  CHECK(run_experiment(spec).conservative_violations == 0);

  spec.model = ClickModel::kSingleArm;
  spec.list_len = 1;
  spec.strategy = AttackStrategy::kUcbAttack;
  CHECK(run_experiment(spec).conservative_violations == 0);
}

TEST_CASE("ratings ingestion") {
  const std::string path = "harness_ratings_tmp.csv";
  {
    std::ofstream f(path);
    f << "userId,movieId,rating,timestamp\n"
         "1,10,5.0,100\n"
         "1,20,3.0,101\n"
         "2,10,4.0,102\n"
         "2,20,2.5,103\n"
         "3,10,2.0,104\n"
         "3,30,4.5,105\n"
         "4,30,5.0,106\n"
         "4,20,4.0,107\n"
         "5,20,1.0,108\n";
  }
  const MovieLensResult two = ingest_movielens(path, 2, 4.0);
  CHECK(two.movie_ids == std::vector<long>{20, 10});
  CHECK(two.rating_counts == std::vector<long>{4, 3});
  CHECK(two.means[0] == doctest::Approx(0.25));
  CHECK(two.means[1] == doctest::Approx(2.0 / 3.0));

  const MovieLensResult three = ingest_movielens(path, 3, 4.0);
  CHECK(three.movie_ids == std::vector<long>{20, 10, 30});
  CHECK(three.means[2] == doctest::Approx(1.0));

  CHECK_THROWS_AS(ingest_movielens(path, 4, 4.0), ConfigError);
  CHECK_THROWS_AS(ingest_movielens("no_such_file.csv", 2, 4.0), IoError);

  {
    std::ofstream f(path);
    f << "userId,movieId,rating,timestamp\n1,10,5.0\n";
  }
  CHECK_THROWS_AS(ingest_movielens(path, 1, 4.0), IoError);
  {
    std::ofstream f(path);
    f << "movieId,userId,rating,timestamp\n1,10,5.0,100\n";
  }
  CHECK_THROWS_AS(ingest_movielens(path, 1, 4.0), IoError);

  std::remove(path.c_str());

  ExperimentSpec spec = pbm_spec();
  spec.means.kind = MeanSpec::Kind::kUniform;
  CHECK(resolve_fixed_means(spec).empty());
  spec.means.kind = MeanSpec::Kind::kInline;
  spec.means.values = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  CHECK(resolve_fixed_means(spec) == spec.means.values);
}
