#include "poisonrank/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "poisonrank/errors.hpp"
#include "poisonrank/movielens.hpp"

#ifdef POISONRANK_HAVE_OPENMP
#include <omp.h>
#endif

namespace poisonrank {

void ExperimentSpec::validate() const {
  if (num_items < 2) throw ConfigError("need at least 2 items");
  if (list_len < 1 || list_len > num_items)
    throw ConfigError("list length must lie in [1, number of items]");
  if (model == ClickModel::kSingleArm && list_len != 1)
    throw ConfigError("the single recommendation model requires list length 1");
  if (model != ClickModel::kSingleArm && strategy == AttackStrategy::kUcbAttack)
    throw ConfigError("ucb_attack only applies to the single recommendation model");
  if (model != ClickModel::kSingleArm &&
      strategy == AttackStrategy::kModifiedJun)
    throw ConfigError("modified_jun only applies to the single recommendation model");
  if (model != ClickModel::kPositionBased &&
      strategy == AttackStrategy::kPbmAttack)
    throw ConfigError("pbm_attack only applies to the position-based model");
  if (model != ClickModel::kCascade &&
      strategy == AttackStrategy::kCascadeAttack)
    throw ConfigError("cascade_attack only applies to the cascade model");
  if (horizon < 1) throw ConfigError("horizon must be positive");
  if (replications < 1) throw ConfigError("need at least one replication");
  if (!(delta0 > 0.0)) throw ConfigError("delta0 must be positive");
  if (!(delta > 0.0) || delta > 0.5)
    throw ConfigError("delta must lie in (0, 1/2]");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (target != kTargetLastItem && target != kTargetMinMean &&
      (target < 0 || target >= num_items))
    throw ConfigError("target out of range");
  if (target == kTargetMinMean && means.kind == MeanSpec::Kind::kUniform)
    throw ConfigError("a min-mean target needs fixed means");
  switch (means.kind) {
    case MeanSpec::Kind::kInline:
      if (static_cast<int>(means.values.size()) != num_items)
        throw ConfigError("need one attraction probability per item");
      break;
    case MeanSpec::Kind::kUniform:
      if (!(means.upper > 0.0) || means.upper > 1.0)
        throw ConfigError("mean upper bound must lie in (0, 1]");
      break;
    case MeanSpec::Kind::kMovieLens:
      if (means.ratings_file.empty())
        throw ConfigError("ratings means need a ratings file");
      break;
  }
  if (means.target_mean &&
      (!(*means.target_mean >= 0.0) || *means.target_mean > 1.0))
    throw ConfigError("target mean must lie in [0, 1]");
  if (model == ClickModel::kPositionBased) {
    switch (kappa.kind) {
      case KappaSpec::Kind::kGeometric:
        if (!(kappa.rho > 0.0) || kappa.rho > 1.0)
          throw ConfigError("kappa ratio must lie in (0, 1]");
        break;
      case KappaSpec::Kind::kInline:
        if (static_cast<int>(kappa.values.size()) != list_len)
          throw ConfigError("need one examination probability per position");
        break;
    }
  }
  if (protected_items.kind == ProtectedSpec::Kind::kPinned) {
    std::vector<char> seen(num_items, 0);
    for (int a : protected_items.pinned) {
      if (a < 0 || a >= num_items)
        throw ConfigError("pinned protected item out of range");
      if (seen[a]) throw ConfigError("duplicate pinned protected item");
      seen[a] = 1;
    }
  }
}

double Metrics::final_ratio() const {
  if (rounds.empty()) return 0.0;
  return static_cast<double>(chosen.back()) /
         static_cast<double>(rounds.back());
}

long long Metrics::final_cost() const { return cost.empty() ? 0 : cost.back(); }

long log_stride(long horizon) {
  return horizon <= 10000 ? 1 : (horizon + 9999) / 10000;
}

std::vector<double> resolve_fixed_means(const ExperimentSpec& spec) {
  switch (spec.means.kind) {
    case MeanSpec::Kind::kInline:
      return spec.means.values;
    case MeanSpec::Kind::kMovieLens: {
      MovieLensResult ml = ingest_movielens(
          spec.means.ratings_file, spec.num_items, spec.means.threshold);
      return ml.means;
    }
    case MeanSpec::Kind::kUniform:
      return {};
  }
  throw InvariantError("resolve_fixed_means: unknown mean kind");
}

std::vector<double> resolve_kappa(const ExperimentSpec& spec) {
  if (spec.model != ClickModel::kPositionBased) return {};
  if (spec.kappa.kind == KappaSpec::Kind::kInline) return spec.kappa.values;
  std::vector<double> kappa(spec.list_len);
  double v = 1.0;
  for (int k = 0; k < spec.list_len; ++k) {
    kappa[k] = v;
    v *= spec.kappa.rho;
  }
  return kappa;
}

namespace {

int resolve_target(const ExperimentSpec& spec,
                   const std::vector<double>& means) {
  if (spec.target == kTargetLastItem) return spec.num_items - 1;
  if (spec.target == kTargetMinMean)
    return static_cast<int>(
        std::min_element(means.begin(), means.end()) - means.begin());
  return spec.target;
}

// Protected set of size list_len containing the target. The single
// recommendation model and the single-item baseline protect only the target.
std::vector<int> resolve_protected(const ExperimentSpec& spec,
                                   const std::vector<double>& means,
                                   int target, RngStream& rng) {
  if (spec.model == ClickModel::kSingleArm ||
      spec.strategy == AttackStrategy::kTrivial1)
    return {target};
  std::vector<int> prot;
  prot.reserve(spec.list_len);
  prot.push_back(target);
  switch (spec.protected_items.kind) {
    case ProtectedSpec::Kind::kPinned: {
      for (int a : spec.protected_items.pinned) {
        if (a == target) continue;
        prot.push_back(a);
      }
      if (static_cast<int>(prot.size()) != spec.list_len)
        throw ConfigError("pinned protected set has the wrong size");
      break;
    }
    case ProtectedSpec::Kind::kTopMeans: {
      std::vector<int> order(spec.num_items);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int x, int y) {
        if (means[x] != means[y]) return means[x] > means[y];
        return x < y;
      });
      for (int a : order) {
        if (static_cast<int>(prot.size()) == spec.list_len) break;
        if (a != target) prot.push_back(a);
      }
      break;
    }
    case ProtectedSpec::Kind::kRandom: {
      std::vector<int> pool;
      for (int a = 0; a < spec.num_items; ++a)
        if (a != target) pool.push_back(a);
      while (static_cast<int>(prot.size()) < spec.list_len) {
        const int pick = rng.uniform_int(static_cast<int>(pool.size()));
        prot.push_back(pool[pick]);
        pool.erase(pool.begin() + pick);
      }
      break;
    }
  }
  std::sort(prot.begin() + 1, prot.end());
  return prot;
}

bool uses_budget_rule(AttackStrategy s) {
  return s == AttackStrategy::kUcbAttack || s == AttackStrategy::kPbmAttack ||
         s == AttackStrategy::kCascadeAttack;
}

// How many leading positions of an uncorrupted round are observed.
int observed_prefix(ClickModel kind, int K, const Feedback& pre) {
  if (kind == ClickModel::kCascade && pre.click_pos != kNoClick)
    return pre.click_pos + 1;
  return K;
}

}  // namespace

ReplicationResult run_replication(const ExperimentSpec& spec, int rep,
                                  const std::vector<double>& fixed_means,
                                  bool record_trace) {
  const std::uint64_t rep_seed =
      mix_seed(spec.seed, static_cast<std::uint64_t>(rep));
  RngStream means_rng(rep_seed, "means");
  RngStream setup_rng(rep_seed, "setup");
  RngStream env_rng(rep_seed, "env");
  RngStream coin_rng(rep_seed, "attack");

  std::vector<double> means = fixed_means;
  if (spec.means.kind == MeanSpec::Kind::kUniform) {
    means.resize(spec.num_items);
    for (double& m : means) m = spec.means.upper * means_rng.uniform();
  }
  const int target = resolve_target(spec, means);
  if (spec.means.target_mean) means[target] = *spec.means.target_mean;

  EnvModel env{spec.model, means, resolve_kappa(spec), spec.list_len};
  env.validate();

  const std::vector<int> prot =
      resolve_protected(spec, means, target, setup_rng);
  AttackConfig cfg;
  cfg.delta0 = spec.delta0;
  cfg.beta_params = {spec.num_items, spec.delta};
  cfg.target = target;
  cfg.protected_set = prot;
  if (spec.model == ClickModel::kPositionBased) cfg.examination = env.kappa;
  cfg.finalize(spec.num_items);

  LearnerState learner(spec.num_items, spec.epsilon);
  AttackState attacker(spec.num_items, static_cast<int>(prot.size()));
  std::vector<ArmStats> truth(spec.num_items);  // uncorrupted ledger

  ReplicationResult out;
  Metrics& m = out.metrics;
  m.means_used = means;
  m.protected_set = prot;
  m.target = target;

  const long T = spec.horizon;
  const long stride = log_stride(T);
  const int K = spec.list_len;
  const int L = spec.num_items;
  const bool track_pull_bound = spec.model == ClickModel::kSingleArm &&
                                spec.strategy == AttackStrategy::kUcbAttack;
  const double pull_bound_scale = 3.0 / (spec.delta0 * spec.delta0);
  const bool track_conservative =
      spec.check_conservative && uses_budget_rule(spec.strategy);
  const BetaParams bp{spec.num_items, spec.delta};

  AttackDiagnostics* diag = spec.record_gammas ? &out.diagnostics : nullptr;
  long chosen_cum = 0;

  for (long t = 1; t <= T; ++t) {
    std::vector<int> action;
    switch (spec.model) {
      case ClickModel::kSingleArm:
        action.assign(1, ucb_choose(learner));
        break;
      case ClickModel::kPositionBased:
        action = pbm_ucb_choose(learner, K);
        break;
      case ClickModel::kCascade:
        action = cascade_ucb_choose(learner, K);
        break;
    }

    const Feedback pre = draw_feedback(env, action, env_rng);

    std::vector<int> alpha(K, 0);
    switch (spec.strategy) {
      case AttackStrategy::kNone:
        break;
      case AttackStrategy::kUcbAttack:
        alpha[0] =
            ucb_attack_round(attacker, cfg, action[0], pre.clicks[0], t, diag);
        break;
      case AttackStrategy::kModifiedJun:
        alpha[0] =
            modified_jun_round(attacker, cfg, action[0], pre.clicks[0], t);
        break;
      case AttackStrategy::kPbmAttack:
        alpha = pbm_attack_round(attacker, cfg, action, pre, t, diag);
        break;
      case AttackStrategy::kCascadeAttack:
        alpha = cascade_attack_round(attacker, cfg, action, pre, t, diag);
        break;
      case AttackStrategy::kGeneralAttack:
        alpha = general_attack_round(attacker, cfg, spec.model, action, pre,
                                     coin_rng, t, diag);
        break;
      case AttackStrategy::kTrivial1:
      case AttackStrategy::kTrivialK:
        alpha = trivial_attack_round(attacker, cfg, spec.model, action, pre, t);
        break;
    }

    const Feedback post = apply_alpha(spec.model, pre, alpha);
    learner_update(learner, spec.model, env.kappa, action, post);

    bool any_attack = false;
    for (int a : alpha) any_attack |= a != 0;
    m.attacked_rounds += any_attack ? 1 : 0;

    // Truth ledger: uncorrupted feedback over observed positions. Under the
    // position-based model observations carry their examination probability,
    // so the concentration check below can compare the weighted sum against
    // bias_corrected_pulls * mu with the usual radius on the raw count scale:
    // |pre_sum - bias_corrected_pulls * mu| < N * beta(N).
    const int observed = observed_prefix(spec.model, K, pre);
    for (int i = 0; i < observed; ++i) {
      const double w = spec.model == ClickModel::kPositionBased
                           ? env.kappa[i]
                           : 1.0;
      truth[action[i]].observe(pre.clicks[i], w);
    }
    if (m.means_concentrated && t > L) {
      for (int i = 0; i < observed; ++i) {
        const ArmStats& s = truth[action[i]];
        const double dev = std::abs(static_cast<double>(s.pre_reward_sum) -
                                    s.bias_corrected_pulls * means[action[i]]);
        if (dev >= static_cast<double>(s.pulls) * beta(bp, s.pulls)) {
          m.means_concentrated = false;
          break;
        }
      }
    }

    if (track_pull_bound && t >= L) {
      const long target_pulls = learner.per_item[target].pulls;
      const double cap = 1.0 + pull_bound_scale * std::log(static_cast<double>(t));
      for (int a = 0; a < L; ++a) {
        if (a == target) continue;
        const double n = static_cast<double>(learner.per_item[a].pulls);
        if (n > std::min(static_cast<double>(target_pulls), cap) + 1e-9)
          ++m.pull_bound_violations;
      }
    }

    if (track_conservative)
      m.conservative_violations +=
          count_conservative_violations(attacker, cfg);

    bool has_target = false;
    for (int a : action) has_target |= a == target;
    chosen_cum += has_target ? 1 : 0;

    if (t % stride == 0 || t == T) {
      m.rounds.push_back(t);
      m.chosen.push_back(chosen_cum);
      m.cost.push_back(attacker.cumulative_cost);
    }

    if (record_trace)
      out.trace.push_back({action, pre.clicks, alpha, post.clicks});
  }

  m.final_pulls.resize(L);
  for (int a = 0; a < L; ++a) m.final_pulls[a] = learner.per_item[a].pulls;
  return out;
}

Aggregate aggregate(std::vector<Metrics> reps) {
  Aggregate agg;
  const int R = static_cast<int>(reps.size());
  if (R == 0) throw InvariantError("aggregate: no replications");
  const std::size_t n = reps[0].rounds.size();
  for (const Metrics& m : reps)
    if (m.rounds != reps[0].rounds)
      throw InvariantError("aggregate: replications logged different grids");
  agg.rounds = reps[0].rounds;

  // Sample standard deviation (zero for a single replication).
  auto mean_std = [R](auto value) -> std::pair<double, double> {
    double mean = 0.0;
    for (int r = 0; r < R; ++r) mean += value(r);
    mean /= R;
    double var = 0.0;
    if (R > 1) {
      for (int r = 0; r < R; ++r) {
        const double d = value(r) - mean;
        var += d * d;
      }
      var /= (R - 1);
    }
    return {mean, std::sqrt(var)};
  };

  agg.chosen_mean.resize(n);
  agg.chosen_std.resize(n);
  agg.ratio_mean.resize(n);
  agg.ratio_std.resize(n);
  agg.cost_mean.resize(n);
  agg.cost_std.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(agg.rounds[i]);
    auto [cm, cs] =
        mean_std([&](int r) { return static_cast<double>(reps[r].chosen[i]); });
    agg.chosen_mean[i] = cm;
    agg.chosen_std[i] = cs;
    auto [rm, rs] = mean_std(
        [&](int r) { return static_cast<double>(reps[r].chosen[i]) / t; });
    agg.ratio_mean[i] = rm;
    agg.ratio_std[i] = rs;
    auto [km, ks] =
        mean_std([&](int r) { return static_cast<double>(reps[r].cost[i]); });
    agg.cost_mean[i] = km;
    agg.cost_std[i] = ks;
  }
  auto [frm, frs] = mean_std([&](int r) { return reps[r].final_ratio(); });
  agg.final_ratio_mean = frm;
  agg.final_ratio_std = frs;
  auto [fcm, fcs] = mean_std(
      [&](int r) { return static_cast<double>(reps[r].final_cost()); });
  agg.final_cost_mean = fcm;
  agg.final_cost_std = fcs;
  for (const Metrics& m : reps) {
    agg.concentrated_count += m.means_concentrated ? 1 : 0;
    agg.pull_bound_violations += m.pull_bound_violations;
    agg.conservative_violations += m.conservative_violations;
  }
  agg.per_rep = std::move(reps);
  return agg;
}

Aggregate run_experiment(const ExperimentSpec& spec, int jobs) {
  spec.validate();
  const std::vector<double> fixed_means = resolve_fixed_means(spec);
  const int R = spec.replications;
  std::vector<Metrics> reps(R);
#ifdef POISONRANK_HAVE_OPENMP
  if (jobs > 1) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
    for (int r = 0; r < R; ++r)
      reps[r] = run_replication(spec, r, fixed_means).metrics;
    return aggregate(std::move(reps));
  }
#else
  (void)jobs;
#endif
  for (int r = 0; r < R; ++r)
    reps[r] = run_replication(spec, r, fixed_means).metrics;
  return aggregate(std::move(reps));
}

}  // namespace poisonrank
