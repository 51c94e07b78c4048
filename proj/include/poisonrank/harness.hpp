#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "poisonrank/attacks.hpp"
#include "poisonrank/env.hpp"
#include "poisonrank/learners.hpp"

namespace poisonrank {

// Where the item attraction probabilities come from. Sampled means are drawn
// fresh per replication from the replication's own stream; inline and ratings
// means are fixed across replications.
struct MeanSpec {
  enum class Kind { kInline, kUniform, kMovieLens };
  Kind kind = Kind::kUniform;
  std::vector<double> values;  // kInline, or kMovieLens after resolution
  double upper = 1.0;          // kUniform draws from U(0, upper)
  std::optional<double> target_mean;  // overrides the target's mean if set
  std::string ratings_file;           // kMovieLens
  double threshold = 4.0;             // rating counted as positive when >= this
};

struct KappaSpec {
  enum class Kind { kGeometric, kInline };
  Kind kind = Kind::kGeometric;
  double rho = 0.9;  // position k gets rho^(k-1)
  std::vector<double> values;
};

// How the protected set (the K items the attacker promotes) is formed for
// list models. The single recommendation model always protects only the
// target.
struct ProtectedSpec {
  enum class Kind { kRandom, kTopMeans, kPinned };
  Kind kind = Kind::kRandom;
  std::vector<int> pinned;  // item ids; the target is added when missing
};

// Sentinels accepted by ExperimentSpec::target.
inline constexpr int kTargetLastItem = -1;
inline constexpr int kTargetMinMean = -2;

struct ExperimentSpec {
  std::string name = "experiment";
  ClickModel model = ClickModel::kSingleArm;
  int num_items = 2;
  int list_len = 1;
  long horizon = 10000;
  int replications = 20;
  std::uint64_t seed = 29061116;
  double epsilon = 0.1;  // position-based learner width parameter
  AttackStrategy strategy = AttackStrategy::kNone;
  double delta0 = 0.1;
  double delta = 0.05;
  int target = kTargetLastItem;  // item id, or a sentinel above
  MeanSpec means;
  KappaSpec kappa;
  ProtectedSpec protected_items;
  bool check_conservative = false;  // per-round replay of the budget bound
  bool record_gammas = false;

  void validate() const;  // throws ConfigError
};

// Per-replication results. Chosen counts the rounds whose action contains the
// target anywhere in the list.
struct Metrics {
  std::vector<long> rounds;           // logged rounds, always ending at T
  std::vector<long> chosen;           // cumulative target appearances
  std::vector<long long> cost;        // cumulative corruption cost
  std::vector<long> final_pulls;      // learner-side observation counts
  std::vector<double> means_used;     // resolved attraction probabilities
  std::vector<int> protected_set;
  int target = 0;
  bool means_concentrated = true;  // uncorrupted means stayed within beta of truth
  long pull_bound_violations = 0;  // counted unconditionally
  long conservative_violations = 0;
  long attacked_rounds = 0;  // rounds with at least one nonzero corruption

  double final_ratio() const;
  long long final_cost() const;
};

// Per-round record for replay tests.
struct RoundRecord {
  std::vector<int> action;
  std::vector<std::uint8_t> pre_clicks;
  std::vector<int> alpha;
  std::vector<std::uint8_t> post_clicks;
};

struct ReplicationResult {
  Metrics metrics;
  AttackDiagnostics diagnostics;   // filled when spec.record_gammas
  std::vector<RoundRecord> trace;  // filled when record_trace
};

// Spacing of the logging grid: every round up to 10^4 rounds, then thinned so
// at most 10^4 rows are emitted; the final round is always logged.
long log_stride(long horizon);

// Resolves fixed means (inline values or a ratings file). Returns an empty
// vector for sampled means, which run_replication draws itself.
std::vector<double> resolve_fixed_means(const ExperimentSpec& spec);

std::vector<double> resolve_kappa(const ExperimentSpec& spec);

// Runs replication `rep` of the experiment. `fixed_means` is the result of
// resolve_fixed_means, shared across replications so a ratings file is read
// once.
ReplicationResult run_replication(const ExperimentSpec& spec, int rep,
                                  const std::vector<double>& fixed_means,
                                  bool record_trace = false);

struct Aggregate {
  std::vector<long> rounds;
  std::vector<double> chosen_mean, chosen_std;
  std::vector<double> ratio_mean, ratio_std;
  std::vector<double> cost_mean, cost_std;
  double final_ratio_mean = 0.0, final_ratio_std = 0.0;
  double final_cost_mean = 0.0, final_cost_std = 0.0;
  long concentrated_count = 0;
  long pull_bound_violations = 0;
  long conservative_violations = 0;
  std::vector<Metrics> per_rep;
};

Aggregate aggregate(std::vector<Metrics> reps);

// Runs all replications and aggregates. jobs <= 1 uses the serial reference
// path; larger values fan replications out across OpenMP threads. Both paths
// produce identical results; tests and the bench tool check that.
Aggregate run_experiment(const ExperimentSpec& spec, int jobs = 1);

}  // namespace poisonrank
