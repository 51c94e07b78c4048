#pragma once

#include <utility>

namespace poisonrank {

inline double clamp_plus(double x) { return x > 0.0 ? x : 0.0; }

// Parameters of the confidence radius: item count L and failure probability
// delta, with delta restricted to (0, 1/2].
struct BetaParams {
  int num_items = 2;
  double delta = 0.05;
};

// beta(n) = sqrt( ln(pi^2 L n^2 / (3 delta)) / (2 n) ), natural log.
// Throws for n <= 0 or parameters outside their domain.
double beta(const BetaParams& bp, long n);

// Per-item ledger. Only sums and counts are kept, so state is O(1) per item;
// the corrupted reward sum is derived as pre_reward_sum - attack_sum.
struct ArmStats {
  long pulls = 0;           // number of observations of this item
  long pre_reward_sum = 0;  // sum of uncorrupted feedback
  long attack_sum = 0;      // sum of applied corruptions, signed
  // Examination-weighted count. Both empirical means normalize by it, so
  // they estimate the click rate per unit of examination; unit-weight
  // observations keep it equal to pulls and the means are plain averages.
  double bias_corrected_pulls = 0.0;

  long post_reward_sum() const { return pre_reward_sum - attack_sum; }

  void observe(int pre_reward, double examination_weight = 1.0) {
    ++pulls;
    pre_reward_sum += pre_reward;
    bias_corrected_pulls += examination_weight;
  }

  void apply_attack(int alpha) { attack_sum += alpha; }

  double pre_mean() const;   // throws without observed examination mass
  double post_mean() const;  // throws without observed examination mass
};

// (pre mean, post mean) of one ledger entry; errors on zero pulls.
std::pair<double, double> empirical_means(const ArmStats& s);

}  // namespace poisonrank
