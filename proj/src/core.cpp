#include "poisonrank/core.hpp"

#include <cmath>
#include <numbers>

#include "poisonrank/errors.hpp"

namespace poisonrank {

double beta(const BetaParams& bp, long n) {
  if (n <= 0) throw InvariantError("beta: pull count must be positive");
  if (bp.num_items < 1) throw ConfigError("beta: item count must be >= 1");
  if (!(bp.delta > 0.0) || bp.delta > 0.5)
    throw ConfigError("beta: delta must lie in (0, 1/2]");
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double nn = static_cast<double>(n);
  return std::sqrt(std::log(pi2 * bp.num_items * nn * nn / (3.0 * bp.delta)) /
                   (2.0 * nn));
}

double ArmStats::pre_mean() const {
  if (pulls == 0) throw InvariantError("pre_mean: no observations");
  if (!(bias_corrected_pulls > 0.0))
    throw InvariantError("pre_mean: no examination mass");
  return static_cast<double>(pre_reward_sum) / bias_corrected_pulls;
}

double ArmStats::post_mean() const {
  if (pulls == 0) throw InvariantError("post_mean: no observations");
  if (!(bias_corrected_pulls > 0.0))
    throw InvariantError("post_mean: no examination mass");
  return static_cast<double>(post_reward_sum()) / bias_corrected_pulls;
}

std::pair<double, double> empirical_means(const ArmStats& s) {
  return {s.pre_mean(), s.post_mean()};
}

}  // namespace poisonrank
