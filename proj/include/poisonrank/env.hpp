#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "poisonrank/rng.hpp"

namespace poisonrank {

enum class ClickModel { kSingleArm, kPositionBased, kCascade };

std::string_view click_model_name(ClickModel m);
ClickModel click_model_from_name(std::string_view name);  // throws ConfigError

// Position index meaning "no click this round".
inline constexpr int kNoClick = std::numeric_limits<int>::max();

// Stochastic click environment over `means.size()` items. `kappa` holds the
// per-position examination probabilities of the position-based model and must
// be non-increasing; the other models ignore it.
struct EnvModel {
  ClickModel kind = ClickModel::kSingleArm;
  std::vector<double> means;
  std::vector<double> kappa;
  int list_len = 1;

  int num_items() const { return static_cast<int>(means.size()); }
  void validate() const;  // throws ConfigError

  double gap(int item, int target) const {
    return means[item] - means[target];
  }

  // Product of the K-1 largest attraction probabilities: the examination
  // floor of the last list position under the cascade model.
  double p_star() const;
};

// One round of uncorrupted feedback.
struct Feedback {
  std::vector<std::uint8_t> clicks;  // one entry per position
  int click_pos = kNoClick;          // first clicked position, kNoClick if none
};

// Draws one round of feedback for the given ranked action. Always consumes
// exactly list_len uniforms from `rng`, so paired runs stay aligned even when
// their actions differ. Under the cascade model positions after the first
// click are reported as 0 (never examined by the user).
Feedback draw_feedback(const EnvModel& env, std::span<const int> action,
                       RngStream& rng);

// Whether a corrupted click vector is admissible for the model: binary
// everywhere, and at most one click under the cascade model.
bool feasible(ClickModel kind, std::span<const std::uint8_t> clicks);

// First clicked position of a vector, kNoClick if none.
int first_click(std::span<const std::uint8_t> clicks);

}  // namespace poisonrank
