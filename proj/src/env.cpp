#include "poisonrank/env.hpp"

#include <algorithm>
#include <functional>
#include <string>

#include "poisonrank/errors.hpp"

namespace poisonrank {

std::string_view click_model_name(ClickModel m) {
  switch (m) {
    case ClickModel::kSingleArm: return "single";
    case ClickModel::kPositionBased: return "pbm";
    case ClickModel::kCascade: return "cascade";
  }
  throw InvariantError("click_model_name: unknown model");
}

ClickModel click_model_from_name(std::string_view name) {
  if (name == "single") return ClickModel::kSingleArm;
  if (name == "pbm") return ClickModel::kPositionBased;
  if (name == "cascade") return ClickModel::kCascade;
  throw ConfigError("unknown click model '" + std::string(name) + "'");
}

void EnvModel::validate() const {
  if (num_items() < 2) throw ConfigError("environment needs at least 2 items");
  for (double m : means)
    if (!(m >= 0.0) || m > 1.0)
      throw ConfigError("item attraction probabilities must lie in [0, 1]");
  if (list_len < 1 || list_len > num_items())
    throw ConfigError("list length must lie in [1, number of items]");
  if (kind == ClickModel::kSingleArm && list_len != 1)
    throw ConfigError("the single recommendation model requires list length 1");
  if (kind == ClickModel::kPositionBased) {
    if (static_cast<int>(kappa.size()) != list_len)
      throw ConfigError("need one examination probability per position");
    for (std::size_t i = 0; i < kappa.size(); ++i) {
      if (!(kappa[i] > 0.0) || kappa[i] > 1.0)
        throw ConfigError("examination probabilities must lie in (0, 1]");
      if (i > 0 && kappa[i] > kappa[i - 1])
        throw ConfigError("examination probabilities must be non-increasing");
    }
  }
}

double EnvModel::p_star() const {
  std::vector<double> sorted = means;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double p = 1.0;
  for (int i = 0; i < list_len - 1; ++i) p *= sorted[i];
  return p;
}

namespace {

void check_action(const EnvModel& env, std::span<const int> action) {
  if (static_cast<int>(action.size()) != env.list_len)
    throw InvariantError("draw_feedback: action length != list length");
  // Stamp buffer so the distinctness check stays O(K) per round.
  thread_local std::vector<long> stamp;
  thread_local long tick = 0;
  if (static_cast<int>(stamp.size()) < env.num_items())
    stamp.assign(env.num_items(), 0);
  ++tick;
  for (int a : action) {
    if (a < 0 || a >= env.num_items())
      throw InvariantError("draw_feedback: item id out of range");
    if (stamp[a] == tick)
      throw InvariantError("draw_feedback: duplicate item in action");
    stamp[a] = tick;
  }
}

}  // namespace

Feedback draw_feedback(const EnvModel& env, std::span<const int> action,
                       RngStream& rng) {
  check_action(env, action);
  const int K = env.list_len;
  Feedback fb;
  fb.clicks.assign(K, 0);
  switch (env.kind) {
    case ClickModel::kSingleArm:
    case ClickModel::kCascade: {
      for (int i = 0; i < K; ++i)
        fb.clicks[i] = rng.uniform() < env.means[action[i]] ? 1 : 0;
      break;
    }
    case ClickModel::kPositionBased: {
      for (int i = 0; i < K; ++i)
        fb.clicks[i] =
            rng.uniform() < env.kappa[i] * env.means[action[i]] ? 1 : 0;
      break;
    }
  }
  fb.click_pos = first_click(fb.clicks);
  if (env.kind == ClickModel::kCascade && fb.click_pos != kNoClick) {
    // The user stops scanning at the first attractive item.
    for (int i = fb.click_pos + 1; i < K; ++i) fb.clicks[i] = 0;
  }
  return fb;
}

bool feasible(ClickModel kind, std::span<const std::uint8_t> clicks) {
  int total = 0;
  for (std::uint8_t c : clicks) {
    if (c > 1) return false;
    total += c;
  }
  if (kind == ClickModel::kCascade) return total <= 1;
  return true;
}

int first_click(std::span<const std::uint8_t> clicks) {
  for (std::size_t i = 0; i < clicks.size(); ++i)
    if (clicks[i]) return static_cast<int>(i);
  return kNoClick;
}

}  // namespace poisonrank
