#include "poisonrank/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "poisonrank/errors.hpp"

namespace poisonrank {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Ranks all items by (index desc, id asc) and returns the best K.
std::vector<int> top_k_by_index(const LearnerState& s, int K,
                                double (*index_fn)(const ArmStats&, long,
                                                   double)) {
  std::vector<std::pair<double, int>> ranked(s.per_item.size());
  for (int a = 0; a < s.num_items(); ++a)
    ranked[a] = {index_fn(s.per_item[a], s.round, s.epsilon), a};
  std::partial_sort(ranked.begin(), ranked.begin() + K, ranked.end(),
                    [](const auto& x, const auto& y) {
                      if (x.first != y.first) return x.first > y.first;
                      return x.second < y.second;
                    });
  std::vector<int> action(K);
  for (int i = 0; i < K; ++i) action[i] = ranked[i].second;
  return action;
}

// The forced initialization lists: round j (1-based) shows items
// ((j-1)K + i) mod L at positions i = 0..K-1, so ceil(L/K) rounds cycle
// every item through a list once.
std::vector<int> init_list(int L, int K, long j) {
  std::vector<int> action(K);
  for (int i = 0; i < K; ++i)
    action[i] = static_cast<int>(((j - 1) * K + i) % L);
  return action;
}

double pbm_index_adapter(const ArmStats& s, long t, double eps) {
  return pbm_ucb_index(s, t, eps);
}

double cascade_index_adapter(const ArmStats& s, long t, double) {
  return cascade_ucb_index(s, t);
}

}  // namespace

double ucb_index(const ArmStats& s, long t) {
  if (s.pulls == 0) return kInf;
  return s.post_mean() + 1.5 * std::sqrt(std::log(static_cast<double>(t)) /
                                         static_cast<double>(s.pulls));
}

double pbm_ucb_index(const ArmStats& s, long t, double epsilon) {
  if (s.pulls == 0 || s.bias_corrected_pulls <= 0.0) return kInf;
  const double mean =
      static_cast<double>(s.post_reward_sum()) / s.bias_corrected_pulls;
  const double width = std::sqrt(
      static_cast<double>(s.pulls) * (1.0 + epsilon) *
      std::log(static_cast<double>(t)) /
      (2.0 * s.bias_corrected_pulls * s.bias_corrected_pulls));
  return mean + width;
}

double cascade_ucb_index(const ArmStats& s, long t) { return ucb_index(s, t); }

int ucb_choose(LearnerState& s) {
  ++s.round;
  const long t = s.round;
  if (t <= s.num_items()) return static_cast<int>(t - 1);
  int best = 0;
  double best_index = -kInf;
  for (int a = 0; a < s.num_items(); ++a) {
    const double idx = ucb_index(s.per_item[a], t);
    if (idx > best_index) {
      best_index = idx;
      best = a;
    }
  }
  return best;
}

std::vector<int> pbm_ucb_choose(LearnerState& s, int K) {
  ++s.round;
  const long init_rounds = (s.num_items() + K - 1) / K;
  if (s.round <= init_rounds) return init_list(s.num_items(), K, s.round);
  return top_k_by_index(s, K, pbm_index_adapter);
}

std::vector<int> cascade_ucb_choose(LearnerState& s, int K) {
  ++s.round;
  const long init_rounds = (s.num_items() + K - 1) / K;
  if (s.round <= init_rounds) return init_list(s.num_items(), K, s.round);
  return top_k_by_index(s, K, cascade_index_adapter);
}

void learner_update(LearnerState& s, ClickModel kind,
                    std::span<const double> kappa, std::span<const int> action,
                    const Feedback& post) {
  const int K = static_cast<int>(action.size());
  if (static_cast<int>(post.clicks.size()) != K)
    throw InvariantError("learner_update: feedback length != action length");
  switch (kind) {
    case ClickModel::kSingleArm:
      s.per_item[action[0]].observe(post.clicks[0]);
      break;
    case ClickModel::kPositionBased:
      for (int i = 0; i < K; ++i)
        s.per_item[action[i]].observe(post.clicks[i], kappa[i]);
      break;
    case ClickModel::kCascade: {
      const int stop = first_click(post.clicks);
      const int observed = stop == kNoClick ? K : stop + 1;
      for (int i = 0; i < observed; ++i)
        s.per_item[action[i]].observe(post.clicks[i]);
      break;
    }
  }
}

}  // namespace poisonrank
