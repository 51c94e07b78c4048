#pragma once

#include <span>
#include <vector>

#include "poisonrank/core.hpp"
#include "poisonrank/env.hpp"

namespace poisonrank {

// Learner-side ledger. The learner only ever sees corrupted feedback, so it
// folds rewards into pre_reward_sum and never touches attack_sum; its pre and
// post sums therefore coincide.
struct LearnerState {
  std::vector<ArmStats> per_item;
  long round = 0;        // t; incremented at the start of each choice
  double epsilon = 0.1;  // width parameter of the position-based index

  explicit LearnerState(int num_items, double eps = 0.1)
      : per_item(num_items), epsilon(eps) {}

  int num_items() const { return static_cast<int>(per_item.size()); }
};

// Index values, exposed for tests. Items without observations rank as
// +infinity. t is the current round.
double ucb_index(const ArmStats& s, long t);  // mean + (3/2) sqrt(ln t / N)
double pbm_ucb_index(const ArmStats& s, long t, double epsilon);
double cascade_ucb_index(const ArmStats& s, long t);

// Single recommendation per round. Rounds 1..L play each item once; after
// that the highest index wins, ties going to the smallest item id.
int ucb_choose(LearnerState& s);

// Ranked list of K items, ordered by decreasing index with ties to the
// smaller id. The first ceil(L/K) rounds cycle every item through a list
// once; censored feedback can still leave an item unobserved afterwards, in
// which case its infinite index floats it to the front.
std::vector<int> pbm_ucb_choose(LearnerState& s, int K);
std::vector<int> cascade_ucb_choose(LearnerState& s, int K);

// Folds one round of corrupted feedback. The position-based learner observes
// every position and accrues the position's examination probability into the
// weighted pull counter; the cascade learner observes positions up to and
// including the first click (all of them when there is none); the single
// recommendation learner observes its one position.
void learner_update(LearnerState& s, ClickModel kind,
                    std::span<const double> kappa, std::span<const int> action,
                    const Feedback& post);

}  // namespace poisonrank
