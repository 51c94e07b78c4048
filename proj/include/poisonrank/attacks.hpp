#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "poisonrank/core.hpp"
#include "poisonrank/env.hpp"
#include "poisonrank/rng.hpp"

namespace poisonrank {

enum class AttackStrategy {
  kNone,
  kUcbAttack,      // single recommendation, conservative budget
  kPbmAttack,      // position-based lists, conservative budget per position
  kCascadeAttack,  // cascade lists, click relocation
  kGeneralAttack,  // model-agnostic randomized flipping
  kTrivial1,       // flip every click outside the target
  kTrivialK,       // flip every click outside the protected set
  kModifiedJun,    // reward-shifting baseline adapted to binary feedback
};

std::string_view strategy_name(AttackStrategy s);
std::optional<AttackStrategy> strategy_from_name(std::string_view name);

struct AttackConfig {
  double delta0 = 0.1;    // margin kept below the protected items
  BetaParams beta_params;  // shares L with the environment; delta is the
                           // attacker's own confidence parameter
  int target = 0;
  std::vector<int> protected_set;   // contains the target
  std::vector<char> protected_mask;  // one flag per item, built by finalize
  // Per-position weights folded with list observations, mirroring the
  // environment's examination probabilities. Empty means unit weight, which
  // is always the case outside the position-based model.
  std::vector<double> examination;

  void finalize(int num_items);  // validates and builds the mask
  bool is_protected(int item) const { return protected_mask[item] != 0; }
  double examination_weight(int pos) const {
    return examination.empty() ? 1.0
                               : examination.at(static_cast<std::size_t>(pos));
  }
};

// State of a protected item captured when a timestamp last advanced. invalid
// means the item had no observations at that moment, in which case the
// corresponding budget term is zero.
struct ProtectedSnapshot {
  bool valid = false;
  double post_mean = 0.0;
  long pulls = 0;
};

// Attacker-side ledgers: uncorrupted sums, applied corruptions, conservative
// timestamps h[item][j] with the snapshot of protected item j taken when
// h[item][j] last advanced. Timestamps start at 1 with empty snapshots.
struct AttackState {
  std::vector<ArmStats> per_item;
  std::vector<std::vector<long>> h;
  std::vector<std::vector<ProtectedSnapshot>> snap;
  std::vector<char> touched;  // items that went through the budget rule
  long long cumulative_cost = 0;

  AttackState(int num_items, int protected_count);
};

// Values behind each corruption decision, for trace replay tests.
struct GammaRecord {
  long round = 0;
  int item = -1;
  double gamma_max = 0.0;        // live budget
  double gamma_tilde_max = 0.0;  // snapshot budget
  bool gate_passed = false;      // live budget fit into this round's feedback
  int alpha = 0;
};
struct CoinRecord {
  long round = 0;
  int item = -1;
  double p = 0.0;
  bool flipped = false;
};
struct AttackDiagnostics {
  std::vector<GammaRecord> gammas;
  std::vector<CoinRecord> coins;
};

// Lower confidence value post_mean - 2 beta(N), on live stats or a snapshot.
double mu_lower(const ArmStats& s, const BetaParams& bp);
double mu_lower(const ProtectedSnapshot& s, const BetaParams& bp);

// Corruption for one observation of item `l` with uncorrupted feedback r0
// this round. The observation must already be folded into st.per_item[l].
// The budget is kept in the learner's units: the item's corrupted click sum
// is held below its examination mass times the conservative floor. When the
// live budget fits into r0 the timestamps of item l advance to t and fresh
// snapshots are taken; otherwise the snapshot budget is charged. The
// returned alpha is applied to the ledger and added to the cost.
int cal_alpha(AttackState& st, const AttackConfig& cfg, int l, int r0, long t,
              AttackDiagnostics* diag = nullptr);

// One round against the single recommendation learner: folds the observation
// and corrupts non-target arms through the budget rule.
int ucb_attack_round(AttackState& st, const AttackConfig& cfg, int arm, int r0,
                     long t, AttackDiagnostics* diag = nullptr);

// Reward-shifting baseline: flips a click on a non-target arm whenever the
// arm's corrupted sum still exceeds N * (target lower value - delta0).
int modified_jun_round(AttackState& st, const AttackConfig& cfg, int arm,
                       int r0, long t);

// List rounds. Each returns one corruption per position; corrupted feedback
// is pre minus alpha.
std::vector<int> pbm_attack_round(AttackState& st, const AttackConfig& cfg,
                                  std::span<const int> action,
                                  const Feedback& pre, long t,
                                  AttackDiagnostics* diag = nullptr);
std::vector<int> cascade_attack_round(AttackState& st, const AttackConfig& cfg,
                                      std::span<const int> action,
                                      const Feedback& pre, long t,
                                      AttackDiagnostics* diag = nullptr);
std::vector<int> general_attack_round(AttackState& st, const AttackConfig& cfg,
                                      ClickModel kind,
                                      std::span<const int> action,
                                      const Feedback& pre, RngStream& coins,
                                      long t,
                                      AttackDiagnostics* diag = nullptr);
std::vector<int> trivial_attack_round(AttackState& st, const AttackConfig& cfg,
                                      ClickModel kind,
                                      std::span<const int> action,
                                      const Feedback& pre, long t);

// Applies per-position corruptions and validates the result stays feasible.
Feedback apply_alpha(ClickModel kind, const Feedback& pre,
                     std::span<const int> alpha);

// Number of (item, protected) pairs currently violating the inequality the
// budget rule maintains: for every item that went through the rule,
// post_mean(item) <= [snapshot lower value - delta0]_+ within fp slack.
long count_conservative_violations(const AttackState& st,
                                   const AttackConfig& cfg);

}  // namespace poisonrank
