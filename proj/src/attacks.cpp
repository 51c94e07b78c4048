#include "poisonrank/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "poisonrank/errors.hpp"

namespace poisonrank {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Forgives upward fp noise at integer boundaries before rounding up, so a
// budget that is mathematically an integer never gets charged one extra.
int ceil_alpha(double g) {
  const int v = static_cast<int>(std::ceil(g - 1e-12));
  return v < 0 ? 0 : v;
}

// Budget term contributed by one protected item: [lower value - delta0]_+,
// zero when there is no information about the item yet.
double budget_term_live(const ArmStats& s, const BetaParams& bp,
                        double delta0) {
  if (s.pulls == 0) return 0.0;
  return clamp_plus(mu_lower(s, bp) - delta0);
}

double budget_term_snap(const ProtectedSnapshot& s, const BetaParams& bp,
                        double delta0) {
  if (!s.valid) return 0.0;
  return clamp_plus(mu_lower(s, bp) - delta0);
}

}  // namespace

std::string_view strategy_name(AttackStrategy s) {
  switch (s) {
    case AttackStrategy::kNone: return "none";
    case AttackStrategy::kUcbAttack: return "ucb_attack";
    case AttackStrategy::kPbmAttack: return "pbm_attack";
    case AttackStrategy::kCascadeAttack: return "cascade_attack";
    case AttackStrategy::kGeneralAttack: return "general_attack";
    case AttackStrategy::kTrivial1: return "trivial1";
    case AttackStrategy::kTrivialK: return "trivialK";
    case AttackStrategy::kModifiedJun: return "modified_jun";
  }
  throw InvariantError("strategy_name: unknown strategy");
}

std::optional<AttackStrategy> strategy_from_name(std::string_view name) {
  for (AttackStrategy s :
       {AttackStrategy::kNone, AttackStrategy::kUcbAttack,
        AttackStrategy::kPbmAttack, AttackStrategy::kCascadeAttack,
        AttackStrategy::kGeneralAttack, AttackStrategy::kTrivial1,
        AttackStrategy::kTrivialK, AttackStrategy::kModifiedJun})
    if (strategy_name(s) == name) return s;
  return std::nullopt;
}

void AttackConfig::finalize(int num_items) {
  if (target < 0 || target >= num_items)
    throw ConfigError("attack target out of range");
  if (!(delta0 > 0.0)) throw ConfigError("delta0 must be positive");
  if (protected_set.empty())
    throw ConfigError("protected set must not be empty");
  protected_mask.assign(num_items, 0);
  for (int a : protected_set) {
    if (a < 0 || a >= num_items)
      throw ConfigError("protected item out of range");
    if (protected_mask[a]) throw ConfigError("duplicate protected item");
    protected_mask[a] = 1;
  }
  if (!protected_mask[target])
    throw ConfigError("protected set must contain the target");
  for (double w : examination)
    if (!(w > 0.0) || w > 1.0)
      throw ConfigError("examination weight outside (0, 1]");
}

AttackState::AttackState(int num_items, int protected_count)
    : per_item(num_items),
      h(num_items, std::vector<long>(protected_count, 1)),
      snap(num_items, std::vector<ProtectedSnapshot>(protected_count)),
      touched(num_items, 0) {}

double mu_lower(const ArmStats& s, const BetaParams& bp) {
  return s.post_mean() - 2.0 * beta(bp, s.pulls);
}

double mu_lower(const ProtectedSnapshot& s, const BetaParams& bp) {
  if (!s.valid) throw InvariantError("mu_lower: empty snapshot");
  return s.post_mean - 2.0 * beta(bp, s.pulls);
}

int cal_alpha(AttackState& st, const AttackConfig& cfg, int l, int r0, long t,
              AttackDiagnostics* diag) {
  ArmStats& sl = st.per_item[l];
  if (sl.pulls <= 0)
    throw InvariantError("cal_alpha: observation not folded yet");
  const double corrupted_sum =
      static_cast<double>(sl.pre_reward_sum) - static_cast<double>(sl.attack_sum);
  const double mass = sl.bias_corrected_pulls;
  const int P = static_cast<int>(cfg.protected_set.size());

  double gamma_max = 0.0;
  double gamma_tilde_max = 0.0;
  for (int j = 0; j < P; ++j) {
    const ArmStats& sa = st.per_item[cfg.protected_set[j]];
    const double live = budget_term_live(sa, cfg.beta_params, cfg.delta0);
    const double frozen =
        budget_term_snap(st.snap[l][j], cfg.beta_params, cfg.delta0);
    gamma_max = std::max(gamma_max, clamp_plus(corrupted_sum - mass * live));
    gamma_tilde_max =
        std::max(gamma_tilde_max, clamp_plus(corrupted_sum - mass * frozen));
  }

  int alpha;
  const bool gate = gamma_max <= static_cast<double>(r0);
  if (gate) {
    alpha = ceil_alpha(gamma_max);
    for (int j = 0; j < P; ++j) {
      const ArmStats& sa = st.per_item[cfg.protected_set[j]];
      st.h[l][j] = t;
      st.snap[l][j] = sa.pulls > 0
                          ? ProtectedSnapshot{true, sa.post_mean(), sa.pulls}
                          : ProtectedSnapshot{};
    }
  } else {
    alpha = ceil_alpha(gamma_tilde_max);
  }
  if (alpha > r0)
    throw InvariantError("cal_alpha: corruption exceeds this round's feedback");

  st.touched[l] = 1;
  sl.apply_attack(alpha);
  st.cumulative_cost += std::abs(alpha);
  if (diag)
    diag->gammas.push_back({t, l, gamma_max, gamma_tilde_max, gate, alpha});
  return alpha;
}

int ucb_attack_round(AttackState& st, const AttackConfig& cfg, int arm, int r0,
                     long t, AttackDiagnostics* diag) {
  st.per_item[arm].observe(r0);
  if (cfg.is_protected(arm)) return 0;
  return cal_alpha(st, cfg, arm, r0, t, diag);
}

int modified_jun_round(AttackState& st, const AttackConfig& cfg, int arm,
                       int r0, long t) {
  (void)t;
  st.per_item[arm].observe(r0);
  if (cfg.is_protected(arm)) return 0;
  ArmStats& sl = st.per_item[arm];
  const ArmStats& tgt = st.per_item[cfg.target];
  bool over_budget;
  if (tgt.pulls == 0) {
    over_budget = true;  // no information about the target yet
  } else {
    const double corrupted_sum = static_cast<double>(sl.post_reward_sum());
    const double v = corrupted_sum -
                     static_cast<double>(sl.pulls) *
                         (mu_lower(tgt, cfg.beta_params) - cfg.delta0);
    over_budget = v > 0.0;
  }
  const int alpha = (over_budget && r0 == 1) ? 1 : 0;
  sl.apply_attack(alpha);
  st.cumulative_cost += alpha;
  return alpha;
}

std::vector<int> pbm_attack_round(AttackState& st, const AttackConfig& cfg,
                                  std::span<const int> action,
                                  const Feedback& pre, long t,
                                  AttackDiagnostics* diag) {
  const int K = static_cast<int>(action.size());
  std::vector<int> alpha(K, 0);
  for (int i = 0; i < K; ++i)
    st.per_item[action[i]].observe(pre.clicks[i], cfg.examination_weight(i));
  for (int i = 0; i < K; ++i) {
    if (cfg.is_protected(action[i])) continue;
    alpha[i] = cal_alpha(st, cfg, action[i], pre.clicks[i], t, diag);
  }
  return alpha;
}

std::vector<int> cascade_attack_round(AttackState& st, const AttackConfig& cfg,
                                      std::span<const int> action,
                                      const Feedback& pre, long t,
                                      AttackDiagnostics* diag) {
  const int K = static_cast<int>(action.size());
  std::vector<int> alpha(K, 0);
  const int C = pre.click_pos;
  if (C == kNoClick) {
    for (int i = 0; i < K; ++i) st.per_item[action[i]].observe(0);
    return alpha;
  }
  const int clicked = action[C];
  if (cfg.is_protected(clicked)) {
    for (int i = 0; i <= C; ++i) st.per_item[action[i]].observe(pre.clicks[i]);
    return alpha;
  }
  for (int i = 0; i < C; ++i) st.per_item[action[i]].observe(0);
  st.per_item[clicked].observe(1);
  alpha[C] = cal_alpha(st, cfg, clicked, 1, t, diag);
  if (alpha[C] == 1) {
    // The click was removed; relocate it to the first protected item shown
    // further down, if any, and extend the observed prefix accordingly.
    int comp = -1;
    for (int i = C + 1; i < K; ++i)
      if (cfg.is_protected(action[i])) {
        comp = i;
        break;
      }
    const int last = comp >= 0 ? comp : K - 1;
    for (int i = C + 1; i <= last; ++i) st.per_item[action[i]].observe(0);
    if (comp >= 0) {
      alpha[comp] = -1;
      st.per_item[action[comp]].apply_attack(-1);
      st.cumulative_cost += 1;
    }
  }
  return alpha;
}

std::vector<int> general_attack_round(AttackState& st, const AttackConfig& cfg,
                                      ClickModel kind,
                                      std::span<const int> action,
                                      const Feedback& pre, RngStream& coins,
                                      long t, AttackDiagnostics* diag) {
  const int K = static_cast<int>(action.size());
  std::vector<int> alpha(K, 0);
  int observed = K;
  if (kind == ClickModel::kCascade && pre.click_pos != kNoClick)
    observed = pre.click_pos + 1;
  for (int i = 0; i < observed; ++i)
    st.per_item[action[i]].observe(pre.clicks[i], cfg.examination_weight(i));
  for (int i = 0; i < observed; ++i) {
    const int l = action[i];
    if (cfg.is_protected(l) || pre.clicks[i] != 1) continue;
    const ArmStats& sl = st.per_item[l];
    const double upper = sl.pre_mean() + beta(cfg.beta_params, sl.pulls);
    double num = 0.0;
    for (int a : cfg.protected_set) {
      const ArmStats& sa = st.per_item[a];
      const double term =
          sa.pulls == 0
              ? kInf
              : clamp_plus(upper -
                           (sa.pre_mean() - beta(cfg.beta_params, sa.pulls)));
      num = std::max(num, term);
    }
    double p = num / upper;
    if (p > 1.0) p = 1.0;
    const bool flip = coins.bernoulli(p);
    if (flip) {
      alpha[i] = 1;
      st.per_item[l].apply_attack(1);
      st.cumulative_cost += 1;
    }
    if (diag) diag->coins.push_back({t, l, p, flip});
  }
  return alpha;
}

std::vector<int> trivial_attack_round(AttackState& st, const AttackConfig& cfg,
                                      ClickModel kind,
                                      std::span<const int> action,
                                      const Feedback& pre, long t) {
  (void)t;
  const int K = static_cast<int>(action.size());
  std::vector<int> alpha(K, 0);
  int observed = K;
  if (kind == ClickModel::kCascade && pre.click_pos != kNoClick)
    observed = pre.click_pos + 1;
  for (int i = 0; i < observed; ++i)
    st.per_item[action[i]].observe(pre.clicks[i], cfg.examination_weight(i));
  for (int i = 0; i < observed; ++i) {
    if (cfg.is_protected(action[i]) || pre.clicks[i] != 1) continue;
    alpha[i] = 1;
    st.per_item[action[i]].apply_attack(1);
    st.cumulative_cost += 1;
  }
  return alpha;
}

Feedback apply_alpha(ClickModel kind, const Feedback& pre,
                     std::span<const int> alpha) {
  if (alpha.size() != pre.clicks.size())
    throw InvariantError("apply_alpha: corruption length != feedback length");
  Feedback post;
  post.clicks.resize(pre.clicks.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const int v = static_cast<int>(pre.clicks[i]) - alpha[i];
    if (v < 0 || v > 1)
      throw InvariantError("apply_alpha: corrupted feedback left {0,1}");
    post.clicks[i] = static_cast<std::uint8_t>(v);
  }
  post.click_pos = first_click(post.clicks);
  if (!feasible(kind, post.clicks))
    throw InvariantError("apply_alpha: corrupted feedback infeasible");
  return post;
}

long count_conservative_violations(const AttackState& st,
                                   const AttackConfig& cfg) {
  long violations = 0;
  const int P = static_cast<int>(cfg.protected_set.size());
  for (int l = 0; l < static_cast<int>(st.per_item.size()); ++l) {
    if (!st.touched[l]) continue;
    const double pm = st.per_item[l].post_mean();
    for (int j = 0; j < P; ++j) {
      const double bound =
          budget_term_snap(st.snap[l][j], cfg.beta_params, cfg.delta0);
      if (pm > bound + 1e-9) ++violations;
    }
  }
  return violations;
}

}  // namespace poisonrank
