#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "creditlens/info.hpp"
#include "creditlens/trajectory.hpp"

namespace creditlens {

enum class Measure {
  pairwise_kl,
  info_sparsity,
  stepwise_reward_entropy,
  leave_one_out_cmi,
  history_cmi,
  hca_ratio,
  directed_info_credit,
  return_sequence_mi,
};

std::string measure_name(Measure m);
std::optional<Measure> measure_from_name(std::string_view name);

// Hindsight action distributions P(a_h = a | s_h = s, Z_1 = z) with Z_1 the
// full-trajectory return, one row per realized (step, state, return atom);
// rows sum to 1. Atom values use the merged return codebook of the analysis.
struct HindsightTable {
  struct Entry {
    int step = 0;
    int state = 0;
    double z = 0.0;
    std::vector<double> action_probs;
  };
  std::vector<Entry> entries;  // sorted by (step, state, z)
  std::map<std::tuple<int, int, int>, std::size_t> index;  // (h,s,zcode)->row
};

struct CreditEntry {
  int step = -1;  // 0-based; -1 for scalar rows
  int state = -1;
  int action = -1;
  Nats value;
  std::string flag;
};

struct ReportMetadata {
  std::string mdp_hash;
  std::string policy_hash;
  std::string computation_path;  // "exact-enumeration" or "plugin-mc"
  double merge_tolerance = 1e-9;
  double discount = 1.0;
  int horizon = 0;
  long long sample_size = 0;  // plugin path only
  long long missing_pairs = 0;  // plugin path only
};

enum class Grain { per_step_state_action, per_step, scalar };

struct CreditReport {
  Measure measure = Measure::info_sparsity;
  Grain grain = Grain::scalar;
  std::vector<CreditEntry> entries;
  ReportMetadata metadata;
};

/**
 * Exact credit measures over one enumerated trajectory table. The canonical
 * joint table (variables s1..sH, a1..aH, r1..rH, z1..zH, one outcome per
 * trajectory) is built lazily on first use and shared by every
 * history-conditioned measure, so all identities are evaluated against the
 * same grouping of return atoms.
 */
class CreditAnalysis {
 public:
  explicit CreditAnalysis(TrajectoryTable table, double merge_tol = 1e-9);

  const TrajectoryTable& table() const { return table_; }
  double merge_tolerance() const { return merge_tol_; }
  const JointTable& canonical_joint() const;

  // KL(p(Z_h | s,a) || p(Z_h | s)), supports aligned on the pooled per-state
  // clustering. Zero-policy actions are computed via the override rollout and
  // may be +infinity (support escape).
  Nats pairwise_credit(int h, int s, int a) const;

  // Occupancy-weighted aggregate of pairwise_credit over realized pairs
  // (normalized weights); zero-weight pairs are skipped.
  Nats information_sparsity() const;
  // Time-marginalized variant: per-(s,a) pooled return distributions under
  // occupancy weights. Not offset-invariant; reported only on request.
  Nats information_sparsity_time_pooled() const;

  Nats stepwise_reward_entropy(int h) const;  // H(R_h | tau^{h-1})
  Nats leave_one_out_cmi(int h) const;        // I(Z; tau_h | tau^{-h})
  Nats history_cmi(int h) const;              // I(Z; tau_h | tau^{h-1})
  Nats return_sequence_mi() const;            // I(tau; Z_1..Z_H)

  const HindsightTable& hindsight_table() const;
  // E[log h(a_h | s_h, Z) / pi_h(a_h | s_h)] over the trajectory joint.
  Nats hca_credit(int h) const;

  // (sum_h I(Z_h; tau^h | Z_{h+1..H}), sum_h H(R_h | Z_{h+1..H})).
  std::pair<Nats, Nats> directed_info_credit() const;

  CreditReport report(Measure measure, bool marginalize_time = false) const;

  // Realized (h,s,a) pairs (positive probability), lexicographic.
  const std::vector<std::tuple<int, int, int>>& realized_pairs() const;

 private:
  TrajectoryTable table_;
  double merge_tol_;
  struct Cache;
  std::shared_ptr<Cache> cache_;
};

// sup over the policy set of the exact information sparsity, its argmax
// index, and the epsilon verdict sup <= epsilon.
struct SparsityVerdict {
  bool is_sparse = false;
  Nats sup;
  int argmax_index = -1;
};
SparsityVerdict epsilon_sparsity_classify(const Mdp& m, const PolicySet& set,
                                          double epsilon, double budget = 1e7,
                                          double merge_tol = 1e-9);

// Shared formula layer: measures evaluated on any canonical joint (exact or
// empirical) with the standard variable naming.
Nats joint_stepwise_reward_entropy(const JointTable& j, int h, int horizon);
Nats joint_leave_one_out_cmi(const JointTable& j, int h, int horizon);
Nats joint_history_cmi(const JointTable& j, int h, int horizon);
Nats joint_return_sequence_mi(const JointTable& j, int horizon);
std::pair<Nats, Nats> joint_directed_info_credit(const JointTable& j,
                                                 int horizon);

// Canonical variable names for step h (0-based): s{h+1}, a{h+1}, ...
std::string var_s(int h);
std::string var_a(int h);
std::string var_r(int h);
std::string var_z(int h);

}  // namespace creditlens
