#include "creditlens/propositions.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "creditlens/numeric.hpp"

namespace creditlens {

namespace {

bool has_flag(const std::vector<std::string>& flags, const char* flag) {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

PropositionVerdict make_verdict(std::string name, std::string detail,
                                double lhs, double rhs, double tol, bool gated,
                                std::vector<std::string> flags) {
  PropositionVerdict v;
  v.name = std::move(name);
  v.detail = std::move(detail);
  v.lhs = lhs;
  v.rhs = rhs;
  v.gap = std::abs(lhs - rhs);
  v.tolerance = tol;
  v.holds = v.gap <= tol;
  v.gated = gated;
  v.flags = std::move(flags);
  return v;
}

double uniform_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace

std::string PropositionVerdict::verdict() const {
  if (has_flag(flags, "not_applicable")) return "not-applicable";
  return holds ? "equal-within-tol" : "discrepant";
}

std::vector<PropositionVerdict> check_propositions(
    const Mdp& m, const TabularPolicy& policy,
    const PropositionOptions& opts) {
  const TrajectoryTable table =
      enumerate_trajectories(m, policy, opts.budget);
  const CreditAnalysis analysis(table, opts.merge_tol);
  const int H = m.horizon;
  const double tol = opts.tolerance;
  std::vector<PropositionVerdict> out;

  const bool action_free_t = m.action_independent_transitions();
  const bool delta_start = m.deterministic_start();

  // Leave-one-out CMI against stepwise reward entropy. Exact at the final
  // step for positive discount; diagnostic elsewhere (the conditional
  // independence behind the general claim can fail for h < H, including
  // under action-independent transitions).
  for (int h = 0; h < H; ++h) {
    std::vector<std::string> flags;
    if (h == H - 1) flags.push_back("h_equals_H");
    if (action_free_t) flags.push_back("action_independent_transitions");
    if (m.discount == 0.0) {
      flags.push_back("gamma_zero");
      flags.push_back("not_applicable");
    }
    const bool gated = (h == H - 1) && m.discount > 0.0;
    out.push_back(make_verdict(
        "loo_cmi_equals_stepwise_entropy", "h=" + std::to_string(h + 1),
        analysis.leave_one_out_cmi(h).value,
        analysis.stepwise_reward_entropy(h).value, tol, gated,
        std::move(flags)));
  }

  // Hindsight log-ratio against history CMI. Exact at the first step when
  // the start state is deterministic (the gap at h=1 is exactly the
  // information the return carries about the initial state); assumed
  // factorization elsewhere.
  for (int h = 0; h < H; ++h) {
    std::vector<std::string> flags;
    if (h == 0) {
      flags.push_back("h_equals_1");
      if (delta_start) flags.push_back("deterministic_start");
    } else {
      flags.push_back("factorization_assumed");
    }
    const bool gated = (h == 0) && delta_start;
    out.push_back(make_verdict(
        "hca_equals_history_cmi", "h=" + std::to_string(h + 1),
        analysis.hca_credit(h).value, analysis.history_cmi(h).value, tol,
        gated, std::move(flags)));
  }

  // Chain rule: the per-step history CMIs sum to the full return entropy
  // (deterministic rewards make H(Z | trajectory) = 0).
  {
    double sum = 0.0;
    for (int h = 0; h < H; ++h) sum += analysis.history_cmi(h).value;
    const std::vector<std::string> z1{var_z(0)};
    out.push_back(make_verdict("history_cmi_chain_rule", "sum over h", sum,
                               analysis.canonical_joint().entropy(z1).value,
                               tol, true, {}));
  }

  // Triple equality: trajectory/return-sequence MI, the hindsight-ordered
  // directed sum, and the conditional reward entropy sum.
  {
    const double mi = analysis.return_sequence_mi().value;
    const auto [directed, entropy_sum] = analysis.directed_info_credit();
    out.push_back(make_verdict("return_mi_equals_directed_sum", "", mi,
                               directed.value, tol, true, {}));
    out.push_back(make_verdict("directed_sum_equals_reward_entropy_sum", "",
                               directed.value, entropy_sum.value, tol, true,
                               {}));
  }

  // Occupancy expectation identity on random state-action functions.
  {
    const Occupancy occ = occupancy(table);
    const int S = m.num_states;
    const int A = m.num_actions;
    double max_gap = 0.0;
    std::vector<double> f(static_cast<std::size_t>(S) * A);
    for (int k = 0; k < opts.random_function_count; ++k) {
      for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
          const auto key = static_cast<std::uint64_t>(k) * 1000003ULL +
                           static_cast<std::uint64_t>(s) * A + a;
          f[static_cast<std::size_t>(s) * A + a] =
              2.0 * uniform_from_bits(mix64(opts.seed ^ mix64(key))) - 1.0;
        }
      }
      double lhs = 0.0;
      for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s) {
          for (int a = 0; a < A; ++a) {
            lhs += occ.normalized_at(h, s, a) *
                   f[static_cast<std::size_t>(s) * A + a];
          }
        }
      }
      double rhs = 0.0;
      for (std::size_t i = 0; i < table.num_rows; ++i) {
        double path_sum = 0.0;
        double power = 1.0;
        for (int h = 0; h < H; ++h) {
          path_sum += power * f[static_cast<std::size_t>(
                                    table.state_at(i, h)) * A +
                                table.action_at(i, h)];
          power *= m.discount;
        }
        rhs += table.probs[i] * path_sum;
      }
      rhs /= occ.normalizer;
      max_gap = std::max(max_gap, std::abs(lhs - rhs));
    }
    out.push_back(make_verdict(
        "occupancy_expectation_identity",
        "max gap over " + std::to_string(opts.random_function_count) +
            " random f",
        max_gap, 0.0, tol, true, {}));
  }

  // Entropy/MI facts evaluated on the trajectory-induced joint, using the
  // backward identity z1 = r1 + discount * z2 for the arithmetic supports.
  const JointTable& joint = analysis.canonical_joint();
  const std::vector<std::string> a1{var_a(0)};
  const std::vector<std::string> s1{var_s(0)};
  const std::vector<std::string> z1{var_z(0)};
  const std::vector<std::string> r1{var_r(0)};
  if (H >= 2) {
    const std::vector<std::string> z2{var_z(1)};
    const double gamma = m.discount;
    const JointTable with_gz = joint.with_derived(
        "scaled_tail_return", z2,
        [gamma](std::span<const double> v) { return gamma * v[0]; },
        opts.merge_tol);
    const std::vector<std::string> gz{"scaled_tail_return"};
    out.push_back(make_verdict(
        "entropy_shift_invariance", "H(z1|r1) vs H(discount*z2|r1)",
        with_gz.conditional_entropy(z1, r1).value,
        with_gz.conditional_entropy(gz, r1).value, tol, true, {}));
    out.push_back(make_verdict(
        "cmi_additive_shift", "I(z1;a1|r1) vs I(discount*z2;a1|r1)",
        with_gz.conditional_mi(z1, a1, r1).value,
        with_gz.conditional_mi(gz, a1, r1).value, tol, true, {}));
  } else {
    out.push_back(make_verdict("entropy_shift_invariance", "needs H >= 2",
                               0.0, 0.0, tol, false, {"not_applicable"}));
    out.push_back(make_verdict("cmi_additive_shift", "needs H >= 2", 0.0,
                               0.0, tol, false, {"not_applicable"}));
  }
  {
    // Decompose I(a1; z1, s1) in both expansion orders.
    const double lhs = joint.mutual_information(a1, z1).value +
                       joint.conditional_mi(a1, s1, z1).value;
    const double rhs = joint.mutual_information(a1, s1).value +
                       joint.conditional_mi(a1, z1, s1).value;
    out.push_back(make_verdict("mi_decomposition_order",
                               "I(a1;z1,s1) expanded both ways", lhs, rhs,
                               tol, true, {}));
  }
  return out;
}

bool all_gated_hold(const std::vector<PropositionVerdict>& verdicts) {
  for (const auto& v : verdicts) {
    if (v.gated && !v.holds) return false;
  }
  return true;
}

void write_verdicts_json(std::ostream& os,
                         const std::vector<PropositionVerdict>& verdicts) {
  using json = nlohmann::ordered_json;
  json list = json::array();
  for (const auto& v : verdicts) {
    json row;
    row["name"] = v.name;
    row["detail"] = v.detail;
    row["lhs"] = std::isfinite(v.lhs) ? json(v.lhs) : json("inf");
    row["rhs"] = std::isfinite(v.rhs) ? json(v.rhs) : json("inf");
    row["gap"] = std::isfinite(v.gap) ? json(v.gap) : json("inf");
    row["tolerance"] = v.tolerance;
    row["verdict"] = v.verdict();
    row["gated"] = v.gated;
    row["flags"] = v.flags;
    list.push_back(std::move(row));
  }
  os << list.dump(2) << '\n';
}

}  // namespace creditlens
