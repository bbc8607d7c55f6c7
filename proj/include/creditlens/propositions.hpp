#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "creditlens/credit.hpp"

namespace creditlens {

/**
 * One verified identity or bound. `holds` reports whether the numbers agree
 * within `tolerance`; `gated` reports whether a discrepancy should fail the
 * run. Identities that only bind under structural preconditions (final step,
 * deterministic start, nonzero discount) are checked everywhere but gated
 * only where they bind, with the active flags recorded.
 */
struct PropositionVerdict {
  std::string name;
  std::string detail;   // instance description, e.g. "h=2 s=1"
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;     // |lhs - rhs|, or max gap for grouped checks
  double tolerance = 0.0;
  bool holds = false;
  bool gated = true;
  std::vector<std::string> flags;

  // "equal-within-tol", "discrepant", or "not-applicable".
  std::string verdict() const;
};

struct PropositionOptions {
  double tolerance = 1e-9;
  double budget = 1e7;
  double merge_tol = 1e-9;
  int random_function_count = 20;  // for the data-processing check
  std::uint64_t seed = 7;
};

// Runs every built-in identity check against one MDP/policy pair.
std::vector<PropositionVerdict> check_propositions(
    const Mdp& m, const TabularPolicy& policy,
    const PropositionOptions& opts = {});

// True when every gated verdict holds.
bool all_gated_hold(const std::vector<PropositionVerdict>& verdicts);

void write_verdicts_json(std::ostream& os,
                         const std::vector<PropositionVerdict>& verdicts);

}  // namespace creditlens
