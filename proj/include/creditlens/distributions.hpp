#pragma once

#include <utility>
#include <vector>

#include "creditlens/trajectory.hpp"

namespace creditlens {

/**
 * Discrete distribution over real atoms, sorted ascending. Atoms closer than
 * merge_tolerance are collapsed into one atom at the probability-weighted
 * mean (greedy chaining), so surviving neighbors differ by more than the
 * tolerance. Probabilities are positive and sum to 1 within 1e-9.
 */
struct DiscreteDist {
  std::vector<double> values;
  std::vector<double> probs;
  double merge_tolerance = 1e-9;

  static DiscreteDist from_atoms(std::vector<std::pair<double, double>> atoms,
                                 double merge_tol);
  double mean() const;
  std::size_t size() const { return values.size(); }
};

using ReturnDist = DiscreteDist;

// Exact conditional distribution of returns[h] given (s_h = s, a_h = a),
// aggregated from the table. When the state is reachable but the policy puts
// zero mass on the action, the distribution is computed by a policy-override
// rollout (the forced action at step h, the policy afterwards). An
// unreachable state is an error naming the triple.
ReturnDist return_distribution(const TrajectoryTable& t, int h, int s, int a,
                               double merge_tol = 1e-9);

// Mixture over actions with weights pi_h(a|s); requires P(s_h = s) > 0.
ReturnDist state_return_distribution(const TrajectoryTable& t, int h, int s,
                                     double merge_tol = 1e-9);

// Wasserstein-1 distance between two discrete distributions.
double wasserstein1(const DiscreteDist& p, const DiscreteDist& q);

}  // namespace creditlens
