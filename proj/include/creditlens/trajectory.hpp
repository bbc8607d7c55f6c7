#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "creditlens/mdp.hpp"

namespace creditlens {

/**
 * Exhaustive table of every positive-probability trajectory
 * (s_0,a_0,...,s_{H-1},a_{H-1}) under a policy, with per-step rewards and
 * discounted returns-to-go. Rows are stored flat (index i, step h) and emitted
 * in lexicographic trajectory order, so a rebuild is byte-identical.
 *
 * returns satisfies the backward recursion
 *   z[i,H-1] = r[i,H-1];  z[i,h] = r[i,h] + discount * z[i,h+1]
 * exactly as computed (no re-summation).
 */
struct TrajectoryTable {
  Mdp mdp;
  TabularPolicy policy;
  std::size_t num_rows = 0;
  std::vector<double> probs;      // [i]
  std::vector<std::int32_t> states;   // [i*H + h]
  std::vector<std::int32_t> actions;  // [i*H + h]
  std::vector<double> rewards;    // [i*H + h]
  std::vector<double> returns;    // [i*H + h]

  int horizon() const { return mdp.horizon; }
  int state_at(std::size_t i, int h) const {
    return states[i * static_cast<std::size_t>(mdp.horizon) + h];
  }
  int action_at(std::size_t i, int h) const {
    return actions[i * static_cast<std::size_t>(mdp.horizon) + h];
  }
  double reward_at(std::size_t i, int h) const {
    return rewards[i * static_cast<std::size_t>(mdp.horizon) + h];
  }
  double return_at(std::size_t i, int h) const {
    return returns[i * static_cast<std::size_t>(mdp.horizon) + h];
  }

  // Pairwise-summed total probability; 1 within 1e-9 for valid inputs.
  double total_probability() const;
  // Marginal reach probabilities from the table.
  double state_visit_prob(int h, int s) const;
  double pair_visit_prob(int h, int s, int a) const;
};

// Exact count of positive-probability trajectories via a reachability
// product, evaluated before any row is materialized.
double count_positive_trajectories(const Mdp& m, const TabularPolicy& p);

// Enumerate every positive-probability trajectory. Throws BudgetExceeded when
// the pre-count exceeds `budget` rows (default 1e7).
TrajectoryTable enumerate_trajectories(const Mdp& m, const TabularPolicy& p,
                                       double budget = 1e7);

// Discounted state-action occupancy aggregated from a trajectory table:
//   weights[h,s,a] = gamma^h * P(s_h = s, a_h = a),
// normalizer = sum_h gamma^h. Weights sum to the normalizer.
struct Occupancy {
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> weights;  // [(h*S + s)*A + a]
  double normalizer = 0.0;

  double weight_at(int h, int s, int a) const {
    return weights[(static_cast<std::size_t>(h) * num_states + s) *
                       num_actions +
                   a];
  }
  double normalized_at(int h, int s, int a) const {
    return weight_at(h, s, a) / normalizer;
  }
};

Occupancy occupancy(const TrajectoryTable& t,
                    std::optional<double> gamma = std::nullopt);

// CSV export: header prob,s1,a1,...,sH,aH,r1,...,rH,z1,...,zH with numbers at
// 17 significant digits.
void write_trajectory_csv(std::ostream& out, const TrajectoryTable& t);

}  // namespace creditlens
