#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "creditlens/errors.hpp"

namespace creditlens {

/**
 * Finite-horizon tabular MDP with deterministic rewards R(s,a), stochastic
 * transitions T(s'|s,a), an initial state distribution and a discount in
 * [0,1]. Episodes run exactly `horizon` steps; there is no terminal state.
 *
 * Layout: reward is [s*A + a], transition is [(s*A + a)*S + s_next].
 */
struct Mdp {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  double discount = 1.0;
  std::vector<double> initial_dist;
  std::vector<double> reward;
  std::vector<double> transition;
  std::vector<std::string> labels;  // optional; empty or one per state

  double reward_at(int s, int a) const {
    return reward[static_cast<std::size_t>(s) * num_actions + a];
  }
  std::span<const double> transition_row(int s, int a) const {
    return std::span<const double>(transition)
        .subspan((static_cast<std::size_t>(s) * num_actions + a) * num_states,
                 num_states);
  }

  // Sum of discount powers over the horizon: sum_{h=0}^{H-1} gamma^h.
  double discounted_mass() const;
  double min_reward() const;
  double max_reward() const;

  // True when every transition row at a state is identical across actions.
  bool action_independent_transitions(double tol = 1e-12) const;
  // True when rewards at a state are identical across actions.
  bool action_independent_rewards(double tol = 1e-12) const;
  // True when the initial distribution is a point mass.
  bool deterministic_start() const;
};

// Non-stationary policy: one stochastic row per (step, state).
// Layout: probs is [(h*S + s)*A + a], steps 0-based.
struct TabularPolicy {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  std::vector<double> probs;

  double prob_at(int h, int s, int a) const {
    return probs[(static_cast<std::size_t>(h) * num_states + s) * num_actions +
                 a];
  }
  std::span<const double> row(int h, int s) const {
    return std::span<const double>(probs)
        .subspan((static_cast<std::size_t>(h) * num_states + s) * num_actions,
                 num_actions);
  }
};

// Finite policy set; used by the epsilon-sparsity classifier.
struct PolicySet {
  std::vector<TabularPolicy> members;
};

// Reward shaping transforms. Each produces a new MDP; inputs are never
// mutated. negated_distance adds -E_{s'~T(.|s,a)}[metric(s', goal)];
// potential_based adds discount*E_{s'}[phi(s')] - phi(s).
struct ConstantOffset {
  double offset = 0.0;
};
struct NegatedDistance {
  int goal = 0;
  std::vector<double> metric;  // [s*S + s2], nonnegative
};
struct PotentialBased {
  std::vector<double> phi;  // one potential per state
};
using ShapingTransform =
    std::variant<ConstantOffset, NegatedDistance, PotentialBased>;

// Structural validation. Returns every violation found; never throws and
// never aborts on the first problem.
std::vector<Violation> validate_mdp(const Mdp& m);
std::vector<Violation> validate_policy(const TabularPolicy& p, const Mdp& m);

// Deterministic 1-D chain: states 0..n-1, actions {0=left, 1=right}, moves
// clipped at the ends, the single nonzero reward on the move entering state
// n-1, initial mass on state 0. Requires n >= 2.
Mdp make_chain(int n, int horizon, double goal_reward, double discount);

// width x height gridworld with 4 cardinal actions (0=up,1=down,2=left,
// 3=right), edge moves clipped. With probability `slip` the agent moves in a
// uniformly random cardinal direction instead of the chosen one. Rewards are
// canonicalized to R(s,a) = P(next = goal | s,a). Initial distribution is
// uniform over non-goal cells. State index is y*width + x.
Mdp make_gridworld(int width, int height, int goal_x, int goal_y, int horizon,
                   double discount, double slip);

// Manhattan distances between all cell pairs of a width x height grid,
// as a flat [s*S + s2] table. Default metric for negated-distance shaping.
std::vector<double> manhattan_metric(int width, int height);

// Uniform stochastic policy over all actions at every step and state.
TabularPolicy uniform_policy(const Mdp& m);

// Apply a shaping transform; returns a new MDP, validating transform inputs.
Mdp apply_shaping(const Mdp& m, const ShapingTransform& transform);

int grid_cell(int width, int x, int y);

}  // namespace creditlens
