#pragma once

#include <vector>

#include "creditlens/mdp.hpp"

namespace creditlens {

// Exact policy evaluation by backward induction:
//   Q_h(s,a) = R(s,a) + gamma * sum_{s'} T(s'|s,a) V_{h+1}(s'),
//   V_h(s)   = sum_a pi_h(a|s) Q_h(s,a),  V_H = 0.
// Steps are 0-based; Q is [(h*S + s)*A + a], V is [h*S + s].
struct ValueTables {
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> v;
  std::vector<double> q;

  double v_at(int h, int s) const {
    return v[static_cast<std::size_t>(h) * num_states + s];
  }
  double q_at(int h, int s, int a) const {
    return q[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
  }
};

ValueTables value_functions(const Mdp& m, const TabularPolicy& p);

}  // namespace creditlens
