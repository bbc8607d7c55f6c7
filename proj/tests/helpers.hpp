#pragma once

#include <cstdint>
#include <vector>

#include "creditlens/mdp.hpp"
#include "creditlens/info.hpp"
#include "creditlens/sampling.hpp"

namespace testutil {

// One-step two-arm bandit with rewards {0, 1}: the smallest MDP whose
// information sparsity under the uniform policy is ln 2 by hand calculation.
inline creditlens::Mdp make_bandit() {
  creditlens::Mdp m;
  m.num_states = 1;
  m.num_actions = 2;
  m.horizon = 1;
  m.discount = 1.0;
  m.initial_dist = {1.0};
  m.reward = {0.0, 1.0};
  m.transition = {1.0, 1.0};
  return m;
}

// Deterministic pseudo-random MDP family used by the property suites:
// S in 2..4, A in 1..3, H in 1..4, gamma in {1, 0.75, 0.5}, rewards exact
// multiples of 0.25 in [-1, 1], point-mass start at state 0, dense random
// transitions. Dyadic rewards and discounts keep every return value exact in
// double arithmetic, so identity checks are limited only by summation error.
inline creditlens::Mdp random_mdp(std::uint64_t seed) {
  creditlens::CounterRng rng(seed, 0);
  const auto pick = [&rng](int lo, int hi) {
    return lo + static_cast<int>(rng.uniform() * (hi - lo + 1));
  };
  creditlens::Mdp m;
  m.num_states = pick(2, 4);
  m.num_actions = pick(1, 3);
  m.horizon = pick(1, 4);
  const double gammas[] = {1.0, 0.75, 0.5};
  m.discount = gammas[pick(0, 2)];
  m.initial_dist.assign(m.num_states, 0.0);
  m.initial_dist[0] = 1.0;
  m.reward.resize(static_cast<std::size_t>(m.num_states) * m.num_actions);
  for (auto& r : m.reward) r = 0.25 * pick(-4, 4);
  m.transition.resize(static_cast<std::size_t>(m.num_states) *
                      m.num_actions * m.num_states);
  for (int s = 0; s < m.num_states; ++s) {
    for (int a = 0; a < m.num_actions; ++a) {
      double total = 0.0;
      const std::size_t base =
          (static_cast<std::size_t>(s) * m.num_actions + a) * m.num_states;
      for (int s2 = 0; s2 < m.num_states; ++s2) {
        const double w = 0.05 + rng.uniform();
        m.transition[base + s2] = w;
        total += w;
      }
      for (int s2 = 0; s2 < m.num_states; ++s2) {
        m.transition[base + s2] /= total;
      }
    }
  }
  return m;
}

inline creditlens::TabularPolicy random_policy(const creditlens::Mdp& m,
                                               std::uint64_t seed) {
  creditlens::CounterRng rng(seed, 1);
  creditlens::TabularPolicy p;
  p.num_states = m.num_states;
  p.num_actions = m.num_actions;
  p.horizon = m.horizon;
  p.probs.resize(static_cast<std::size_t>(m.horizon) * m.num_states *
                 m.num_actions);
  for (int h = 0; h < m.horizon; ++h) {
    for (int s = 0; s < m.num_states; ++s) {
      double total = 0.0;
      const std::size_t base =
          (static_cast<std::size_t>(h) * m.num_states + s) * m.num_actions;
      for (int a = 0; a < m.num_actions; ++a) {
        const double w = 0.1 + rng.uniform();
        p.probs[base + a] = w;
        total += w;
      }
      for (int a = 0; a < m.num_actions; ++a) p.probs[base + a] /= total;
    }
  }
  return p;
}

// Random three-variable joint table with small-integer supports, so derived
// arithmetic variables (x + y and the like) have exact values.
inline creditlens::JointTable random_joint_table(std::uint64_t seed) {
  creditlens::CounterRng rng(seed, 2);
  const auto pick = [&rng](int lo, int hi) {
    return lo + static_cast<int>(rng.uniform() * (hi - lo + 1));
  };
  const int nx = pick(2, 3);
  const int ny = pick(2, 3);
  const int nz = pick(2, 3);
  const auto values = [](int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = i;
    return v;
  };
  std::vector<creditlens::JointTable::Variable> vars = {
      {"x", values(nx)}, {"y", values(ny)}, {"z", values(nz)}};

  const int outcomes = nx * ny * nz;
  std::vector<std::int32_t> codes;
  codes.reserve(static_cast<std::size_t>(outcomes) * 3);
  std::vector<double> probs(outcomes);
  double total = 0.0;
  for (int cx = 0; cx < nx; ++cx) {
    for (int cy = 0; cy < ny; ++cy) {
      for (int cz = 0; cz < nz; ++cz) {
        codes.push_back(cx);
        codes.push_back(cy);
        codes.push_back(cz);
        const double w = 0.01 + rng.uniform();
        probs[static_cast<std::size_t>((cx * ny + cy) * nz + cz)] = w;
        total += w;
      }
    }
  }
  for (auto& p : probs) p /= total;
  return creditlens::JointTable(std::move(vars), std::move(codes),
                                std::move(probs));
}

}  // namespace testutil
