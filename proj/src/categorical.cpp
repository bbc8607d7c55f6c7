#include "creditlens/categorical.hpp"

#include <algorithm>
#include <cmath>

#include "creditlens/numeric.hpp"

namespace creditlens {

double CategoricalTable::mean_at(int h, int s, int a) const {
  const auto m = mass_at(h, s, a);
  std::vector<double> terms(m.size());
  for (std::size_t j = 0; j < m.size(); ++j) terms[j] = grid[j] * m[j];
  return pairwise_sum(terms);
}

DiscreteDist CategoricalTable::dist_at(int h, int s, int a) const {
  const auto m = mass_at(h, s, a);
  DiscreteDist d;
  for (std::size_t j = 0; j < m.size(); ++j) {
    if (m[j] > 0.0) {
      d.values.push_back(grid[j]);
      d.probs.push_back(m[j]);
    }
  }
  return d;
}

CategoricalTable categorical_return_dp(const Mdp& m, const TabularPolicy& p,
                                       int num_atoms) {
  if (num_atoms < 2) {
    throw ValidationError(std::vector<Violation>{{"num_atoms", "needs at least 2 grid atoms"}});
  }
  {
    auto violations = validate_mdp(m);
    auto more = validate_policy(p, m);
    violations.insert(violations.end(), more.begin(), more.end());
    if (!violations.empty()) throw ValidationError(std::move(violations));
  }

  const int S = m.num_states;
  const int A = m.num_actions;
  const int H = m.horizon;
  const double mass_sum = m.discounted_mass();
  double lo = std::min(m.min_reward(), mass_sum * m.min_reward());
  double hi = std::max(m.max_reward(), mass_sum * m.max_reward());
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }

  CategoricalTable t;
  t.horizon = H;
  t.num_states = S;
  t.num_actions = A;
  t.grid.resize(num_atoms);
  const double delta = (hi - lo) / (num_atoms - 1);
  for (int j = 0; j < num_atoms; ++j) t.grid[j] = lo + delta * j;
  t.mass.assign(static_cast<std::size_t>(H) * S * A * num_atoms, 0.0);

  const auto project = [&](double y, double w, double* out) {
    const double clamped = std::clamp(y, lo, hi);
    const double b = (clamped - lo) / delta;
    const auto l = static_cast<int>(std::floor(b));
    const auto u = std::min(l + 1, num_atoms - 1);
    if (l == u || b == static_cast<double>(l)) {
      out[l] += w;
      return;
    }
    out[l] += w * (u - b);
    out[u] += w * (b - l);
  };

  // v[s*N + j]: state return-distribution mass at the step below.
  std::vector<double> v(static_cast<std::size_t>(S) * num_atoms, 0.0);
  std::vector<double> v_next;
  for (int h = H - 1; h >= 0; --h) {
    v_next = v;
    std::fill(v.begin(), v.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        double* out =
            t.mass.data() +
            ((static_cast<std::size_t>(h) * S + s) * A + a) * num_atoms;
        const double r = m.reward_at(s, a);
        if (h + 1 == H) {
          project(r, 1.0, out);
        } else {
          const auto row = m.transition_row(s, a);
          for (int s2 = 0; s2 < S; ++s2) {
            if (row[s2] <= 0.0) continue;
            const double* below =
                v_next.data() + static_cast<std::size_t>(s2) * num_atoms;
            for (int j = 0; j < num_atoms; ++j) {
              if (below[j] <= 0.0) continue;
              project(r + m.discount * t.grid[j], row[s2] * below[j], out);
            }
          }
        }
        const double pa = p.prob_at(h, s, a);
        if (pa > 0.0) {
          double* state_mass = v.data() + static_cast<std::size_t>(s) * num_atoms;
          for (int j = 0; j < num_atoms; ++j) state_mass[j] += pa * out[j];
        }
      }
    }
  }
  return t;
}

}  // namespace creditlens
