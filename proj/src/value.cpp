#include "creditlens/value.hpp"

namespace creditlens {

ValueTables value_functions(const Mdp& m, const TabularPolicy& p) {
  const int S = m.num_states;
  const int A = m.num_actions;
  const int H = m.horizon;

  ValueTables t;
  t.horizon = H;
  t.num_states = S;
  t.num_actions = A;
  t.v.assign(static_cast<std::size_t>(H) * S, 0.0);
  t.q.assign(static_cast<std::size_t>(H) * S * A, 0.0);

  std::vector<double> v_next(S, 0.0);
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      double v = 0.0;
      for (int a = 0; a < A; ++a) {
        double expected = 0.0;
        if (h + 1 < H) {
          const auto row = m.transition_row(s, a);
          for (int s2 = 0; s2 < S; ++s2) expected += row[s2] * v_next[s2];
        }
        const double q = m.reward_at(s, a) + m.discount * expected;
        t.q[(static_cast<std::size_t>(h) * S + s) * A + a] = q;
        v += p.prob_at(h, s, a) * q;
      }
      t.v[static_cast<std::size_t>(h) * S + s] = v;
    }
    for (int s = 0; s < S; ++s) v_next[s] = t.v_at(h, s);
  }
  return t;
}

}  // namespace creditlens
