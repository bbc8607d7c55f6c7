#include "creditlens/trajectory.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "creditlens/numeric.hpp"

namespace creditlens {

double TrajectoryTable::total_probability() const {
  return pairwise_sum(probs);
}

double TrajectoryTable::state_visit_prob(int h, int s) const {
  double total = 0.0;
  for (std::size_t i = 0; i < num_rows; ++i) {
    if (state_at(i, h) == s) total += probs[i];
  }
  return total;
}

double TrajectoryTable::pair_visit_prob(int h, int s, int a) const {
  double total = 0.0;
  for (std::size_t i = 0; i < num_rows; ++i) {
    if (state_at(i, h) == s && action_at(i, h) == a) total += probs[i];
  }
  return total;
}

double count_positive_trajectories(const Mdp& m, const TabularPolicy& p) {
  const int S = m.num_states;
  const int A = m.num_actions;
  const int H = m.horizon;

  std::vector<double> reach(S, 0.0);
  for (int s = 0; s < S; ++s) reach[s] = m.initial_dist[s] > 0.0 ? 1.0 : 0.0;

  for (int h = 0; h + 1 < H; ++h) {
    std::vector<double> next(S, 0.0);
    for (int s = 0; s < S; ++s) {
      if (reach[s] == 0.0) continue;
      for (int a = 0; a < A; ++a) {
        if (p.prob_at(h, s, a) <= 0.0) continue;
        const auto row = m.transition_row(s, a);
        for (int s2 = 0; s2 < S; ++s2) {
          if (row[s2] > 0.0) next[s2] += reach[s];
        }
      }
    }
    reach = std::move(next);
  }

  double total = 0.0;
  for (int s = 0; s < S; ++s) {
    if (reach[s] == 0.0) continue;
    int live = 0;
    for (int a = 0; a < A; ++a) {
      if (p.prob_at(H - 1, s, a) > 0.0) ++live;
    }
    total += reach[s] * live;
  }
  return total;
}

namespace {

struct Enumerator {
  const Mdp& m;
  const TabularPolicy& p;
  TrajectoryTable& out;
  std::vector<std::int32_t> states;
  std::vector<std::int32_t> actions;
  std::vector<double> rewards;

  void emit(double prob) {
    const int H = m.horizon;
    out.probs.push_back(prob);
    out.states.insert(out.states.end(), states.begin(), states.end());
    out.actions.insert(out.actions.end(), actions.begin(), actions.end());
    out.rewards.insert(out.rewards.end(), rewards.begin(), rewards.end());
    std::vector<double> z(H);
    z[H - 1] = rewards[H - 1];
    for (int h = H - 2; h >= 0; --h) {
      z[h] = rewards[h] + m.discount * z[h + 1];
    }
    out.returns.insert(out.returns.end(), z.begin(), z.end());
    ++out.num_rows;
  }

  void visit(int h, int s, double prob) {
    states[h] = static_cast<std::int32_t>(s);
    for (int a = 0; a < m.num_actions; ++a) {
      const double pa = p.prob_at(h, s, a);
      if (pa <= 0.0) continue;
      actions[h] = static_cast<std::int32_t>(a);
      rewards[h] = m.reward_at(s, a);
      if (h + 1 == m.horizon) {
        emit(prob * pa);
        continue;
      }
      const auto row = m.transition_row(s, a);
      for (int s2 = 0; s2 < m.num_states; ++s2) {
        if (row[s2] > 0.0) visit(h + 1, s2, prob * pa * row[s2]);
      }
    }
  }
};

}  // namespace

TrajectoryTable enumerate_trajectories(const Mdp& m, const TabularPolicy& p,
                                       double budget) {
  {
    auto violations = validate_mdp(m);
    auto more = validate_policy(p, m);
    violations.insert(violations.end(), more.begin(), more.end());
    if (!violations.empty()) throw ValidationError(std::move(violations));
  }
  const double count = count_positive_trajectories(m, p);
  if (count > budget) throw BudgetExceeded(count, budget);

  TrajectoryTable t;
  t.mdp = m;
  t.policy = p;
  const auto rows = static_cast<std::size_t>(count);
  const auto H = static_cast<std::size_t>(m.horizon);
  t.probs.reserve(rows);
  t.states.reserve(rows * H);
  t.actions.reserve(rows * H);
  t.rewards.reserve(rows * H);
  t.returns.reserve(rows * H);

  Enumerator e{m, p, t,
               std::vector<std::int32_t>(H), std::vector<std::int32_t>(H),
               std::vector<double>(H)};
  for (int s = 0; s < m.num_states; ++s) {
    if (m.initial_dist[s] > 0.0) e.visit(0, s, m.initial_dist[s]);
  }
  return t;
}

Occupancy occupancy(const TrajectoryTable& t, std::optional<double> gamma) {
  const double g = gamma.value_or(t.mdp.discount);
  const int H = t.horizon();
  const int S = t.mdp.num_states;
  const int A = t.mdp.num_actions;

  Occupancy occ;
  occ.horizon = H;
  occ.num_states = S;
  occ.num_actions = A;
  occ.weights.assign(static_cast<std::size_t>(H) * S * A, 0.0);

  std::vector<double> power(H);
  double acc = 1.0;
  for (int h = 0; h < H; ++h) {
    power[h] = acc;
    occ.normalizer += acc;
    acc *= g;
  }
  for (std::size_t i = 0; i < t.num_rows; ++i) {
    for (int h = 0; h < H; ++h) {
      const auto idx =
          (static_cast<std::size_t>(h) * S + t.state_at(i, h)) * A +
          t.action_at(i, h);
      occ.weights[idx] += power[h] * t.probs[i];
    }
  }
  return occ;
}

namespace {

void put17(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const TrajectoryTable& t) {
  const int H = t.horizon();
  out << "prob";
  for (int h = 1; h <= H; ++h) out << ",s" << h << ",a" << h;
  for (int h = 1; h <= H; ++h) out << ",r" << h;
  for (int h = 1; h <= H; ++h) out << ",z" << h;
  out << '\n';
  for (std::size_t i = 0; i < t.num_rows; ++i) {
    put17(out, t.probs[i]);
    for (int h = 0; h < H; ++h) {
      out << ',' << t.state_at(i, h) << ',' << t.action_at(i, h);
    }
    for (int h = 0; h < H; ++h) {
      out << ',';
      put17(out, t.reward_at(i, h));
    }
    for (int h = 0; h < H; ++h) {
      out << ',';
      put17(out, t.return_at(i, h));
    }
    out << '\n';
  }
}

}  // namespace creditlens
