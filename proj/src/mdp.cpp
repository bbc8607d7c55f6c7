#include "creditlens/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "creditlens/numeric.hpp"

namespace creditlens {

namespace {

constexpr double kRowSumTol = 1e-12;

std::string field_at(const char* base, int i) {
  std::ostringstream os;
  os << base << '[' << i << ']';
  return os.str();
}

std::string field_sa(const char* base, int s, int a) {
  std::ostringstream os;
  os << base << "[s=" << s << ",a=" << a << ']';
  return os.str();
}

}  // namespace

double Mdp::discounted_mass() const {
  double mass = 0.0;
  double power = 1.0;
  for (int h = 0; h < horizon; ++h) {
    mass += power;
    power *= discount;
  }
  return mass;
}

double Mdp::min_reward() const {
  return reward.empty() ? 0.0 : *std::min_element(reward.begin(), reward.end());
}

double Mdp::max_reward() const {
  return reward.empty() ? 0.0 : *std::max_element(reward.begin(), reward.end());
}

bool Mdp::action_independent_transitions(double tol) const {
  for (int s = 0; s < num_states; ++s) {
    const auto base = transition_row(s, 0);
    for (int a = 1; a < num_actions; ++a) {
      const auto row = transition_row(s, a);
      for (int s2 = 0; s2 < num_states; ++s2) {
        if (std::abs(row[s2] - base[s2]) > tol) return false;
      }
    }
  }
  return true;
}

bool Mdp::action_independent_rewards(double tol) const {
  for (int s = 0; s < num_states; ++s) {
    for (int a = 1; a < num_actions; ++a) {
      if (std::abs(reward_at(s, a) - reward_at(s, 0)) > tol) return false;
    }
  }
  return true;
}

bool Mdp::deterministic_start() const {
  for (double p : initial_dist) {
    if (p > 1.0 - 1e-12) return true;
  }
  return false;
}

std::vector<Violation> validate_mdp(const Mdp& m) {
  std::vector<Violation> out;
  if (m.num_states < 1) out.push_back({"num_states", "must be >= 1"});
  if (m.num_actions < 1) out.push_back({"num_actions", "must be >= 1"});
  if (m.horizon < 1) out.push_back({"horizon", "must be >= 1"});
  if (!(m.discount >= 0.0 && m.discount <= 1.0)) {
    out.push_back({"discount", "must lie in [0, 1]"});
  }
  if (m.num_states < 1 || m.num_actions < 1) return out;

  const auto S = static_cast<std::size_t>(m.num_states);
  const auto A = static_cast<std::size_t>(m.num_actions);

  if (m.initial_dist.size() != S) {
    out.push_back({"initial_dist", "needs one entry per state"});
  } else {
    double total = 0.0;
    for (int s = 0; s < m.num_states; ++s) {
      const double p = m.initial_dist[s];
      if (!std::isfinite(p) || p < 0.0) {
        out.push_back({field_at("initial_dist", s),
                       "probabilities must be finite and nonnegative"});
      } else {
        total += p;
      }
    }
    if (std::abs(total - 1.0) > kRowSumTol) {
      out.push_back({"initial_dist", "must sum to 1"});
    }
  }

  if (m.reward.size() != S * A) {
    out.push_back({"reward", "needs one entry per (state, action)"});
  } else {
    for (int s = 0; s < m.num_states; ++s) {
      for (int a = 0; a < m.num_actions; ++a) {
        if (!std::isfinite(m.reward_at(s, a))) {
          out.push_back({field_sa("reward", s, a), "must be finite"});
        }
      }
    }
  }

  if (m.transition.size() != S * A * S) {
    out.push_back({"transition", "needs one row per (state, action)"});
  } else {
    for (int s = 0; s < m.num_states; ++s) {
      for (int a = 0; a < m.num_actions; ++a) {
        const auto row = m.transition_row(s, a);
        double total = 0.0;
        bool bad_entry = false;
        for (double p : row) {
          if (!std::isfinite(p) || p < 0.0) bad_entry = true;
          total += p;
        }
        if (bad_entry) {
          out.push_back({field_sa("transition", s, a),
                         "probabilities must be finite and nonnegative"});
        } else if (std::abs(total - 1.0) > kRowSumTol) {
          out.push_back({field_sa("transition", s, a), "row must sum to 1"});
        }
      }
    }
  }

  if (!m.labels.empty() && m.labels.size() != S) {
    out.push_back({"labels", "must be empty or give one label per state"});
  }
  return out;
}

std::vector<Violation> validate_policy(const TabularPolicy& p, const Mdp& m) {
  std::vector<Violation> out;
  if (p.num_states != m.num_states || p.num_actions != m.num_actions) {
    out.push_back({"policy", "state/action dimensions must match the MDP"});
  }
  if (p.horizon != m.horizon) {
    out.push_back({"policy.horizon", "must match the MDP horizon"});
  }
  const auto expected = static_cast<std::size_t>(p.horizon) * p.num_states *
                        p.num_actions;
  if (p.horizon < 1 || p.num_states < 1 || p.num_actions < 1 ||
      p.probs.size() != expected) {
    out.push_back({"policy.probs", "needs one row per (step, state)"});
    return out;
  }
  for (int h = 0; h < p.horizon; ++h) {
    for (int s = 0; s < p.num_states; ++s) {
      const auto row = p.row(h, s);
      double total = 0.0;
      bool bad_entry = false;
      for (double prob : row) {
        if (!std::isfinite(prob) || prob < 0.0) bad_entry = true;
        total += prob;
      }
      std::ostringstream field;
      field << "policy[h=" << h << ",s=" << s << ']';
      if (bad_entry) {
        out.push_back(
            {field.str(), "probabilities must be finite and nonnegative"});
      } else if (std::abs(total - 1.0) > kRowSumTol) {
        out.push_back({field.str(), "row must sum to 1"});
      }
    }
  }
  return out;
}

Mdp make_chain(int n, int horizon, double goal_reward, double discount) {
  std::vector<Violation> bad;
  if (n < 2) bad.push_back({"chain.n", "needs at least 2 states"});
  if (horizon < 1) bad.push_back({"chain.horizon", "must be >= 1"});
  if (!(discount >= 0.0 && discount <= 1.0)) {
    bad.push_back({"chain.discount", "must lie in [0, 1]"});
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));

  Mdp m;
  m.num_states = n;
  m.num_actions = 2;
  m.horizon = horizon;
  m.discount = discount;
  m.initial_dist.assign(n, 0.0);
  m.initial_dist[0] = 1.0;
  m.reward.assign(static_cast<std::size_t>(n) * 2, 0.0);
  m.transition.assign(static_cast<std::size_t>(n) * 2 * n, 0.0);
  for (int s = 0; s < n; ++s) {
    const int left = std::max(0, s - 1);
    const int right = std::min(n - 1, s + 1);
    m.transition[(static_cast<std::size_t>(s) * 2 + 0) * n + left] = 1.0;
    m.transition[(static_cast<std::size_t>(s) * 2 + 1) * n + right] = 1.0;
  }
  m.reward[static_cast<std::size_t>(n - 2) * 2 + 1] = goal_reward;
  return m;
}

int grid_cell(int width, int x, int y) { return y * width + x; }

Mdp make_gridworld(int width, int height, int goal_x, int goal_y, int horizon,
                   double discount, double slip) {
  std::vector<Violation> bad;
  if (width < 1 || height < 1 || width * height < 2) {
    bad.push_back({"grid.size", "needs at least 2 cells"});
  }
  if (goal_x < 0 || goal_x >= width || goal_y < 0 || goal_y >= height) {
    bad.push_back({"grid.goal", "must be a cell inside the grid"});
  }
  if (horizon < 1) bad.push_back({"grid.horizon", "must be >= 1"});
  if (!(discount >= 0.0 && discount <= 1.0)) {
    bad.push_back({"grid.discount", "must lie in [0, 1]"});
  }
  if (!(slip >= 0.0 && slip <= 1.0)) {
    bad.push_back({"grid.slip", "must lie in [0, 1]"});
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));

  const int S = width * height;
  const int A = 4;
  const int goal = grid_cell(width, goal_x, goal_y);

  Mdp m;
  m.num_states = S;
  m.num_actions = A;
  m.horizon = horizon;
  m.discount = discount;
  m.initial_dist.assign(S, 1.0 / (S - 1));
  m.initial_dist[goal] = 0.0;
  m.reward.assign(static_cast<std::size_t>(S) * A, 0.0);
  m.transition.assign(static_cast<std::size_t>(S) * A * S, 0.0);

  const auto step = [&](int s, int dir) {
    const int x = s % width;
    const int y = s / width;
    switch (dir) {
      case 0: return grid_cell(width, x, std::max(0, y - 1));          // up
      case 1: return grid_cell(width, x, std::min(height - 1, y + 1)); // down
      case 2: return grid_cell(width, std::max(0, x - 1), y);          // left
      default: return grid_cell(width, std::min(width - 1, x + 1), y); // right
    }
  };

  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      double* row =
          m.transition.data() + (static_cast<std::size_t>(s) * A + a) * S;
      row[step(s, a)] += 1.0 - slip;
      for (int dir = 0; dir < 4; ++dir) row[step(s, dir)] += slip / 4.0;
      m.reward[static_cast<std::size_t>(s) * A + a] = row[goal];
    }
  }
  return m;
}

std::vector<double> manhattan_metric(int width, int height) {
  const int S = width * height;
  std::vector<double> metric(static_cast<std::size_t>(S) * S, 0.0);
  for (int s = 0; s < S; ++s) {
    for (int s2 = 0; s2 < S; ++s2) {
      const int dx = std::abs(s % width - s2 % width);
      const int dy = std::abs(s / width - s2 / width);
      metric[static_cast<std::size_t>(s) * S + s2] = dx + dy;
    }
  }
  return metric;
}

TabularPolicy uniform_policy(const Mdp& m) {
  TabularPolicy p;
  p.num_states = m.num_states;
  p.num_actions = m.num_actions;
  p.horizon = m.horizon;
  p.probs.assign(static_cast<std::size_t>(m.horizon) * m.num_states *
                     m.num_actions,
                 1.0 / m.num_actions);
  return p;
}

Mdp apply_shaping(const Mdp& m, const ShapingTransform& transform) {
  Mdp out = m;
  const int S = m.num_states;
  const int A = m.num_actions;

  if (const auto* c = std::get_if<ConstantOffset>(&transform)) {
    if (!std::isfinite(c->offset)) {
      throw ValidationError(std::vector<Violation>{{"shaping.offset", "must be finite"}});
    }
    for (double& r : out.reward) r += c->offset;
    return out;
  }

  if (const auto* d = std::get_if<NegatedDistance>(&transform)) {
    std::vector<Violation> bad;
    if (d->goal < 0 || d->goal >= S) {
      bad.push_back({"shaping.goal", "must be a valid state index"});
    }
    if (d->metric.size() != static_cast<std::size_t>(S) * S) {
      bad.push_back({"shaping.metric", "needs one entry per state pair"});
    } else {
      for (double v : d->metric) {
        if (!std::isfinite(v) || v < 0.0) {
          bad.push_back({"shaping.metric", "entries must be finite and >= 0"});
          break;
        }
      }
    }
    if (!bad.empty()) throw ValidationError(std::move(bad));
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const auto row = m.transition_row(s, a);
        double expected = 0.0;
        for (int s2 = 0; s2 < S; ++s2) {
          expected += row[s2] * d->metric[static_cast<std::size_t>(s2) * S +
                                          d->goal];
        }
        out.reward[static_cast<std::size_t>(s) * A + a] -= expected;
      }
    }
    return out;
  }

  const auto& p = std::get<PotentialBased>(transform);
  if (p.phi.size() != static_cast<std::size_t>(S)) {
    throw ValidationError(std::vector<Violation>{{"shaping.phi", "needs one potential per state"}});
  }
  for (double v : p.phi) {
    if (!std::isfinite(v)) {
      throw ValidationError(std::vector<Violation>{{"shaping.phi", "entries must be finite"}});
    }
  }
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const auto row = m.transition_row(s, a);
      double expected = 0.0;
      for (int s2 = 0; s2 < S; ++s2) expected += row[s2] * p.phi[s2];
      out.reward[static_cast<std::size_t>(s) * A + a] +=
          m.discount * expected - p.phi[s];
    }
  }
  return out;
}

}  // namespace creditlens
