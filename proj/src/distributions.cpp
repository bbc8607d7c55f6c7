#include "creditlens/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "creditlens/numeric.hpp"

namespace creditlens {

DiscreteDist DiscreteDist::from_atoms(
    std::vector<std::pair<double, double>> atoms, double merge_tol) {
  std::erase_if(atoms, [](const auto& a) { return a.second <= 0.0; });
  std::sort(atoms.begin(), atoms.end());

  DiscreteDist d;
  d.merge_tolerance = merge_tol;
  std::size_t i = 0;
  while (i < atoms.size()) {
    // Chain atoms while each is within merge_tol of its predecessor; the
    // cluster collapses to its probability-weighted mean, so two surviving
    // atoms always differ by more than merge_tol.
    std::size_t j = i + 1;
    while (j < atoms.size() &&
           atoms[j].first - atoms[j - 1].first <= merge_tol) {
      ++j;
    }
    double mass = 0.0;
    double moment = 0.0;
    for (std::size_t k = i; k < j; ++k) {
      mass += atoms[k].second;
      moment += atoms[k].first * atoms[k].second;
    }
    d.values.push_back(j - i == 1 ? atoms[i].first : moment / mass);
    d.probs.push_back(mass);
    i = j;
  }
  return d;
}

double DiscreteDist::mean() const {
  std::vector<double> terms(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    terms[i] = values[i] * probs[i];
  }
  return pairwise_sum(terms);
}

namespace {

using Atoms = std::vector<std::pair<double, double>>;

[[noreturn]] void unreachable_error(const char* what, int h, int s, int a) {
  std::ostringstream os;
  os << what << ": no probability mass at step " << h << ", state " << s;
  if (a >= 0) os << ", action " << a;
  throw std::invalid_argument(os.str());
}

void check_indices(const TrajectoryTable& t, int h, int s, int a) {
  if (h < 0 || h >= t.horizon() || s < 0 || s >= t.mdp.num_states ||
      a < -1 || a >= t.mdp.num_actions) {
    std::ostringstream os;
    os << "return_distribution: indices out of range (h=" << h << ", s=" << s
       << ", a=" << a << ")";
    throw std::out_of_range(os.str());
  }
}

// Atoms of the return-to-go from (step h, state s) under the policy,
// memoized per (h, s) with intermediate merging to keep supports bounded.
class SuffixRollout {
 public:
  SuffixRollout(const Mdp& m, const TabularPolicy& p, double merge_tol)
      : m_(m), p_(p), merge_tol_(merge_tol),
        memo_(static_cast<std::size_t>(m.horizon) * m.num_states) {}

  const Atoms& from_state(int h, int s) {
    auto& slot = memo_[static_cast<std::size_t>(h) * m_.num_states + s];
    if (slot) return *slot;
    Atoms atoms;
    for (int a = 0; a < m_.num_actions; ++a) {
      const double pa = p_.prob_at(h, s, a);
      if (pa <= 0.0) continue;
      for (const auto& [z, pz] : forced_action(h, s, a)) {
        atoms.emplace_back(z, pa * pz);
      }
    }
    auto merged = DiscreteDist::from_atoms(std::move(atoms), merge_tol_);
    Atoms out(merged.size());
    for (std::size_t i = 0; i < merged.size(); ++i) {
      out[i] = {merged.values[i], merged.probs[i]};
    }
    slot = std::move(out);
    return *slot;
  }

  Atoms forced_action(int h, int s, int a) {
    const double r = m_.reward_at(s, a);
    if (h + 1 == m_.horizon) return {{r, 1.0}};
    Atoms atoms;
    const auto row = m_.transition_row(s, a);
    for (int s2 = 0; s2 < m_.num_states; ++s2) {
      if (row[s2] <= 0.0) continue;
      for (const auto& [z, pz] : from_state(h + 1, s2)) {
        atoms.emplace_back(r + m_.discount * z, row[s2] * pz);
      }
    }
    return atoms;
  }

 private:
  const Mdp& m_;
  const TabularPolicy& p_;
  double merge_tol_;
  std::vector<std::optional<Atoms>> memo_;
};

}  // namespace

ReturnDist return_distribution(const TrajectoryTable& t, int h, int s, int a,
                               double merge_tol) {
  check_indices(t, h, s, a);
  Atoms atoms;
  double mass = 0.0;
  for (std::size_t i = 0; i < t.num_rows; ++i) {
    if (t.state_at(i, h) == s && t.action_at(i, h) == a) {
      atoms.emplace_back(t.return_at(i, h), t.probs[i]);
      mass += t.probs[i];
    }
  }
  if (mass > 0.0) {
    for (auto& atom : atoms) atom.second /= mass;
    return DiscreteDist::from_atoms(std::move(atoms), merge_tol);
  }
  if (t.state_visit_prob(h, s) > 0.0) {
    SuffixRollout rollout(t.mdp, t.policy, merge_tol);
    return DiscreteDist::from_atoms(rollout.forced_action(h, s, a), merge_tol);
  }
  unreachable_error("return_distribution", h, s, a);
}

ReturnDist state_return_distribution(const TrajectoryTable& t, int h, int s,
                                     double merge_tol) {
  check_indices(t, h, s, -1);
  Atoms atoms;
  double mass = 0.0;
  for (std::size_t i = 0; i < t.num_rows; ++i) {
    if (t.state_at(i, h) == s) {
      atoms.emplace_back(t.return_at(i, h), t.probs[i]);
      mass += t.probs[i];
    }
  }
  if (mass <= 0.0) unreachable_error("state_return_distribution", h, s, -1);
  for (auto& atom : atoms) atom.second /= mass;
  return DiscreteDist::from_atoms(std::move(atoms), merge_tol);
}

double wasserstein1(const DiscreteDist& p, const DiscreteDist& q) {
  std::vector<double> points;
  points.reserve(p.size() + q.size());
  points.insert(points.end(), p.values.begin(), p.values.end());
  points.insert(points.end(), q.values.begin(), q.values.end());
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  double total = 0.0;
  double cdf_p = 0.0;
  double cdf_q = 0.0;
  std::size_t ip = 0;
  std::size_t iq = 0;
  for (std::size_t k = 0; k + 1 <= points.size(); ++k) {
    while (ip < p.size() && p.values[ip] <= points[k]) cdf_p += p.probs[ip++];
    while (iq < q.size() && q.values[iq] <= points[k]) cdf_q += q.probs[iq++];
    if (k + 1 < points.size()) {
      total += std::abs(cdf_p - cdf_q) * (points[k + 1] - points[k]);
    }
  }
  return total;
}

}  // namespace creditlens
