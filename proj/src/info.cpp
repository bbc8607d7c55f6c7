#include "creditlens/info.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "creditlens/numeric.hpp"

namespace creditlens {

namespace {

constexpr double kNegativeSlack = 1e-12;
constexpr double kMassTol = 1e-9;

double neg_p_log_p(double p) { return p > 0.0 ? -p * std::log(p) : 0.0; }

}  // namespace

Nats Nats::from_raw(double raw) {
  if (raw < -kNegativeSlack) {
    std::ostringstream os;
    os.precision(17);
    os << "information value " << raw
       << " is negative beyond float slack; the probability table is broken";
    throw std::logic_error(os.str());
  }
  return Nats{std::max(raw, 0.0), false};
}

double Nats::bits() const {
  if (infinite) return std::numeric_limits<double>::infinity();
  return value / std::numbers::ln2;
}

Nats operator+(Nats a, Nats b) {
  if (a.infinite || b.infinite) return Nats::infinity();
  return Nats{a.value + b.value, false};
}

Nats entropy(const DiscreteDist& p) {
  std::vector<double> terms(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) terms[i] = neg_p_log_p(p.probs[i]);
  return Nats::from_raw(pairwise_sum(terms));
}

Nats kl_divergence(const DiscreteDist& p, const DiscreteDist& q) {
  const double tol = std::max(p.merge_tolerance, q.merge_tolerance);
  std::vector<double> terms;
  terms.reserve(p.size());
  std::ptrdiff_t last_match = -1;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double v = p.values[i];
    const auto it = std::lower_bound(q.values.begin(), q.values.end(), v);
    std::ptrdiff_t j = -1;
    double best = tol;
    if (it != q.values.end() && std::abs(*it - v) <= best) {
      best = std::abs(*it - v);
      j = it - q.values.begin();
    }
    if (it != q.values.begin() && std::abs(*(it - 1) - v) <= best) {
      j = (it - 1) - q.values.begin();
    }
    if (j < 0) return Nats::infinity();
    if (j == last_match) {
      throw std::invalid_argument(
          "kl_divergence: two atoms of p align to one atom of q; the "
          "distributions were merged with incompatible clusterings");
    }
    last_match = j;
    terms.push_back(p.probs[i] * std::log(p.probs[i] / q.probs[j]));
  }
  return Nats::from_raw(pairwise_sum(terms));
}

JointTable::JointTable(std::vector<Variable> vars,
                       std::vector<std::int32_t> codes,
                       std::vector<double> probs)
    : vars_(std::move(vars)) {
  const std::size_t V = vars_.size();
  for (std::size_t i = 0; i < V; ++i) {
    for (std::size_t k = i + 1; k < V; ++k) {
      if (vars_[i].name == vars_[k].name) {
        throw std::invalid_argument("joint table: duplicate variable name " +
                                    vars_[i].name);
      }
    }
  }
  if (codes.size() != V * probs.size()) {
    throw std::invalid_argument(
        "joint table: need one code per (outcome, variable)");
  }
  double total = 0.0;
  codes_.reserve(codes.size());
  probs_.reserve(probs.size());
  for (std::size_t o = 0; o < probs.size(); ++o) {
    const double p = probs[o];
    if (!std::isfinite(p) || p < 0.0) {
      throw std::invalid_argument(
          "joint table: outcome probabilities must be finite and >= 0");
    }
    total += p;
    if (p == 0.0) continue;
    for (std::size_t v = 0; v < V; ++v) {
      const std::int32_t code = codes[o * V + v];
      if (code < 0 ||
          static_cast<std::size_t>(code) >= vars_[v].values.size()) {
        throw std::invalid_argument("joint table: code out of range for " +
                                    vars_[v].name);
      }
      codes_.push_back(code);
    }
    probs_.push_back(p);
  }
  if (std::abs(total - 1.0) > kMassTol) {
    throw std::invalid_argument("joint table: outcome mass must sum to 1");
  }
}

int JointTable::index_of(std::string_view name) const {
  for (std::size_t v = 0; v < vars_.size(); ++v) {
    if (vars_[v].name == name) return static_cast<int>(v);
  }
  throw std::out_of_range("joint table: unknown variable " +
                          std::string(name));
}

std::vector<int> JointTable::resolve(
    std::span<const std::string> names) const {
  std::vector<int> idxs;
  idxs.reserve(names.size());
  for (const auto& n : names) idxs.push_back(index_of(n));
  std::sort(idxs.begin(), idxs.end());
  idxs.erase(std::unique(idxs.begin(), idxs.end()), idxs.end());
  return idxs;
}

namespace {

struct KeyHash {
  std::size_t operator()(const std::vector<std::int32_t>& key) const {
    return static_cast<std::size_t>(
        fnv1a(key.data(), key.size() * sizeof(std::int32_t)));
  }
};

}  // namespace

double JointTable::raw_entropy(std::span<const int> var_indices) const {
  if (var_indices.empty()) return 0.0;
  std::unordered_map<std::vector<std::int32_t>, double, KeyHash> groups;
  groups.reserve(probs_.size());
  std::vector<std::int32_t> key(var_indices.size());
  for (std::size_t o = 0; o < probs_.size(); ++o) {
    for (std::size_t k = 0; k < var_indices.size(); ++k) {
      key[k] = code_at(o, var_indices[k]);
    }
    groups[key] += probs_[o];
  }
  std::vector<double> masses;
  masses.reserve(groups.size());
  for (const auto& [_, mass] : groups) masses.push_back(mass);
  // Sort so the summation order does not depend on hash iteration order.
  std::sort(masses.begin(), masses.end());
  for (double& m : masses) m = neg_p_log_p(m);
  return pairwise_sum(masses);
}

double JointTable::cached_entropy(std::vector<int> idxs) const {
  {
    std::lock_guard<std::mutex> lock(*cache_mutex_);
    const auto it = entropy_cache_.find(idxs);
    if (it != entropy_cache_.end()) return it->second;
  }
  const double value = raw_entropy(idxs);
  std::lock_guard<std::mutex> lock(*cache_mutex_);
  entropy_cache_.emplace(std::move(idxs), value);
  return value;
}

Nats JointTable::entropy(std::span<const std::string> vars) const {
  return Nats::from_raw(cached_entropy(resolve(vars)));
}

Nats JointTable::conditional_entropy(std::span<const std::string> target,
                                     std::span<const std::string> given) const {
  auto t = resolve(target);
  const auto g = resolve(given);
  if (g.empty()) return Nats::from_raw(cached_entropy(std::move(t)));
  std::vector<int> both = t;
  both.insert(both.end(), g.begin(), g.end());
  std::sort(both.begin(), both.end());
  both.erase(std::unique(both.begin(), both.end()), both.end());
  return Nats::from_raw(cached_entropy(std::move(both)) - cached_entropy(g));
}

namespace {

void reject_overlap(const std::vector<int>& a, const std::vector<int>& b,
                    const char* what) {
  std::vector<int> inter;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(inter));
  if (!inter.empty()) {
    throw std::invalid_argument(std::string(what) +
                                ": variable sets overlap");
  }
}

std::vector<int> sorted_union(const std::vector<int>& a,
                              const std::vector<int>& b) {
  std::vector<int> u;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(u));
  return u;
}

}  // namespace

Nats JointTable::mutual_information(std::span<const std::string> xs,
                                    std::span<const std::string> ys) const {
  const auto x = resolve(xs);
  const auto y = resolve(ys);
  reject_overlap(x, y, "mutual_information");
  return Nats::from_raw(cached_entropy(x) + cached_entropy(y) -
                        cached_entropy(sorted_union(x, y)));
}

Nats JointTable::conditional_mi(std::span<const std::string> xs,
                                std::span<const std::string> ys,
                                std::span<const std::string> zs) const {
  const auto x = resolve(xs);
  const auto y = resolve(ys);
  const auto z = resolve(zs);
  reject_overlap(x, y, "conditional_mi");
  reject_overlap(x, z, "conditional_mi");
  reject_overlap(y, z, "conditional_mi");
  if (z.empty()) {
    return Nats::from_raw(cached_entropy(x) + cached_entropy(y) -
                          cached_entropy(sorted_union(x, y)));
  }
  const double hxz = cached_entropy(sorted_union(x, z));
  const double hyz = cached_entropy(sorted_union(y, z));
  const double hxyz = cached_entropy(sorted_union(sorted_union(x, y), z));
  const double hz = cached_entropy(z);
  return Nats::from_raw(hxz + hyz - hxyz - hz);
}

Nats JointTable::causal_entropy(std::span<const std::vector<std::string>> y_seq,
                                std::span<const std::vector<std::string>> x_seq,
                                CausalLag lag) const {
  if (y_seq.size() != x_seq.size() || y_seq.empty()) {
    throw std::invalid_argument(
        "causal_entropy: sequences must have equal nonzero length");
  }
  double total = 0.0;
  std::vector<std::string> given;
  for (std::size_t t = 0; t < y_seq.size(); ++t) {
    if (lag == CausalLag::same_step) {
      given.insert(given.end(), x_seq[t].begin(), x_seq[t].end());
    }
    total += conditional_entropy(y_seq[t], given).value;
    if (lag == CausalLag::strict) {
      given.insert(given.end(), x_seq[t].begin(), x_seq[t].end());
    }
    given.insert(given.end(), y_seq[t].begin(), y_seq[t].end());
  }
  return Nats::from_raw(total);
}

DirectedInfo JointTable::directed_information(
    std::span<const std::vector<std::string>> x_seq,
    std::span<const std::vector<std::string>> y_seq) const {
  if (y_seq.size() != x_seq.size() || y_seq.empty()) {
    throw std::invalid_argument(
        "directed_information: sequences must have equal nonzero length");
  }
  double total = 0.0;
  std::vector<std::string> xs;
  std::vector<std::string> past_y;
  for (std::size_t t = 0; t < y_seq.size(); ++t) {
    xs.insert(xs.end(), x_seq[t].begin(), x_seq[t].end());
    total += conditional_mi(xs, y_seq[t], past_y).value;
    past_y.insert(past_y.end(), y_seq[t].begin(), y_seq[t].end());
  }

  DirectedInfo info;
  info.value = Nats::from_raw(total);
  const double h_y = cached_entropy(resolve(past_y));
  info.lagged = Nats::from_raw(
      h_y - causal_entropy(y_seq, x_seq, CausalLag::strict).value);
  const double dual =
      h_y - causal_entropy(y_seq, x_seq, CausalLag::same_step).value;
  info.dual_gap = std::abs(total - dual);
  return info;
}

JointTable JointTable::with_derived(
    const std::string& name, std::span<const std::string> deps,
    const std::function<double(std::span<const double>)>& fn,
    double merge_tol) const {
  for (const auto& v : vars_) {
    if (v.name == name) {
      throw std::invalid_argument("with_derived: variable already exists: " +
                                  name);
    }
  }
  std::vector<int> dep_idx;
  dep_idx.reserve(deps.size());
  for (const auto& d : deps) dep_idx.push_back(index_of(d));

  std::vector<double> raw(probs_.size());
  std::vector<double> args(deps.size());
  for (std::size_t o = 0; o < probs_.size(); ++o) {
    for (std::size_t k = 0; k < dep_idx.size(); ++k) {
      args[k] = value_at(o, dep_idx[k]);
    }
    raw[o] = fn(args);
    if (!std::isfinite(raw[o])) {
      throw std::invalid_argument(
          "with_derived: function produced a non-finite value");
    }
  }
  const CodeBook book = build_codebook(raw, merge_tol);

  const std::size_t V = vars_.size();
  std::vector<Variable> vars = vars_;
  vars.push_back(Variable{name, book.values});
  std::vector<std::int32_t> codes;
  codes.reserve(probs_.size() * (V + 1));
  for (std::size_t o = 0; o < probs_.size(); ++o) {
    for (std::size_t v = 0; v < V; ++v) codes.push_back(code_at(o, v));
    codes.push_back(book.codes[o]);
  }
  return JointTable(std::move(vars), std::move(codes), probs_);
}

DiscreteDist JointTable::marginal_dist(std::string_view name) const {
  const int v = index_of(name);
  std::vector<double> mass(vars_[v].values.size(), 0.0);
  for (std::size_t o = 0; o < probs_.size(); ++o) {
    mass[code_at(o, v)] += probs_[o];
  }
  std::vector<std::pair<double, double>> atoms;
  for (std::size_t c = 0; c < mass.size(); ++c) {
    if (mass[c] > 0.0) atoms.emplace_back(vars_[v].values[c], mass[c]);
  }
  DiscreteDist d = DiscreteDist::from_atoms(std::move(atoms), 0.0);
  d.merge_tolerance = 1e-9;
  return d;
}

CodeBook build_codebook(std::span<const double> raw, double merge_tol) {
  const std::size_t n = raw.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return raw[a] < raw[b];
  });

  CodeBook book;
  book.codes.assign(n, 0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && raw[order[j]] - raw[order[j - 1]] <= merge_tol) ++j;
    const double first = raw[order[i]];
    const double last = raw[order[j - 1]];
    double rep = first;
    if (last != first) {
      double sum = 0.0;
      for (std::size_t k = i; k < j; ++k) sum += raw[order[k]];
      rep = sum / static_cast<double>(j - i);
    }
    const auto code = static_cast<std::int32_t>(book.values.size());
    book.values.push_back(rep);
    for (std::size_t k = i; k < j; ++k) book.codes[order[k]] = code;
    i = j;
  }
  return book;
}

}  // namespace creditlens
