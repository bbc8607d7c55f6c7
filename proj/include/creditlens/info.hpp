#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "creditlens/distributions.hpp"

namespace creditlens {

/**
 * Information value in nats. Finite values are nonnegative; tiny negative
 * residue from float cancellation (>= -1e-12) is clamped to zero, anything
 * more negative indicates a broken probability table and throws. +infinity is
 * a distinguished value (support escape in KL).
 */
struct Nats {
  double value = 0.0;
  bool infinite = false;

  static Nats from_raw(double raw);
  static Nats infinity() { return Nats{0.0, true}; }
  double bits() const;
  bool operator==(const Nats&) const = default;
};

Nats operator+(Nats a, Nats b);

// Entropy of a discrete distribution, -sum p ln p, pairwise-summed.
Nats entropy(const DiscreteDist& p);

// KL(p || q) with supports aligned by tolerance: each p-atom is matched to
// the nearest q-atom within max(p,q).merge_tolerance; an unmatched p-atom is
// a support escape and the result is +infinity.
Nats kl_divergence(const DiscreteDist& p, const DiscreteDist& q);

enum class CausalLag {
  strict,     // condition Y_t on X^{t-1}
  same_step,  // condition Y_t on X^{t}
};

struct DirectedInfo {
  Nats value;        // sum_t I(X^t; Y_t | Y^{t-1})
  Nats lagged;       // H(Y^T) - causal_entropy(strict lag)
  double dual_gap;   // |value - (H(Y^T) - causal_entropy(same_step))|
};

/**
 * Exact joint distribution over named finite-support variables. Outcomes are
 * code tuples (one code per variable); codes index into per-variable value
 * tables, so arithmetic on outcomes (derived variables) is possible.
 * Zero-mass outcomes are omitted; total mass must be 1 within 1e-9.
 *
 * All queries take variable-name sets and are computed by grouping outcome
 * mass over the projected codes; identities between queries therefore hold to
 * summation precision. Entropy results are cached; the cache is mutex-guarded
 * so const queries are safe to issue concurrently.
 */
class JointTable {
 public:
  struct Variable {
    std::string name;
    std::vector<double> values;  // value per code
  };

  JointTable() = default;
  JointTable(std::vector<Variable> vars, std::vector<std::int32_t> codes,
             std::vector<double> probs);
  JointTable(const JointTable& other)
      : vars_(other.vars_), codes_(other.codes_), probs_(other.probs_) {}
  JointTable& operator=(const JointTable& other) {
    if (this != &other) {
      vars_ = other.vars_;
      codes_ = other.codes_;
      probs_ = other.probs_;
      std::lock_guard<std::mutex> lock(*cache_mutex_);
      entropy_cache_.clear();
    }
    return *this;
  }
  JointTable(JointTable&&) = default;
  JointTable& operator=(JointTable&&) = default;

  const std::vector<Variable>& variables() const { return vars_; }
  std::size_t num_outcomes() const { return probs_.size(); }
  int num_variables() const { return static_cast<int>(vars_.size()); }
  int index_of(std::string_view name) const;  // throws on unknown name
  std::int32_t code_at(std::size_t outcome, int var) const {
    return codes_[outcome * vars_.size() + var];
  }
  double value_at(std::size_t outcome, int var) const {
    return vars_[var].values[code_at(outcome, var)];
  }
  double prob_at(std::size_t outcome) const { return probs_[outcome]; }

  Nats entropy(std::span<const std::string> vars) const;
  Nats conditional_entropy(std::span<const std::string> target,
                           std::span<const std::string> given) const;
  // Rejects overlapping x/y (and z) sets.
  Nats mutual_information(std::span<const std::string> xs,
                          std::span<const std::string> ys) const;
  Nats conditional_mi(std::span<const std::string> xs,
                      std::span<const std::string> ys,
                      std::span<const std::string> zs) const;

  // Sequences are per-step groups of variables; both sequences must have the
  // same length T >= 1.
  Nats causal_entropy(std::span<const std::vector<std::string>> y_seq,
                      std::span<const std::vector<std::string>> x_seq,
                      CausalLag lag = CausalLag::strict) const;
  DirectedInfo directed_information(
      std::span<const std::vector<std::string>> x_seq,
      std::span<const std::vector<std::string>> y_seq) const;

  // New table with one extra variable computed from existing ones; codes for
  // the derived values are merged within merge_tol.
  JointTable with_derived(
      const std::string& name, std::span<const std::string> deps,
      const std::function<double(std::span<const double>)>& fn,
      double merge_tol) const;

  // Marginal distribution of one variable (by its numeric values).
  DiscreteDist marginal_dist(std::string_view name) const;

  // Joint entropy over variable indices without Nats wrapping (raw double,
  // possibly a hair negative before clamping). Exposed for invariant tests.
  double raw_entropy(std::span<const int> var_indices) const;

 private:
  std::vector<Variable> vars_;
  std::vector<std::int32_t> codes_;  // [outcome * V + var]
  std::vector<double> probs_;
  mutable std::map<std::vector<int>, double> entropy_cache_;
  // Behind unique_ptr so the table stays movable; a copy gets a fresh cache.
  mutable std::unique_ptr<std::mutex> cache_mutex_ =
      std::make_unique<std::mutex>();

  std::vector<int> resolve(std::span<const std::string> names) const;
  double cached_entropy(std::vector<int> idxs) const;
};

// Sorts values, chain-merges within tol, returns the code table and per-item
// codes. Shared by JointTable construction and derived variables.
struct CodeBook {
  std::vector<double> values;          // representative per code
  std::vector<std::int32_t> codes;     // one per input item
};
CodeBook build_codebook(std::span<const double> raw, double merge_tol);

}  // namespace creditlens
