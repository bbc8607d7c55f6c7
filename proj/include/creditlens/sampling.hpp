#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "creditlens/credit.hpp"
#include "creditlens/trajectory.hpp"

namespace creditlens {

/**
 * Stateless counter-based generator: draw k of substream i under seed s is a
 * pure function of (s, i, k). Batches are reproducible byte-for-byte for a
 * given seed regardless of sampling order, and disjoint index ranges can be
 * drawn independently and merged.
 */
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix_key(seed, stream)) {}

  double uniform();                       // [0, 1), 53-bit
  int categorical(std::span<const double> probs);  // assumes sum ~ 1

 private:
  static std::uint64_t mix_key(std::uint64_t seed, std::uint64_t stream);
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct SampleBatch {
  int horizon = 0;
  long long num_rows = 0;
  std::vector<std::int32_t> states;   // [i*H + h]
  std::vector<std::int32_t> actions;
  std::vector<double> rewards;
  std::vector<double> returns;
};

SampleBatch sample_trajectories(const Mdp& m, const TabularPolicy& policy,
                                long long n, std::uint64_t seed);

// Empirical canonical joint (frequency-weighted outcomes, same variable
// naming as the exact path).
JointTable empirical_joint(const SampleBatch& batch, double merge_tol = 1e-9);

struct PluginResult {
  CreditReport report;
  long long missing_pairs = 0;  // realized in exact support, never sampled
};

// Plug-in estimate of a measure from an existing batch: empirical frequency
// tables replace exact probabilities everywhere. Per-(h,s,a) measures mark
// never-visited reachable pairs "missing" instead of inventing zeros.
PluginResult plugin_from_batch(const Mdp& m, const TabularPolicy& policy,
                               const SampleBatch& batch, Measure measure,
                               double merge_tol = 1e-9);

// sample_trajectories followed by plugin_from_batch.
PluginResult plugin_measures(const Mdp& m, const TabularPolicy& policy,
                             Measure measure, long long n, std::uint64_t seed,
                             double merge_tol = 1e-9);

// Scalar value of a report (sum over entries for aggregates; the single
// entry for scalar measures). Used by the convergence sweep.
double report_scalar(const CreditReport& report);

struct ConvergencePoint {
  long long n = 0;
  int seed_count = 0;
  double median_abs_error = 0.0;
  double exact_value = 0.0;
};

struct ConvergenceReport {
  Measure measure = Measure::info_sparsity;
  std::vector<ConvergencePoint> points;
};

// Median absolute error across `seed_count` consecutive seeds at each sample
// size, against the exact value from full enumeration.
ConvergenceReport convergence_sweep(const Mdp& m, const TabularPolicy& policy,
                                    Measure measure,
                                    std::span<const long long> grid,
                                    std::uint64_t first_seed,
                                    int seed_count = 5,
                                    double merge_tol = 1e-9,
                                    double budget = 1e7);

}  // namespace creditlens
