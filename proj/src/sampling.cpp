#include "creditlens/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "creditlens/numeric.hpp"
#include "creditlens/serialize.hpp"

namespace creditlens {

std::uint64_t CounterRng::mix_key(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed) ^ mix64(~stream));
}

double CounterRng::uniform() {
  const std::uint64_t bits =
      mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  ++counter_;
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

int CounterRng::categorical(std::span<const double> probs) {
  const double u = uniform();
  double cum = 0.0;
  int last_live = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_live = static_cast<int>(i);
    cum += probs[i];
    if (u < cum) return last_live;
  }
  return last_live;  // float tail: cum summed slightly below 1
}

SampleBatch sample_trajectories(const Mdp& m, const TabularPolicy& policy,
                                long long n, std::uint64_t seed) {
  {
    auto violations = validate_mdp(m);
    auto more = validate_policy(policy, m);
    violations.insert(violations.end(), more.begin(), more.end());
    if (n < 1) violations.push_back({"n", "must be >= 1"});
    if (!violations.empty()) throw ValidationError(std::move(violations));
  }
  const int H = m.horizon;
  SampleBatch batch;
  batch.horizon = H;
  batch.num_rows = n;
  batch.states.resize(static_cast<std::size_t>(n) * H);
  batch.actions.resize(static_cast<std::size_t>(n) * H);
  batch.rewards.resize(static_cast<std::size_t>(n) * H);
  batch.returns.resize(static_cast<std::size_t>(n) * H);

  for (long long i = 0; i < n; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    const std::size_t base = static_cast<std::size_t>(i) * H;
    int s = rng.categorical(m.initial_dist);
    for (int h = 0; h < H; ++h) {
      const int a = rng.categorical(policy.row(h, s));
      batch.states[base + h] = static_cast<std::int32_t>(s);
      batch.actions[base + h] = static_cast<std::int32_t>(a);
      batch.rewards[base + h] = m.reward_at(s, a);
      if (h + 1 < H) s = rng.categorical(m.transition_row(s, a));
    }
    batch.returns[base + H - 1] = batch.rewards[base + H - 1];
    for (int h = H - 2; h >= 0; --h) {
      batch.returns[base + h] =
          batch.rewards[base + h] + m.discount * batch.returns[base + h + 1];
    }
  }
  return batch;
}

JointTable empirical_joint(const SampleBatch& batch, double merge_tol) {
  const int H = batch.horizon;
  const std::size_t rows = static_cast<std::size_t>(batch.num_rows);
  std::int32_t max_state = 0;
  std::int32_t max_action = 0;
  for (std::size_t k = 0; k < rows * H; ++k) {
    max_state = std::max(max_state, batch.states[k]);
    max_action = std::max(max_action, batch.actions[k]);
  }

  std::vector<JointTable::Variable> vars;
  std::vector<double> state_values(max_state + 1);
  for (std::int32_t s = 0; s <= max_state; ++s) state_values[s] = s;
  std::vector<double> action_values(max_action + 1);
  for (std::int32_t a = 0; a <= max_action; ++a) action_values[a] = a;
  for (int h = 0; h < H; ++h) {
    vars.push_back({var_s(h), state_values});
    vars.push_back({var_a(h), action_values});
  }

  const std::size_t V = static_cast<std::size_t>(4) * H;
  std::vector<std::int32_t> codes(rows * V);
  for (std::size_t i = 0; i < rows; ++i) {
    for (int h = 0; h < H; ++h) {
      codes[i * V + 2 * h] = batch.states[i * H + h];
      codes[i * V + 2 * h + 1] = batch.actions[i * H + h];
    }
  }
  std::vector<double> column(rows);
  for (int h = 0; h < H; ++h) {
    for (std::size_t i = 0; i < rows; ++i) column[i] = batch.rewards[i * H + h];
    CodeBook book = build_codebook(column, merge_tol);
    vars.push_back({var_r(h), std::move(book.values)});
    for (std::size_t i = 0; i < rows; ++i) {
      codes[i * V + 2 * H + h] = book.codes[i];
    }
  }
  for (int h = 0; h < H; ++h) {
    for (std::size_t i = 0; i < rows; ++i) column[i] = batch.returns[i * H + h];
    CodeBook book = build_codebook(column, merge_tol);
    vars.push_back({var_z(h), std::move(book.values)});
    for (std::size_t i = 0; i < rows; ++i) {
      codes[i * V + 3 * H + h] = book.codes[i];
    }
  }
  const std::vector<double> probs(rows, 1.0 / static_cast<double>(rows));
  return JointTable(std::move(vars), std::move(codes), probs);
}

namespace {

// Reachable (h,s,a) support from the transition/policy zero pattern, without
// enumerating trajectories.
std::vector<char> support_pairs(const Mdp& m, const TabularPolicy& policy) {
  const int S = m.num_states;
  const int A = m.num_actions;
  const int H = m.horizon;
  std::vector<char> reach(S, 0);
  for (int s = 0; s < S; ++s) reach[s] = m.initial_dist[s] > 0.0 ? 1 : 0;
  std::vector<char> support(static_cast<std::size_t>(H) * S * A, 0);
  for (int h = 0; h < H; ++h) {
    std::vector<char> next(S, 0);
    for (int s = 0; s < S; ++s) {
      if (!reach[s]) continue;
      for (int a = 0; a < A; ++a) {
        if (policy.prob_at(h, s, a) <= 0.0) continue;
        support[(static_cast<std::size_t>(h) * S + s) * A + a] = 1;
        const auto row = m.transition_row(s, a);
        for (int s2 = 0; s2 < S; ++s2) {
          if (row[s2] > 0.0) next[s2] = 1;
        }
      }
    }
    reach = std::move(next);
  }
  return support;
}

struct EmpiricalSheets {
  // Per (h,s): shared clusters with per-action and mixture masses.
  struct Sheet {
    double state_freq = 0.0;
    std::vector<double> cluster_values;
    std::vector<double> mixture;
    std::vector<double> pair_freq;
    std::vector<std::vector<double>> cond;
  };
  std::vector<Sheet> sheets;  // [h*S + s]
  int num_states = 0;
  int num_actions = 0;
};

EmpiricalSheets build_empirical_sheets(const SampleBatch& batch, int S, int A,
                                       double merge_tol) {
  const int H = batch.horizon;
  const auto rows = static_cast<std::size_t>(batch.num_rows);
  const double w = 1.0 / static_cast<double>(batch.num_rows);

  EmpiricalSheets out;
  out.num_states = S;
  out.num_actions = A;
  out.sheets.resize(static_cast<std::size_t>(H) * S);

  struct Atom {
    double z;
    int action;
  };
  std::vector<std::vector<Atom>> buckets(S);
  std::vector<double> raw;
  for (int h = 0; h < H; ++h) {
    for (auto& b : buckets) b.clear();
    for (std::size_t i = 0; i < rows; ++i) {
      buckets[batch.states[i * H + h]].push_back(
          {batch.returns[i * H + h], batch.actions[i * H + h]});
    }
    for (int s = 0; s < S; ++s) {
      const auto& bucket = buckets[s];
      auto& sheet = out.sheets[static_cast<std::size_t>(h) * S + s];
      sheet.pair_freq.assign(A, 0.0);
      if (bucket.empty()) continue;
      raw.clear();
      for (const Atom& atom : bucket) raw.push_back(atom.z);
      const CodeBook book = build_codebook(raw, merge_tol);
      sheet.cluster_values = book.values;
      const std::size_t C = book.values.size();
      sheet.mixture.assign(C, 0.0);
      sheet.cond.assign(A, {});
      for (std::size_t k = 0; k < bucket.size(); ++k) {
        const Atom& atom = bucket[k];
        sheet.state_freq += w;
        sheet.pair_freq[atom.action] += w;
        sheet.mixture[book.codes[k]] += w;
        if (sheet.cond[atom.action].empty()) {
          sheet.cond[atom.action].assign(C, 0.0);
        }
        sheet.cond[atom.action][book.codes[k]] += w;
      }
      for (double& mass : sheet.mixture) mass /= sheet.state_freq;
      for (int a = 0; a < A; ++a) {
        if (sheet.pair_freq[a] <= 0.0) continue;
        for (double& mass : sheet.cond[a]) mass /= sheet.pair_freq[a];
      }
    }
  }
  return out;
}

Nats sheet_kl(const EmpiricalSheets::Sheet& sheet, int a) {
  std::vector<double> terms;
  const auto& p = sheet.cond[a];
  for (std::size_t c = 0; c < p.size(); ++c) {
    if (p[c] > 0.0) terms.push_back(p[c] * std::log(p[c] / sheet.mixture[c]));
  }
  return Nats::from_raw(pairwise_sum(terms));
}

}  // namespace

PluginResult plugin_from_batch(const Mdp& m, const TabularPolicy& policy,
                               const SampleBatch& batch, Measure measure,
                               double merge_tol) {
  const int S = m.num_states;
  const int A = m.num_actions;
  const int H = batch.horizon;

  PluginResult result;
  CreditReport& report = result.report;
  report.measure = measure;
  report.metadata.mdp_hash = mdp_hash(m);
  report.metadata.policy_hash = policy_hash(policy);
  report.metadata.computation_path = "plugin-mc";
  report.metadata.merge_tolerance = merge_tol;
  report.metadata.discount = m.discount;
  report.metadata.horizon = H;
  report.metadata.sample_size = batch.num_rows;

  const bool needs_sheets =
      measure == Measure::pairwise_kl || measure == Measure::info_sparsity;
  EmpiricalSheets sheets;
  if (needs_sheets) sheets = build_empirical_sheets(batch, S, A, merge_tol);

  // Reachable-but-unsampled pairs, counted for every measure's metadata.
  {
    const auto support = support_pairs(m, policy);
    std::vector<char> visited(support.size(), 0);
    for (std::size_t i = 0; i < static_cast<std::size_t>(batch.num_rows);
         ++i) {
      for (int h = 0; h < H; ++h) {
        visited[(static_cast<std::size_t>(h) * S + batch.states[i * H + h]) *
                    A +
                batch.actions[i * H + h]] = 1;
      }
    }
    for (std::size_t k = 0; k < support.size(); ++k) {
      if (support[k] && !visited[k]) ++result.missing_pairs;
    }
    report.metadata.missing_pairs = result.missing_pairs;
    if (measure == Measure::pairwise_kl) {
      for (std::size_t k = 0; k < support.size(); ++k) {
        if (!support[k] || visited[k]) continue;
        const int h = static_cast<int>(k / (static_cast<std::size_t>(S) * A));
        const int s = static_cast<int>(k / A % S);
        const int a = static_cast<int>(k % A);
        report.entries.push_back({h, s, a, Nats{}, "missing"});
      }
    }
  }

  switch (measure) {
    case Measure::pairwise_kl: {
      report.grain = Grain::per_step_state_action;
      for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s) {
          const auto& sheet = sheets.sheets[static_cast<std::size_t>(h) * S + s];
          for (int a = 0; a < A; ++a) {
            if (sheet.pair_freq[a] <= 0.0) continue;
            report.entries.push_back({h, s, a, sheet_kl(sheet, a), ""});
          }
        }
      }
      std::sort(report.entries.begin(), report.entries.end(),
                [](const CreditEntry& x, const CreditEntry& y) {
                  return std::tie(x.step, x.state, x.action) <
                         std::tie(y.step, y.state, y.action);
                });
      break;
    }
    case Measure::info_sparsity: {
      report.grain = Grain::scalar;
      std::vector<double> power(H);
      double normalizer = 0.0;
      double acc = 1.0;
      for (int h = 0; h < H; ++h) {
        power[h] = acc;
        normalizer += acc;
        acc *= m.discount;
      }
      std::vector<double> terms;
      for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s) {
          const auto& sheet = sheets.sheets[static_cast<std::size_t>(h) * S + s];
          for (int a = 0; a < A; ++a) {
            if (sheet.pair_freq[a] <= 0.0) continue;
            const double w = power[h] * sheet.pair_freq[a] / normalizer;
            if (w <= 0.0) continue;
            terms.push_back(w * sheet_kl(sheet, a).value);
          }
        }
      }
      report.entries.push_back(
          {-1, -1, -1, Nats::from_raw(pairwise_sum(terms)),
           result.missing_pairs > 0 ? "missing_pairs" : ""});
      break;
    }
    case Measure::stepwise_reward_entropy:
    case Measure::leave_one_out_cmi:
    case Measure::history_cmi: {
      report.grain = Grain::per_step;
      const JointTable joint = empirical_joint(batch, merge_tol);
      for (int h = 0; h < H; ++h) {
        Nats value;
        if (measure == Measure::stepwise_reward_entropy) {
          value = joint_stepwise_reward_entropy(joint, h, H);
        } else if (measure == Measure::leave_one_out_cmi) {
          value = joint_leave_one_out_cmi(joint, h, H);
        } else {
          value = joint_history_cmi(joint, h, H);
        }
        report.entries.push_back({h, -1, -1, value, ""});
      }
      break;
    }
    case Measure::hca_ratio: {
      report.grain = Grain::per_step;
      const JointTable joint = empirical_joint(batch, merge_tol);
      const int z1 = joint.index_of(var_z(0));
      for (int h = 0; h < H; ++h) {
        const int sv = joint.index_of(var_s(h));
        const int av = joint.index_of(var_a(h));
        // Empirical hindsight and empirical behavior conditionals.
        std::map<std::tuple<int, int>, std::vector<double>> hindsight;
        std::map<int, std::vector<double>> behavior;
        for (std::size_t o = 0; o < joint.num_outcomes(); ++o) {
          const int s = joint.code_at(o, sv);
          const int a = joint.code_at(o, av);
          auto& hrow = hindsight[{s, joint.code_at(o, z1)}];
          if (hrow.empty()) hrow.assign(A, 0.0);
          hrow[a] += joint.prob_at(o);
          auto& brow = behavior[s];
          if (brow.empty()) brow.assign(A, 0.0);
          brow[a] += joint.prob_at(o);
        }
        for (auto& [key, row] : hindsight) {
          double total = 0.0;
          for (double v : row) total += v;
          for (double& v : row) v /= total;
        }
        for (auto& [key, row] : behavior) {
          double total = 0.0;
          for (double v : row) total += v;
          for (double& v : row) v /= total;
        }
        std::vector<double> terms;
        terms.reserve(joint.num_outcomes());
        for (std::size_t o = 0; o < joint.num_outcomes(); ++o) {
          const int s = joint.code_at(o, sv);
          const int a = joint.code_at(o, av);
          const double h_prob = hindsight.at({s, joint.code_at(o, z1)})[a];
          const double b_prob = behavior.at(s)[a];
          terms.push_back(joint.prob_at(o) * std::log(h_prob / b_prob));
        }
        report.entries.push_back(
            {h, -1, -1, Nats::from_raw(pairwise_sum(terms)), ""});
      }
      break;
    }
    case Measure::directed_info_credit: {
      report.grain = Grain::scalar;
      const JointTable joint = empirical_joint(batch, merge_tol);
      const auto [directed, entropy_sum] = joint_directed_info_credit(joint, H);
      report.entries.push_back({-1, -1, -1, directed, "directed"});
      report.entries.push_back({-1, -1, -1, entropy_sum, "entropy_sum"});
      break;
    }
    case Measure::return_sequence_mi: {
      report.grain = Grain::scalar;
      const JointTable joint = empirical_joint(batch, merge_tol);
      report.entries.push_back(
          {-1, -1, -1, joint_return_sequence_mi(joint, H), ""});
      break;
    }
  }
  return result;
}

PluginResult plugin_measures(const Mdp& m, const TabularPolicy& policy,
                             Measure measure, long long n, std::uint64_t seed,
                             double merge_tol) {
  return plugin_from_batch(m, policy, sample_trajectories(m, policy, n, seed),
                           measure, merge_tol);
}

double report_scalar(const CreditReport& report) {
  if (report.measure == Measure::directed_info_credit) {
    for (const auto& e : report.entries) {
      if (e.flag == "directed") {
        return e.value.infinite
                   ? std::numeric_limits<double>::infinity()
                   : e.value.value;
      }
    }
  }
  double total = 0.0;
  for (const auto& e : report.entries) {
    if (e.flag == "missing") continue;
    if (e.value.infinite) return std::numeric_limits<double>::infinity();
    total += e.value.value;
  }
  return total;
}

ConvergenceReport convergence_sweep(const Mdp& m, const TabularPolicy& policy,
                                    Measure measure,
                                    std::span<const long long> grid,
                                    std::uint64_t first_seed, int seed_count,
                                    double merge_tol, double budget) {
  if (seed_count < 1) {
    throw ValidationError(std::vector<Violation>{{"seed_count", "must be >= 1"}});
  }
  const TrajectoryTable table = enumerate_trajectories(m, policy, budget);
  const CreditAnalysis analysis(table, merge_tol);
  const double exact = report_scalar(analysis.report(measure));

  ConvergenceReport out;
  out.measure = measure;
  for (const long long n : grid) {
    std::vector<double> errors;
    errors.reserve(seed_count);
    for (int k = 0; k < seed_count; ++k) {
      const auto estimate = report_scalar(
          plugin_measures(m, policy, measure, n, first_seed + k, merge_tol)
              .report);
      errors.push_back(std::abs(estimate - exact));
    }
    std::sort(errors.begin(), errors.end());
    const std::size_t mid = errors.size() / 2;
    const double median = errors.size() % 2 == 1
                              ? errors[mid]
                              : 0.5 * (errors[mid - 1] + errors[mid]);
    out.points.push_back({n, seed_count, median, exact});
  }
  return out;
}

}  // namespace creditlens
