#include "creditlens/credit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "creditlens/distributions.hpp"
#include "creditlens/numeric.hpp"
#include "creditlens/serialize.hpp"

namespace creditlens {

std::string measure_name(Measure m) {
  switch (m) {
    case Measure::pairwise_kl: return "pairwise_kl";
    case Measure::info_sparsity: return "info_sparsity";
    case Measure::stepwise_reward_entropy: return "stepwise_reward_entropy";
    case Measure::leave_one_out_cmi: return "leave_one_out_cmi";
    case Measure::history_cmi: return "history_cmi";
    case Measure::hca_ratio: return "hca_ratio";
    case Measure::directed_info_credit: return "directed_info_credit";
    case Measure::return_sequence_mi: return "return_sequence_mi";
  }
  return "unknown";
}

std::optional<Measure> measure_from_name(std::string_view name) {
  std::string canon(name);
  std::replace(canon.begin(), canon.end(), '-', '_');
  for (const Measure m :
       {Measure::pairwise_kl, Measure::info_sparsity,
        Measure::stepwise_reward_entropy, Measure::leave_one_out_cmi,
        Measure::history_cmi, Measure::hca_ratio,
        Measure::directed_info_credit, Measure::return_sequence_mi}) {
    if (canon == measure_name(m)) return m;
  }
  return std::nullopt;
}

std::string var_s(int h) { return "s" + std::to_string(h + 1); }
std::string var_a(int h) { return "a" + std::to_string(h + 1); }
std::string var_r(int h) { return "r" + std::to_string(h + 1); }
std::string var_z(int h) { return "z" + std::to_string(h + 1); }

namespace {

std::vector<std::string> step_vars(int from, int to) {  // [from, to)
  std::vector<std::string> vars;
  for (int h = from; h < to; ++h) {
    vars.push_back(var_s(h));
    vars.push_back(var_a(h));
  }
  return vars;
}

std::vector<std::string> return_vars(int from, int to) {  // [from, to)
  std::vector<std::string> vars;
  for (int h = from; h < to; ++h) vars.push_back(var_z(h));
  return vars;
}

void check_step(int h, int horizon, const char* what) {
  if (h < 0 || h >= horizon) {
    std::ostringstream os;
    os << what << ": step " << h << " outside horizon " << horizon;
    throw std::out_of_range(os.str());
  }
}

// Return-atom clustering at one (step, state), shared by the conditional and
// the mixture so KL supports align index-for-index.
struct Worksheet {
  double state_mass = 0.0;
  std::vector<double> cluster_values;       // ascending representatives
  std::vector<double> mixture;              // [cluster], sums to 1
  std::vector<double> pair_mass;            // [action], raw P(s_h, a_h)
  std::vector<std::vector<double>> cond;    // [action][cluster], sums to 1
};

}  // namespace

struct CreditAnalysis::Cache {
  std::optional<JointTable> joint;
  std::optional<Occupancy> occ;
  std::optional<std::vector<std::tuple<int, int, int>>> realized;
  std::vector<std::optional<std::vector<Worksheet>>> sheets;  // [h][s]
  std::optional<HindsightTable> hindsight;
};

CreditAnalysis::CreditAnalysis(TrajectoryTable table, double merge_tol)
    : table_(std::move(table)),
      merge_tol_(merge_tol),
      cache_(std::make_shared<Cache>()) {
  cache_->sheets.resize(table_.horizon());
}

namespace {

std::vector<Worksheet> build_worksheets(const TrajectoryTable& t, int h,
                                        double merge_tol) {
  const int S = t.mdp.num_states;
  const int A = t.mdp.num_actions;
  struct Atom {
    double z;
    double prob;
    int action;
  };
  std::vector<std::vector<Atom>> buckets(S);
  for (std::size_t i = 0; i < t.num_rows; ++i) {
    buckets[t.state_at(i, h)].push_back(
        {t.return_at(i, h), t.probs[i], t.action_at(i, h)});
  }

  std::vector<Worksheet> sheets(S);
  std::vector<double> raw;
  for (int s = 0; s < S; ++s) {
    const auto& bucket = buckets[s];
    Worksheet& ws = sheets[s];
    ws.pair_mass.assign(A, 0.0);
    if (bucket.empty()) continue;
    raw.clear();
    raw.reserve(bucket.size());
    for (const Atom& atom : bucket) raw.push_back(atom.z);
    const CodeBook book = build_codebook(raw, merge_tol);
    ws.cluster_values = book.values;
    const std::size_t C = book.values.size();
    ws.mixture.assign(C, 0.0);
    ws.cond.assign(A, {});
    for (std::size_t k = 0; k < bucket.size(); ++k) {
      const Atom& atom = bucket[k];
      ws.state_mass += atom.prob;
      ws.pair_mass[atom.action] += atom.prob;
      ws.mixture[book.codes[k]] += atom.prob;
      if (ws.cond[atom.action].empty()) ws.cond[atom.action].assign(C, 0.0);
      ws.cond[atom.action][book.codes[k]] += atom.prob;
    }
    for (double& mass : ws.mixture) mass /= ws.state_mass;
    for (int a = 0; a < A; ++a) {
      if (ws.pair_mass[a] <= 0.0) continue;
      for (double& mass : ws.cond[a]) mass /= ws.pair_mass[a];
    }
  }
  return sheets;
}

Nats cluster_kl(const std::vector<double>& p, const std::vector<double>& q) {
  std::vector<double> terms;
  terms.reserve(p.size());
  for (std::size_t c = 0; c < p.size(); ++c) {
    if (p[c] > 0.0) terms.push_back(p[c] * std::log(p[c] / q[c]));
  }
  return Nats::from_raw(pairwise_sum(terms));
}

}  // namespace

namespace {

const std::vector<Worksheet>& worksheets_for(
    const TrajectoryTable& table, double merge_tol,
    std::vector<std::optional<std::vector<Worksheet>>>& sheets, int h) {
  if (!sheets[h]) sheets[h] = build_worksheets(table, h, merge_tol);
  return *sheets[h];
}

}  // namespace

Nats CreditAnalysis::pairwise_credit(int h, int s, int a) const {
  check_step(h, table_.horizon(), "pairwise_credit");
  if (s < 0 || s >= table_.mdp.num_states || a < 0 ||
      a >= table_.mdp.num_actions) {
    throw std::out_of_range("pairwise_credit: state or action out of range");
  }
  const Worksheet& ws =
      worksheets_for(table_, merge_tol_, cache_->sheets, h)[s];
  if (ws.state_mass <= 0.0) {
    std::ostringstream os;
    os << "pairwise_credit: no probability mass at step " << h << ", state "
       << s;
    throw std::invalid_argument(os.str());
  }
  if (ws.pair_mass[a] > 0.0) return cluster_kl(ws.cond[a], ws.mixture);

  // Zero-probability action at a reachable state: force the action at step h
  // and compare against the same pooled mixture.
  const ReturnDist forced = return_distribution(table_, h, s, a, merge_tol_);
  DiscreteDist mix;
  mix.values = ws.cluster_values;
  mix.probs = ws.mixture;
  mix.merge_tolerance = merge_tol_;
  return kl_divergence(forced, mix);
}

const std::vector<std::tuple<int, int, int>>& CreditAnalysis::realized_pairs()
    const {
  if (!cache_->realized) {
    std::vector<std::tuple<int, int, int>> pairs;
    for (int h = 0; h < table_.horizon(); ++h) {
      const auto& sheets = worksheets_for(table_, merge_tol_, cache_->sheets, h);
      for (int s = 0; s < table_.mdp.num_states; ++s) {
        for (int a = 0; a < table_.mdp.num_actions; ++a) {
          if (sheets[s].pair_mass[a] > 0.0) pairs.emplace_back(h, s, a);
        }
      }
    }
    cache_->realized = std::move(pairs);
  }
  return *cache_->realized;
}

Nats CreditAnalysis::information_sparsity() const {
  if (!cache_->occ) cache_->occ = occupancy(table_);
  const Occupancy& occ = *cache_->occ;
  std::vector<double> terms;
  for (const auto& [h, s, a] : realized_pairs()) {
    const double w = occ.normalized_at(h, s, a);
    if (w <= 0.0) continue;
    terms.push_back(w * pairwise_credit(h, s, a).value);
  }
  return Nats::from_raw(pairwise_sum(terms));
}

Nats CreditAnalysis::information_sparsity_time_pooled() const {
  const int S = table_.mdp.num_states;
  const int A = table_.mdp.num_actions;
  const int H = table_.horizon();
  const double gamma = table_.mdp.discount;

  std::vector<double> power(H);
  double normalizer = 0.0;
  double acc = 1.0;
  for (int h = 0; h < H; ++h) {
    power[h] = acc;
    normalizer += acc;
    acc *= gamma;
  }

  struct Atom {
    double z;
    double weight;
    int action;
  };
  std::vector<std::vector<Atom>> buckets(S);
  for (std::size_t i = 0; i < table_.num_rows; ++i) {
    for (int h = 0; h < H; ++h) {
      const double w = power[h] * table_.probs[i];
      if (w <= 0.0) continue;
      buckets[table_.state_at(i, h)].push_back(
          {table_.return_at(i, h), w, table_.action_at(i, h)});
    }
  }

  std::vector<double> terms;
  std::vector<double> raw;
  for (int s = 0; s < S; ++s) {
    const auto& bucket = buckets[s];
    if (bucket.empty()) continue;
    raw.clear();
    for (const Atom& atom : bucket) raw.push_back(atom.z);
    const CodeBook book = build_codebook(raw, merge_tol_);
    const std::size_t C = book.values.size();
    std::vector<double> mixture(C, 0.0);
    std::vector<double> pair_weight(A, 0.0);
    std::vector<std::vector<double>> cond(A);
    double state_weight = 0.0;
    for (std::size_t k = 0; k < bucket.size(); ++k) {
      const Atom& atom = bucket[k];
      state_weight += atom.weight;
      pair_weight[atom.action] += atom.weight;
      mixture[book.codes[k]] += atom.weight;
      if (cond[atom.action].empty()) cond[atom.action].assign(C, 0.0);
      cond[atom.action][book.codes[k]] += atom.weight;
    }
    for (double& mass : mixture) mass /= state_weight;
    for (int a = 0; a < A; ++a) {
      if (pair_weight[a] <= 0.0) continue;
      for (double& mass : cond[a]) mass /= pair_weight[a];
      terms.push_back(pair_weight[a] / normalizer *
                      cluster_kl(cond[a], mixture).value);
    }
  }
  return Nats::from_raw(pairwise_sum(terms));
}

const JointTable& CreditAnalysis::canonical_joint() const {
  if (cache_->joint) return *cache_->joint;
  const int S = table_.mdp.num_states;
  const int A = table_.mdp.num_actions;
  const int H = table_.horizon();
  const std::size_t rows = table_.num_rows;

  std::vector<JointTable::Variable> vars;
  vars.reserve(static_cast<std::size_t>(4) * H);
  std::vector<double> state_values(S);
  for (int s = 0; s < S; ++s) state_values[s] = s;
  std::vector<double> action_values(A);
  for (int a = 0; a < A; ++a) action_values[a] = a;
  for (int h = 0; h < H; ++h) {
    vars.push_back({var_s(h), state_values});
    vars.push_back({var_a(h), action_values});
  }

  const std::size_t V = static_cast<std::size_t>(4) * H;
  std::vector<std::int32_t> codes(rows * V);
  for (std::size_t i = 0; i < rows; ++i) {
    for (int h = 0; h < H; ++h) {
      codes[i * V + 2 * h] = static_cast<std::int32_t>(table_.state_at(i, h));
      codes[i * V + 2 * h + 1] =
          static_cast<std::int32_t>(table_.action_at(i, h));
    }
  }
  std::vector<double> column(rows);
  for (int h = 0; h < H; ++h) {
    for (std::size_t i = 0; i < rows; ++i) column[i] = table_.reward_at(i, h);
    CodeBook book = build_codebook(column, merge_tol_);
    vars.push_back({var_r(h), std::move(book.values)});
    for (std::size_t i = 0; i < rows; ++i) {
      codes[i * V + 2 * H + h] = book.codes[i];
    }
  }
  for (int h = 0; h < H; ++h) {
    for (std::size_t i = 0; i < rows; ++i) column[i] = table_.return_at(i, h);
    CodeBook book = build_codebook(column, merge_tol_);
    vars.push_back({var_z(h), std::move(book.values)});
    for (std::size_t i = 0; i < rows; ++i) {
      codes[i * V + 3 * H + h] = book.codes[i];
    }
  }
  cache_->joint =
      JointTable(std::move(vars), std::move(codes), table_.probs);
  return *cache_->joint;
}

Nats joint_stepwise_reward_entropy(const JointTable& j, int h, int horizon) {
  check_step(h, horizon, "stepwise_reward_entropy");
  const std::vector<std::string> target{var_r(h)};
  return j.conditional_entropy(target, step_vars(0, h));
}

Nats joint_leave_one_out_cmi(const JointTable& j, int h, int horizon) {
  check_step(h, horizon, "leave_one_out_cmi");
  const std::vector<std::string> z{var_z(0)};
  const std::vector<std::string> step{var_s(h), var_a(h)};
  std::vector<std::string> others = step_vars(0, h);
  const auto tail = step_vars(h + 1, horizon);
  others.insert(others.end(), tail.begin(), tail.end());
  return j.conditional_mi(z, step, others);
}

Nats joint_history_cmi(const JointTable& j, int h, int horizon) {
  check_step(h, horizon, "history_cmi");
  const std::vector<std::string> z{var_z(0)};
  const std::vector<std::string> step{var_s(h), var_a(h)};
  return j.conditional_mi(z, step, step_vars(0, h));
}

Nats joint_return_sequence_mi(const JointTable& j, int horizon) {
  return j.mutual_information(step_vars(0, horizon),
                              return_vars(0, horizon));
}

std::pair<Nats, Nats> joint_directed_info_credit(const JointTable& j,
                                                 int horizon) {
  Nats directed;
  Nats entropy_sum;
  for (int h = 0; h < horizon; ++h) {
    const std::vector<std::string> z{var_z(h)};
    const std::vector<std::string> r{var_r(h)};
    const auto future = return_vars(h + 1, horizon);
    directed = directed + j.conditional_mi(step_vars(0, h + 1), z, future);
    entropy_sum = entropy_sum + j.conditional_entropy(r, future);
  }
  return {directed, entropy_sum};
}

Nats CreditAnalysis::stepwise_reward_entropy(int h) const {
  return joint_stepwise_reward_entropy(canonical_joint(), h, table_.horizon());
}

Nats CreditAnalysis::leave_one_out_cmi(int h) const {
  return joint_leave_one_out_cmi(canonical_joint(), h, table_.horizon());
}

Nats CreditAnalysis::history_cmi(int h) const {
  return joint_history_cmi(canonical_joint(), h, table_.horizon());
}

Nats CreditAnalysis::return_sequence_mi() const {
  return joint_return_sequence_mi(canonical_joint(), table_.horizon());
}

std::pair<Nats, Nats> CreditAnalysis::directed_info_credit() const {
  return joint_directed_info_credit(canonical_joint(), table_.horizon());
}

const HindsightTable& CreditAnalysis::hindsight_table() const {
  if (cache_->hindsight) return *cache_->hindsight;
  const JointTable& j = canonical_joint();
  const int H = table_.horizon();
  const int A = table_.mdp.num_actions;
  const int z1 = j.index_of(var_z(0));
  const auto& z_values = j.variables()[z1].values;

  std::vector<int> s_idx(H);
  std::vector<int> a_idx(H);
  for (int h = 0; h < H; ++h) {
    s_idx[h] = j.index_of(var_s(h));
    a_idx[h] = j.index_of(var_a(h));
  }
  std::map<std::tuple<int, int, int>, std::vector<double>> mass;
  for (std::size_t o = 0; o < j.num_outcomes(); ++o) {
    const int zc = j.code_at(o, z1);
    for (int h = 0; h < H; ++h) {
      const int s = j.code_at(o, s_idx[h]);
      const int a = j.code_at(o, a_idx[h]);
      auto& row = mass[{h, s, zc}];
      if (row.empty()) row.assign(A, 0.0);
      row[a] += j.prob_at(o);
    }
  }

  HindsightTable table;
  for (auto& [key, row] : mass) {
    const auto& [h, s, zc] = key;
    double total = 0.0;
    for (double w : row) total += w;
    for (double& w : row) w /= total;
    table.index[key] = table.entries.size();
    table.entries.push_back({h, s, z_values[zc], std::move(row)});
  }
  cache_->hindsight = std::move(table);
  return *cache_->hindsight;
}

Nats CreditAnalysis::hca_credit(int h) const {
  check_step(h, table_.horizon(), "hca_credit");
  const JointTable& j = canonical_joint();
  const HindsightTable& ht = hindsight_table();
  const int z1 = j.index_of(var_z(0));
  const int sv = j.index_of(var_s(h));
  const int av = j.index_of(var_a(h));

  std::vector<double> terms;
  terms.reserve(j.num_outcomes());
  for (std::size_t o = 0; o < j.num_outcomes(); ++o) {
    const int s = j.code_at(o, sv);
    const int a = j.code_at(o, av);
    const int zc = j.code_at(o, z1);
    const auto& entry = ht.entries[ht.index.at({h, s, zc})];
    const double hindsight = entry.action_probs[a];
    const double behavior = table_.policy.prob_at(h, s, a);
    terms.push_back(j.prob_at(o) * std::log(hindsight / behavior));
  }
  return Nats::from_raw(pairwise_sum(terms));
}

CreditReport CreditAnalysis::report(Measure measure,
                                    bool marginalize_time) const {
  CreditReport report;
  report.measure = measure;
  report.metadata.mdp_hash = mdp_hash(table_.mdp);
  report.metadata.policy_hash = policy_hash(table_.policy);
  report.metadata.computation_path = "exact-enumeration";
  report.metadata.merge_tolerance = merge_tol_;
  report.metadata.discount = table_.mdp.discount;
  report.metadata.horizon = table_.horizon();
  const int H = table_.horizon();

  switch (measure) {
    case Measure::pairwise_kl: {
      report.grain = Grain::per_step_state_action;
      if (marginalize_time) {
        report.grain = Grain::scalar;
        report.entries.push_back(
            {-1, -1, -1, information_sparsity_time_pooled(),
             "time_pooled_aggregate"});
        break;
      }
      for (const auto& [h, s, a] : realized_pairs()) {
        report.entries.push_back({h, s, a, pairwise_credit(h, s, a), ""});
      }
      break;
    }
    case Measure::info_sparsity: {
      report.grain = Grain::scalar;
      const Nats value = marginalize_time ? information_sparsity_time_pooled()
                                          : information_sparsity();
      report.entries.push_back(
          {-1, -1, -1, value, marginalize_time ? "time_pooled" : ""});
      break;
    }
    case Measure::stepwise_reward_entropy: {
      report.grain = Grain::per_step;
      for (int h = 0; h < H; ++h) {
        report.entries.push_back({h, -1, -1, stepwise_reward_entropy(h), ""});
      }
      break;
    }
    case Measure::leave_one_out_cmi: {
      report.grain = Grain::per_step;
      for (int h = 0; h < H; ++h) {
        report.entries.push_back({h, -1, -1, leave_one_out_cmi(h), ""});
      }
      break;
    }
    case Measure::history_cmi: {
      report.grain = Grain::per_step;
      for (int h = 0; h < H; ++h) {
        report.entries.push_back({h, -1, -1, history_cmi(h), ""});
      }
      break;
    }
    case Measure::hca_ratio: {
      report.grain = Grain::per_step;
      for (int h = 0; h < H; ++h) {
        report.entries.push_back({h, -1, -1, hca_credit(h), ""});
      }
      break;
    }
    case Measure::directed_info_credit: {
      report.grain = Grain::scalar;
      const auto [directed, entropy_sum] = directed_info_credit();
      report.entries.push_back({-1, -1, -1, directed, "directed"});
      report.entries.push_back({-1, -1, -1, entropy_sum, "entropy_sum"});
      break;
    }
    case Measure::return_sequence_mi: {
      report.grain = Grain::scalar;
      report.entries.push_back({-1, -1, -1, return_sequence_mi(), ""});
      break;
    }
  }
  return report;
}

SparsityVerdict epsilon_sparsity_classify(const Mdp& m, const PolicySet& set,
                                          double epsilon, double budget,
                                          double merge_tol) {
  if (set.members.empty()) {
    throw ValidationError(std::vector<Violation>{{"policy_set", "must be nonempty"}});
  }
  SparsityVerdict verdict;
  for (std::size_t i = 0; i < set.members.size(); ++i) {
    const CreditAnalysis analysis(
        enumerate_trajectories(m, set.members[i], budget), merge_tol);
    const Nats value = analysis.information_sparsity();
    if (verdict.argmax_index < 0 || value.value > verdict.sup.value) {
      verdict.sup = value;
      verdict.argmax_index = static_cast<int>(i);
    }
  }
  verdict.is_sparse = !verdict.sup.infinite && verdict.sup.value <= epsilon;
  return verdict;
}

}  // namespace creditlens
