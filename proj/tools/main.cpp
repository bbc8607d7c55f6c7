#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "creditlens/credit.hpp"
#include "creditlens/io_util.hpp"
#include "creditlens/mdp.hpp"
#include "creditlens/propositions.hpp"
#include "creditlens/report.hpp"
#include "creditlens/sampling.hpp"
#include "creditlens/serialize.hpp"
#include "creditlens/trajectory.hpp"

namespace cl = creditlens;

namespace {

struct Options {
  std::string mdp_path;
  std::string gen_spec;
  std::string policy_spec;
  std::string measures = "info_sparsity";
  std::string transforms = "none";
  std::string n_grid = "100,1000,10000";
  std::optional<double> epsilon;
  double tol = 1e-9;
  double budget_flag = 1e7;
  bool budget_given = false;
  long long atoms = 201;
  std::uint64_t seed = 0;
  std::string out;
  std::string format;
  bool bits = false;
  bool marginalize_time = false;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& text, const std::string& field) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw cl::SchemaError(field, "not a number: '" + text + "'");
  }
  if (used != text.size()) {
    throw cl::SchemaError(field, "not a number: '" + text + "'");
  }
  return value;
}

long long parse_int(const std::string& text, const std::string& field) {
  std::size_t used = 0;
  long long value = 0;
  try {
    value = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw cl::SchemaError(field, "not an integer: '" + text + "'");
  }
  if (used != text.size()) {
    throw cl::SchemaError(field, "not an integer: '" + text + "'");
  }
  return value;
}

double resolve_budget(const Options& opt) {
  if (opt.budget_given) return opt.budget_flag;
  if (const char* env = std::getenv("CREDIT_LENS_BUDGET")) {
    const double value = parse_double(env, "CREDIT_LENS_BUDGET");
    if (value < 1) {
      throw cl::SchemaError("CREDIT_LENS_BUDGET", "must be >= 1");
    }
    return value;
  }
  return 1e7;
}

// A generated MDP remembers enough geometry for the negated-distance
// transform; file-loaded MDPs have no geometry and reject it.
struct Input {
  cl::Mdp mdp;
  std::optional<cl::TabularPolicy> embedded_policy;
  enum class Kind { file, chain, grid } kind = Kind::file;
  int width = 0;
  int height = 0;
  int goal_state = 0;
};

Input parse_gen(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) {
    throw cl::SchemaError("gen", "expected chain:... or grid:..., got '" +
                                     spec + "'");
  }
  const std::string head = spec.substr(0, colon);
  const auto parts = split_list(spec.substr(colon + 1));
  if (parts.empty()) {
    throw cl::SchemaError("gen", "missing size in '" + spec + "'");
  }
  std::optional<long long> horizon;
  double discount = 1.0;

  Input input;
  if (head == "chain") {
    const long long n = parse_int(parts[0], "gen.chain");
    double reward = 1.0;
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const auto eq = parts[i].find('=');
      if (eq == std::string::npos) {
        throw cl::SchemaError("gen", "expected key=value, got '" + parts[i] +
                                         "'");
      }
      const std::string key = parts[i].substr(0, eq);
      const std::string value = parts[i].substr(eq + 1);
      if (key == "h") {
        horizon = parse_int(value, "gen.h");
      } else if (key == "r") {
        reward = parse_double(value, "gen.r");
      } else if (key == "g") {
        discount = parse_double(value, "gen.g");
      } else {
        throw cl::SchemaError("gen", "unknown chain key '" + key +
                                         "' (valid: h, r, g)");
      }
    }
    if (!horizon) throw cl::SchemaError("gen", "chain requires h=<horizon>");
    input.mdp = cl::make_chain(static_cast<int>(n),
                               static_cast<int>(*horizon), reward, discount);
    input.kind = Input::Kind::chain;
    input.goal_state = static_cast<int>(n) - 1;
    return input;
  }
  if (head == "grid") {
    const auto x = parts[0].find('x');
    if (x == std::string::npos) {
      throw cl::SchemaError("gen", "expected WxH, got '" + parts[0] + "'");
    }
    const long long width = parse_int(parts[0].substr(0, x), "gen.grid");
    const long long height = parse_int(parts[0].substr(x + 1), "gen.grid");
    long long goal_x = width - 1;
    long long goal_y = height - 1;
    double slip = 0.0;
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const auto eq = parts[i].find('=');
      if (eq == std::string::npos) {
        throw cl::SchemaError("gen", "expected key=value, got '" + parts[i] +
                                         "'");
      }
      const std::string key = parts[i].substr(0, eq);
      const std::string value = parts[i].substr(eq + 1);
      if (key == "goal") {
        const auto underscore = value.find('_');
        if (underscore == std::string::npos) {
          throw cl::SchemaError("gen", "expected goal=x_y, got '" + value +
                                           "'");
        }
        goal_x = parse_int(value.substr(0, underscore), "gen.goal");
        goal_y = parse_int(value.substr(underscore + 1), "gen.goal");
      } else if (key == "slip") {
        slip = parse_double(value, "gen.slip");
      } else if (key == "h") {
        horizon = parse_int(value, "gen.h");
      } else if (key == "g") {
        discount = parse_double(value, "gen.g");
      } else {
        throw cl::SchemaError("gen", "unknown grid key '" + key +
                                         "' (valid: goal, slip, h, g)");
      }
    }
    if (!horizon) throw cl::SchemaError("gen", "grid requires h=<horizon>");
    input.mdp = cl::make_gridworld(
        static_cast<int>(width), static_cast<int>(height),
        static_cast<int>(goal_x), static_cast<int>(goal_y),
        static_cast<int>(*horizon), discount, slip);
    input.kind = Input::Kind::grid;
    input.width = static_cast<int>(width);
    input.height = static_cast<int>(height);
    input.goal_state = cl::grid_cell(static_cast<int>(width),
                                     static_cast<int>(goal_x),
                                     static_cast<int>(goal_y));
    return input;
  }
  throw cl::SchemaError("gen", "unknown generator '" + head +
                                   "' (valid: chain, grid)");
}

Input load_input(const Options& opt) {
  const bool has_mdp = !opt.mdp_path.empty();
  const bool has_gen = !opt.gen_spec.empty();
  if (has_mdp == has_gen) {
    throw cl::SchemaError("input",
                          "exactly one of --mdp and --gen is required");
  }
  if (has_gen) return parse_gen(opt.gen_spec);
  Input input;
  auto loaded = cl::load_mdp(opt.mdp_path);
  input.mdp = std::move(loaded.mdp);
  input.embedded_policy = std::move(loaded.policy);
  return input;
}

cl::TabularPolicy policy_from_spec(const std::string& spec, const Input& in) {
  if (spec == "uniform") return cl::uniform_policy(in.mdp);
  auto loaded = cl::load_mdp(spec);
  if (!loaded.policy) {
    throw cl::SchemaError("policy",
                          "file '" + spec + "' has no policy field");
  }
  auto violations = cl::validate_policy(*loaded.policy, in.mdp);
  if (!violations.empty()) throw cl::ValidationError(std::move(violations));
  return *std::move(loaded.policy);
}

// Single policy: explicit spec, else the one embedded in the model file,
// else uniform.
cl::TabularPolicy resolve_policy(const Options& opt, const Input& in,
                                 bool allow_list) {
  if (opt.policy_spec.empty()) {
    if (in.embedded_policy) return *in.embedded_policy;
    return cl::uniform_policy(in.mdp);
  }
  if (!allow_list && opt.policy_spec.find(',') != std::string::npos) {
    throw cl::SchemaError("policy", "expects a single policy, got a list");
  }
  const auto specs = split_list(opt.policy_spec);
  if (specs.empty()) throw cl::SchemaError("policy", "empty policy spec");
  return policy_from_spec(specs[0], in);
}

cl::PolicySet resolve_policy_set(const Options& opt, const Input& in) {
  cl::PolicySet set;
  if (opt.policy_spec.empty()) {
    if (in.embedded_policy) {
      set.members.push_back(*in.embedded_policy);
    } else {
      set.members.push_back(cl::uniform_policy(in.mdp));
    }
    return set;
  }
  for (const auto& spec : split_list(opt.policy_spec)) {
    set.members.push_back(policy_from_spec(spec, in));
  }
  if (set.members.empty()) {
    throw cl::SchemaError("policy", "empty policy spec");
  }
  return set;
}

cl::OutputFormat resolve_format(const Options& opt, const std::string& out) {
  if (!opt.format.empty()) return cl::format_from_name(opt.format);
  if (out.size() >= 5 && out.ends_with(".json")) {
    return cl::OutputFormat::json;
  }
  return cl::OutputFormat::csv;
}

std::string fmt6(double v) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

double edge_value(const cl::Nats& v, bool bits) {
  if (v.infinite) return std::numeric_limits<double>::infinity();
  return bits ? v.bits() : v.value;
}

void print_scalar_summaries(const std::vector<cl::CreditReport>& reports,
                            bool bits) {
  for (const auto& report : reports) {
    if (report.grain != cl::Grain::scalar) continue;
    const cl::CreditEntry* entry = nullptr;
    for (const auto& e : report.entries) {
      if (report.measure == cl::Measure::directed_info_credit &&
          e.flag != "directed") {
        continue;
      }
      entry = &e;
      break;
    }
    if (!entry) continue;
    std::cout << cl::measure_name(report.measure) << '='
              << fmt6(edge_value(entry->value, bits)) << '\n';
  }
}

int cmd_analyze(const Options& opt) {
  const Input input = load_input(opt);
  const double budget = resolve_budget(opt);

  std::vector<cl::Measure> measures;
  for (const auto& name : split_list(opt.measures)) {
    const auto measure = cl::measure_from_name(name);
    if (!measure) {
      throw cl::SchemaError(
          "measure", "unknown measure '" + name +
                         "'; valid: pairwise_kl, info_sparsity, "
                         "stepwise_reward_entropy, leave_one_out_cmi, "
                         "history_cmi, hca_ratio, directed_info_credit, "
                         "return_sequence_mi");
    }
    measures.push_back(*measure);
  }
  if (measures.empty()) {
    throw cl::SchemaError("measure", "empty measure list");
  }

  const cl::TabularPolicy policy = resolve_policy(opt, input, true);
  const cl::TrajectoryTable table =
      cl::enumerate_trajectories(input.mdp, policy, budget);
  const cl::CreditAnalysis analysis(table, opt.tol);

  std::vector<cl::CreditReport> reports;
  reports.reserve(measures.size());
  for (const auto measure : measures) {
    reports.push_back(analysis.report(measure, opt.marginalize_time));
  }

  const std::string out = opt.out.empty() ? "credit_report.csv" : opt.out;
  std::ostringstream body;
  if (resolve_format(opt, out) == cl::OutputFormat::csv) {
    if (reports.size() == 1) {
      cl::write_credit_csv(body, reports[0]);
    } else {
      cl::write_credit_reports_csv(body, reports);
    }
  } else if (reports.size() == 1) {
    cl::write_credit_json(body, reports[0]);
  } else {
    cl::write_credit_reports_json(body, reports);
  }
  cl::atomic_write_file(out, body.str());

  print_scalar_summaries(reports, opt.bits);
  if (opt.epsilon) {
    const cl::PolicySet set = resolve_policy_set(opt, input);
    const auto verdict = cl::epsilon_sparsity_classify(
        input.mdp, set, *opt.epsilon, budget, opt.tol);
    std::cout << "is_sparse=" << (verdict.is_sparse ? "true" : "false")
              << " sup=" << fmt6(edge_value(verdict.sup, opt.bits)) << '\n';
  }
  return 0;
}

int cmd_check(const Options& opt) {
  const Input input = load_input(opt);
  const cl::TabularPolicy policy = resolve_policy(opt, input, false);

  cl::PropositionOptions popts;
  popts.tolerance = opt.tol;
  popts.budget = resolve_budget(opt);
  popts.merge_tol = opt.tol;
  popts.seed = opt.seed;
  const auto verdicts = cl::check_propositions(input.mdp, policy, popts);

  const std::string out = opt.out.empty() ? "verdicts.json" : opt.out;
  std::ostringstream body;
  cl::write_verdicts_json(body, verdicts);
  cl::atomic_write_file(out, body.str());

  int gated_discrepancies = 0;
  for (const auto& v : verdicts) {
    if (v.gated && !v.holds) ++gated_discrepancies;
  }
  std::cout << "verdicts=" << verdicts.size()
            << " gated_discrepancies=" << gated_discrepancies << '\n';
  return gated_discrepancies == 0 ? 0 : 1;
}

int cmd_sweep(const Options& opt) {
  const Input input = load_input(opt);
  const double budget = resolve_budget(opt);
  const cl::TabularPolicy policy = resolve_policy(opt, input, false);

  struct Row {
    std::string name;
    cl::Nats value;
  };
  std::vector<Row> rows;
  auto tokens = split_list(opt.transforms);
  if (tokens.empty()) tokens.push_back("none");
  for (const auto& token : tokens) {
    std::optional<cl::ShapingTransform> transform;
    if (token == "none") {
      // identity
    } else if (token.starts_with("constant:")) {
      transform = cl::ConstantOffset{
          parse_double(token.substr(9), "transforms.constant")};
    } else if (token == "negdist") {
      cl::NegatedDistance shaping;
      shaping.goal = input.goal_state;
      const int S = input.mdp.num_states;
      if (input.kind == Input::Kind::grid) {
        shaping.metric = cl::manhattan_metric(input.width, input.height);
      } else if (input.kind == Input::Kind::chain) {
        shaping.metric.resize(static_cast<std::size_t>(S) * S);
        for (int s = 0; s < S; ++s) {
          for (int s2 = 0; s2 < S; ++s2) {
            shaping.metric[static_cast<std::size_t>(s) * S + s2] =
                std::abs(s - s2);
          }
        }
      } else {
        throw cl::SchemaError(
            "transforms", "negdist needs grid or chain geometry; use --gen");
      }
      transform = std::move(shaping);
    } else if (token.starts_with("potential:")) {
      const double level =
          parse_double(token.substr(10), "transforms.potential");
      transform = cl::PotentialBased{
          std::vector<double>(input.mdp.num_states, level)};
    } else {
      throw cl::SchemaError(
          "transforms",
          "unknown transform '" + token +
              "' (valid: none, constant:<c>, negdist, potential:<c>)");
    }

    const cl::Mdp shaped =
        transform ? cl::apply_shaping(input.mdp, *transform) : input.mdp;
    const cl::TrajectoryTable table =
        cl::enumerate_trajectories(shaped, policy, budget);
    const cl::CreditAnalysis analysis(table, opt.tol);
    rows.push_back({token, analysis.information_sparsity()});
  }

  std::sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) {
    const double xv = x.value.infinite
                          ? std::numeric_limits<double>::infinity()
                          : x.value.value;
    const double yv = y.value.infinite
                          ? std::numeric_limits<double>::infinity()
                          : y.value.value;
    if (xv != yv) return xv < yv;
    return x.name < y.name;
  });

  const std::string out = opt.out.empty() ? "sweep.csv" : opt.out;
  std::ostringstream body;
  if (resolve_format(opt, out) == cl::OutputFormat::csv) {
    body << "transform,value_nats,value_bits\n";
    for (const auto& row : rows) {
      char nats[40];
      char bits[40];
      if (row.value.infinite) {
        body << row.name << ",inf,inf\n";
      } else {
        std::snprintf(nats, sizeof(nats), "%.17g", row.value.value);
        std::snprintf(bits, sizeof(bits), "%.17g", row.value.bits());
        body << row.name << ',' << nats << ',' << bits << '\n';
      }
    }
  } else {
    body << "[\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      body << "  {\"transform\": \"" << rows[i].name << "\", \"value_nats\": ";
      if (rows[i].value.infinite) {
        body << "\"inf\", \"value_bits\": \"inf\"}";
      } else {
        body << rows[i].value.value << ", \"value_bits\": "
             << rows[i].value.bits() << "}";
      }
      body << (i + 1 < rows.size() ? ",\n" : "\n");
    }
    body << "]\n";
  }
  cl::atomic_write_file(out, body.str());

  for (const auto& row : rows) {
    std::cout << row.name << '=' << fmt6(edge_value(row.value, opt.bits))
              << '\n';
  }
  return 0;
}

int cmd_sample(const Options& opt) {
  const Input input = load_input(opt);
  const double budget = resolve_budget(opt);
  const cl::TabularPolicy policy = resolve_policy(opt, input, false);

  const auto names = split_list(opt.measures);
  if (names.size() != 1) {
    throw cl::SchemaError("measure", "expects exactly one measure");
  }
  const auto measure = cl::measure_from_name(names[0]);
  const bool scalar = measure && (*measure == cl::Measure::info_sparsity ||
                                  *measure == cl::Measure::return_sequence_mi ||
                                  *measure ==
                                      cl::Measure::directed_info_credit);
  if (!scalar) {
    throw cl::SchemaError("measure",
                          "unknown or non-scalar measure '" + names[0] +
                              "'; valid: info_sparsity, return_sequence_mi, "
                              "directed_info_credit");
  }

  std::vector<long long> grid;
  for (const auto& item : split_list(opt.n_grid)) {
    const long long n = parse_int(item, "n-grid");
    if (n < 1) throw cl::SchemaError("n-grid", "sizes must be >= 1");
    grid.push_back(n);
  }
  if (grid.empty()) throw cl::SchemaError("n-grid", "empty grid");

  const auto report = cl::convergence_sweep(input.mdp, policy, *measure, grid,
                                            opt.seed, 5, opt.tol, budget);

  const std::string out = opt.out.empty() ? "convergence.csv" : opt.out;
  std::ostringstream body;
  if (resolve_format(opt, out) == cl::OutputFormat::csv) {
    cl::write_convergence_csv(body, report);
  } else {
    cl::write_convergence_json(body, report);
  }
  cl::atomic_write_file(out, body.str());

  if (!report.points.empty()) {
    const double exact = report.points[0].exact_value;
    std::cout << "exact="
              << fmt6(opt.bits ? exact / std::numbers::ln2 : exact) << '\n';
  }
  return 0;
}

void add_common_flags(CLI::App* cmd, Options& opt) {
  cmd->add_option("--mdp", opt.mdp_path, "model JSON file");
  cmd->add_option("--gen", opt.gen_spec,
                  "generator spec: chain:<n>,h=<H>[,r=<v>][,g=<y>] or "
                  "grid:<W>x<H>,h=<H>[,goal=<x>_<y>][,slip=<p>][,g=<y>]");
  cmd->add_option("--policy", opt.policy_spec,
                  "policy: 'uniform' or a model file with a policy field");
  cmd->add_option("--tol", opt.tol, "merge/verdict tolerance")
      ->check(CLI::PositiveNumber);
  auto* budget = cmd->add_option("--budget", opt.budget_flag,
                                 "max trajectories to enumerate")
                     ->check(CLI::Range(1.0, 1e18));
  budget->each([&opt](const std::string&) { opt.budget_given = true; });
  cmd->add_option("--atoms", opt.atoms,
                  "categorical atom-grid size (distributional cross-checks)")
      ->check(CLI::Range(2LL, 1000000LL));
  cmd->add_option("--seed", opt.seed, "rng seed");
  cmd->add_option("--out", opt.out, "output file path");
  cmd->add_option("--format", opt.format, "csv or json");
  cmd->add_flag("--bits", opt.bits, "print summary lines in bits");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "exact information-theoretic credit assignment for tabular MDPs"};
  app.require_subcommand(1);

  Options opt;
  auto* analyze = app.add_subcommand(
      "analyze", "compute credit measures by exact enumeration");
  add_common_flags(analyze, opt);
  analyze->add_option("--measure", opt.measures,
                      "comma-separated measure list");
  analyze->add_option("--epsilon", opt.epsilon,
                      "classify epsilon-sparsity over the policy set");
  analyze->add_flag("--marginalize-time", opt.marginalize_time,
                    "pool per-step distributions by occupancy weight");

  auto* check =
      app.add_subcommand("check", "verify built-in identities; JSON verdicts");
  add_common_flags(check, opt);

  auto* sweep = app.add_subcommand(
      "sweep", "information sparsity under reward transforms");
  add_common_flags(sweep, opt);
  sweep->add_option("--transforms", opt.transforms,
                    "comma-separated: none, constant:<c>, negdist, "
                    "potential:<c>");

  auto* sample = app.add_subcommand(
      "sample", "plug-in estimator convergence against the exact value");
  add_common_flags(sample, opt);
  sample->add_option("--measure", opt.measures, "scalar measure to estimate");
  sample->add_option("--n-grid", opt.n_grid,
                     "comma-separated sample sizes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(opt);
    if (check->parsed()) return cmd_check(opt);
    if (sweep->parsed()) return cmd_sweep(opt);
    if (sample->parsed()) return cmd_sample(opt);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const cl::BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
