#include "creditlens/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "creditlens/errors.hpp"

namespace creditlens {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string nats_field(const Nats& v) {
  return v.infinite ? "inf" : fmt17(v.value);
}

std::string bits_field(const Nats& v) {
  return v.infinite ? "inf" : fmt17(v.bits());
}

const char* grain_name(Grain g) {
  switch (g) {
    case Grain::per_step_state_action:
      return "per_step_state_action";
    case Grain::per_step:
      return "per_step";
    case Grain::scalar:
      return "scalar";
  }
  return "scalar";
}

void write_entries_csv(std::ostream& os, const CreditReport& report) {
  const std::string name = measure_name(report.measure);
  for (const auto& e : report.entries) {
    os << name << ',';
    if (e.step >= 0) os << e.step + 1;
    os << ',';
    if (e.state >= 0) os << e.state;
    os << ',';
    if (e.action >= 0) os << e.action;
    os << ',' << nats_field(e.value) << ',' << bits_field(e.value) << ','
       << e.flag << '\n';
  }
}

ordered_json metadata_json(const ReportMetadata& md) {
  ordered_json out;
  out["mdp_hash"] = md.mdp_hash;
  out["policy_hash"] = md.policy_hash;
  out["computation_path"] = md.computation_path;
  out["merge_tolerance"] = md.merge_tolerance;
  out["discount"] = md.discount;
  out["horizon"] = md.horizon;
  if (md.computation_path == "plugin-mc") {
    out["sample_size"] = md.sample_size;
    out["missing_pairs"] = md.missing_pairs;
  }
  return out;
}

ordered_json entries_json(const CreditReport& report) {
  ordered_json entries = ordered_json::array();
  for (const auto& e : report.entries) {
    ordered_json row;
    if (e.step >= 0) {
      row["h"] = e.step + 1;
    } else {
      row["h"] = nullptr;
    }
    if (e.state >= 0) {
      row["s"] = e.state;
    } else {
      row["s"] = nullptr;
    }
    if (e.action >= 0) {
      row["a"] = e.action;
    } else {
      row["a"] = nullptr;
    }
    if (e.value.infinite) {
      row["value_nats"] = "inf";
      row["value_bits"] = "inf";
    } else {
      row["value_nats"] = e.value.value;
      row["value_bits"] = e.value.bits();
    }
    row["flags"] = e.flag;
    entries.push_back(std::move(row));
  }
  return entries;
}

}  // namespace

OutputFormat format_from_name(std::string_view name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  throw SchemaError("format", "must be csv or json, got '" +
                                  std::string(name) + "'");
}

void write_credit_csv(std::ostream& os, const CreditReport& report) {
  os << "measure,h,s,a,value_nats,value_bits,flags\n";
  write_entries_csv(os, report);
}

void write_credit_json(std::ostream& os, const CreditReport& report) {
  ordered_json out;
  out["metadata"] = metadata_json(report.metadata);
  out["measure"] = measure_name(report.measure);
  out["grain"] = grain_name(report.grain);
  out["entries"] = entries_json(report);
  os << out.dump(2) << '\n';
}

void write_credit_reports_csv(std::ostream& os,
                              std::span<const CreditReport> reports) {
  os << "measure,h,s,a,value_nats,value_bits,flags\n";
  for (const auto& report : reports) write_entries_csv(os, report);
}

void write_credit_reports_json(std::ostream& os,
                               std::span<const CreditReport> reports) {
  ordered_json out;
  if (!reports.empty()) out["metadata"] = metadata_json(reports[0].metadata);
  ordered_json measures;
  for (const auto& report : reports) {
    ordered_json one;
    one["grain"] = grain_name(report.grain);
    one["entries"] = entries_json(report);
    measures[measure_name(report.measure)] = std::move(one);
  }
  out["measures"] = std::move(measures);
  os << out.dump(2) << '\n';
}

void write_convergence_csv(std::ostream& os, const ConvergenceReport& report) {
  os << "measure,n,seed_count,median_abs_error,exact_value\n";
  const std::string name = measure_name(report.measure);
  for (const auto& p : report.points) {
    os << name << ',' << p.n << ',' << p.seed_count << ','
       << fmt17(p.median_abs_error) << ',' << fmt17(p.exact_value) << '\n';
  }
}

void write_convergence_json(std::ostream& os,
                            const ConvergenceReport& report) {
  ordered_json out;
  out["measure"] = measure_name(report.measure);
  ordered_json points = ordered_json::array();
  for (const auto& p : report.points) {
    ordered_json row;
    row["n"] = p.n;
    row["seed_count"] = p.seed_count;
    row["median_abs_error"] = p.median_abs_error;
    row["exact_value"] = p.exact_value;
    points.push_back(std::move(row));
  }
  out["points"] = std::move(points);
  os << out.dump(2) << '\n';
}

}  // namespace creditlens
