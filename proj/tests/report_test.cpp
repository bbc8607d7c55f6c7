#include <doctest.h>

#include <numbers>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "creditlens/errors.hpp"
#include "creditlens/report.hpp"

using namespace creditlens;

namespace {

CreditReport sample_report() {
  CreditReport r;
  r.measure = Measure::pairwise_kl;
  r.grain = Grain::per_step_state_action;
  r.metadata.mdp_hash = "abc";
  r.metadata.policy_hash = "def";
  r.metadata.computation_path = "exact-enumeration";
  r.metadata.merge_tolerance = 1e-9;
  r.metadata.discount = 1.0;
  r.metadata.horizon = 2;
  // 2*ln2 nats is exactly 2 bits in double arithmetic, so both numeric
  // columns have stable text forms.
  r.entries.push_back({0, 1, 0, Nats{2 * std::numbers::ln2, false}, ""});
  r.entries.push_back({-1, -1, -1, Nats::infinity(), "escape"});
  return r;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("format_from_name accepts exactly csv and json") {
  CHECK(format_from_name("csv") == OutputFormat::csv);
  CHECK(format_from_name("json") == OutputFormat::json);
  CHECK_THROWS_AS(format_from_name("yaml"), SchemaError);
  try {
    format_from_name("yaml");
  } catch (const SchemaError& e) {
    CHECK(e.field() == "format");
  }
}

TEST_CASE("credit csv golden: 1-based steps, blanks and inf") {
  std::ostringstream os;
  write_credit_csv(os, sample_report());
  CHECK(os.str() ==
        "measure,h,s,a,value_nats,value_bits,flags\n"
        "pairwise_kl,1,1,0,1.3862943611198906,2,\n"
        "pairwise_kl,,,,inf,inf,escape\n");
}

TEST_CASE("credit json carries typed nulls and inf strings") {
  std::ostringstream os;
  write_credit_json(os, sample_report());
  const auto doc = nlohmann::json::parse(os.str());

  CHECK(doc["measure"] == "pairwise_kl");
  CHECK(doc["grain"] == "per_step_state_action");
  CHECK(doc["metadata"]["mdp_hash"] == "abc");
  CHECK(doc["metadata"]["computation_path"] == "exact-enumeration");
  CHECK(doc["metadata"]["horizon"] == 2);
  CHECK_FALSE(doc["metadata"].contains("sample_size"));

  REQUIRE(doc["entries"].size() == 2);
  CHECK(doc["entries"][0]["h"] == 1);
  CHECK(doc["entries"][0]["s"] == 1);
  CHECK(doc["entries"][0]["a"] == 0);
  CHECK(doc["entries"][0]["value_bits"] == doctest::Approx(2.0));
  CHECK(doc["entries"][1]["h"].is_null());
  CHECK(doc["entries"][1]["s"].is_null());
  CHECK(doc["entries"][1]["value_nats"] == "inf");
  CHECK(doc["entries"][1]["value_bits"] == "inf");
  CHECK(doc["entries"][1]["flags"] == "escape");
}

TEST_CASE("plugin metadata adds sampling fields") {
  CreditReport r = sample_report();
  r.metadata.computation_path = "plugin-mc";
  r.metadata.sample_size = 1000;
  r.metadata.missing_pairs = 3;
  std::ostringstream os;
  write_credit_json(os, r);
  const auto doc = nlohmann::json::parse(os.str());
  CHECK(doc["metadata"]["sample_size"] == 1000);
  CHECK(doc["metadata"]["missing_pairs"] == 3);
}

TEST_CASE("multi-report csv shares one header") {
  CreditReport a = sample_report();
  CreditReport b = sample_report();
  b.measure = Measure::info_sparsity;
  b.grain = Grain::scalar;
  b.entries = {{-1, -1, -1, Nats{0.0, false}, ""}};
  const std::vector<CreditReport> reports = {a, b};

  std::ostringstream os;
  write_credit_reports_csv(os, reports);
  CHECK(os.str() ==
        "measure,h,s,a,value_nats,value_bits,flags\n"
        "pairwise_kl,1,1,0,1.3862943611198906,2,\n"
        "pairwise_kl,,,,inf,inf,escape\n"
        "info_sparsity,,,,0,0,\n");
}

TEST_CASE("multi-report json nests measures under one metadata block") {
  CreditReport a = sample_report();
  CreditReport b = sample_report();
  b.measure = Measure::return_sequence_mi;
  b.grain = Grain::scalar;
  b.entries = {{-1, -1, -1, Nats{0.25, false}, ""}};
  const std::vector<CreditReport> reports = {a, b};

  std::ostringstream os;
  write_credit_reports_json(os, reports);
  const auto doc = nlohmann::json::parse(os.str());
  CHECK(doc.contains("metadata"));
  REQUIRE(doc["measures"].contains("pairwise_kl"));
  REQUIRE(doc["measures"].contains("return_sequence_mi"));
  CHECK(doc["measures"]["return_sequence_mi"]["grain"] == "scalar");
  CHECK(doc["measures"]["return_sequence_mi"]["entries"][0]["value_nats"] ==
        doctest::Approx(0.25));
}

TEST_CASE("convergence csv golden") {
  ConvergenceReport r;
  r.measure = Measure::info_sparsity;
  r.points.push_back({100, 5, 0.25, 0.5});
  r.points.push_back({1000, 5, 0.0625, 0.5});
  std::ostringstream os;
  write_convergence_csv(os, r);
  CHECK(os.str() ==
        "measure,n,seed_count,median_abs_error,exact_value\n"
        "info_sparsity,100,5,0.25,0.5\n"
        "info_sparsity,1000,5,0.0625,0.5\n");
}

TEST_CASE("convergence json round-trips the points") {
  ConvergenceReport r;
  r.measure = Measure::return_sequence_mi;
  r.points.push_back({100, 5, 0.125, 1.5});
  std::ostringstream os;
  write_convergence_json(os, r);
  const auto doc = nlohmann::json::parse(os.str());
  CHECK(doc["measure"] == "return_sequence_mi");
  REQUIRE(doc["points"].size() == 1);
  CHECK(doc["points"][0]["n"] == 100);
  CHECK(doc["points"][0]["seed_count"] == 5);
  CHECK(doc["points"][0]["median_abs_error"] == doctest::Approx(0.125));
  CHECK(doc["points"][0]["exact_value"] == doctest::Approx(1.5));
}

}  // TEST_SUITE
