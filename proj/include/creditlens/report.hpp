#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "creditlens/credit.hpp"
#include "creditlens/sampling.hpp"

namespace creditlens {

enum class OutputFormat { csv, json };
OutputFormat format_from_name(std::string_view name);  // throws SchemaError

// Columns: measure, h, s, a, value_nats, value_bits, flags. h is 1-based in
// the file; inapplicable columns are empty. Infinite values print "inf".
void write_credit_csv(std::ostream& os, const CreditReport& report);
void write_credit_json(std::ostream& os, const CreditReport& report);

// Several measures in one file: CSV shares one header; JSON nests entries
// under measure names with a single metadata block.
void write_credit_reports_csv(std::ostream& os,
                              std::span<const CreditReport> reports);
void write_credit_reports_json(std::ostream& os,
                               std::span<const CreditReport> reports);

// Columns: measure, n, seed_count, median_abs_error, exact_value.
void write_convergence_csv(std::ostream& os, const ConvergenceReport& report);
void write_convergence_json(std::ostream& os, const ConvergenceReport& report);

}  // namespace creditlens
