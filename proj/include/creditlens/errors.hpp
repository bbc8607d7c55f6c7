#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace creditlens {

// One failed model invariant, e.g. a transition row that does not sum to 1.
struct Violation {
  std::string field;
  std::string message;
};

std::string format_violations(const std::vector<Violation>& violations);

// Input file does not match the on-disk schema. `field` names the offending
// entry, e.g. "transition[2][1]".
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// A model failed invariant validation; carries the full violation list.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Violation> violations)
      : std::runtime_error(format_violations(violations)),
        violations_(std::move(violations)) {}
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

// Exhaustive enumeration was refused: the positive-probability trajectory
// count exceeds the configured budget. Refusal, never truncation.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(double count, double budget);
  double count() const { return count_; }
  double budget() const { return budget_; }

 private:
  double count_;
  double budget_;
};

}  // namespace creditlens
