#include "creditlens/errors.hpp"

#include <sstream>

namespace creditlens {

std::string format_violations(const std::vector<Violation>& violations) {
  std::ostringstream os;
  os << "validation failed (" << violations.size() << " problem"
     << (violations.size() == 1 ? "" : "s") << "):";
  for (const auto& v : violations) {
    os << "\n  " << v.field << ": " << v.message;
  }
  return os.str();
}

BudgetExceeded::BudgetExceeded(double count, double budget)
    : std::runtime_error([&] {
        std::ostringstream os;
        os.precision(17);
        os << "trajectory enumeration refused: " << count
           << " positive-probability trajectories exceed the budget of "
           << budget
           << "; raise the budget or use the categorical DP / sampling paths";
        return os.str();
      }()),
      count_(count),
      budget_(budget) {}

}  // namespace creditlens
