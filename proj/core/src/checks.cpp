#include "ovf/checks.hpp"

#include <algorithm>

namespace ovf {

bool all_pass(const std::vector<CheckRecord>& records) {
  return std::all_of(records.begin(), records.end(),
                     [](const CheckRecord& r) { return r.pass(); });
}

double normalized_residual(double abs_diff, double scale, double floor) {
  return abs_diff / std::max(scale, floor);
}

}  // namespace ovf
