#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace kerr::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  std::vector<int> only;  // empty: all twelve
};

/// Runs the acceptance criteria, printing one PASS/FAIL line per criterion
/// to `out` as each finishes.
std::vector<CriterionResult> run(const Options& options, std::ostream& out);

}  // namespace kerr::acceptance
