#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kgcn::selftest {

struct SuiteResult {
  std::string name;
  int passed = 0;
  int failed = 0;
  double seconds = 0.0;
};

struct Report {
  std::vector<SuiteResult> suites;
  bool all_passed() const {
    for (const auto& s : suites)
      if (s.failed > 0) return false;
    return true;
  }
};

// Runs the invariant suites (gyro identities, ambient-oracle equivalence,
// curvature smoothness, aggregation theorems, gradient checks, graph
// invariants) with the given seed.
Report run_all(uint64_t seed);

}  // namespace kgcn::selftest
