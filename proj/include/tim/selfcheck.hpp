#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tim {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Runs the geometry invariants, finite-difference derivative checks,
/// objective value oracles and a small end-to-end admission consistency
/// check. Deterministic per seed.
std::vector<CheckResult> run_selfcheck(std::uint64_t seed);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace tim
