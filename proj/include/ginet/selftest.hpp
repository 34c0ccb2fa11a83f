#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace ginet::selftest {

struct Check {
  std::string name;
  bool ok = false;
  std::string detail;
};

struct Options {
  // Name of a check whose computed side is deliberately corrupted, so that
  // the failure path can be exercised. Empty for a normal run.
  std::string broken;
  std::uint64_t seed = 7;
};

std::vector<std::string> check_names();

// Runs every check, printing "PASS name detail" / "FAIL name detail" lines
// to `out` when given.
std::vector<Check> run(const Options& opts, std::ostream* out = nullptr);

}  // namespace ginet::selftest
