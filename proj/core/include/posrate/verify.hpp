#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace posrate {

struct VerifyOptions {
  unsigned threads = 1;
  std::uint64_t seed = 20240601;
  std::size_t replicates = 100000;
};

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;
  bool passed = true;
};

/// core | trees | ladder | finder | all
std::vector<std::string> suite_names();

/// Throws InvalidArgument for an unknown suite. A check that throws is
/// recorded as failed with the error text.
SuiteReport run_suite(std::string_view name, const VerifyOptions& options = {});

}  // namespace posrate
