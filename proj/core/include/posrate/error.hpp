#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace posrate {

enum class ErrorKind {
  InvalidArgument,
  InvalidParams,
  Parse,
  CycleDetected,
  RedundantCover,
  NotComparable,
  TruncatedUpSet,
  GfDiverges,
  GfUnavailable,
  InvalidDistribution,
  NotATree,
  NonPositivePdf,
  TooManyChildren,
  InconsistentUpf,
  TailBoundTooLoose,
  RateBoundMissing,
  LeafRateNotOne,
  LeafEncountered,
  WeakInequalityViolation,
  Exhausted,
  NotConstantRate,
  NotFreeSemigroup,
  EpsilonTooLarge,
  TruncationTooSevere,
  Overflow,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Input-class errors map to CLI exit status 2; everything else is a failed
// check or an internal limit.
bool is_input_error(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& what);

}  // namespace posrate
