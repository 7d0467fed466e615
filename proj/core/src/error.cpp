#include "posrate/error.hpp"

namespace posrate {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::RedundantCover: return "RedundantCover";
    case ErrorKind::NotComparable: return "NotComparable";
    case ErrorKind::TruncatedUpSet: return "TruncatedUpSet";
    case ErrorKind::GfDiverges: return "GfDiverges";
    case ErrorKind::GfUnavailable: return "GfUnavailable";
    case ErrorKind::InvalidDistribution: return "InvalidDistribution";
    case ErrorKind::NotATree: return "NotATree";
    case ErrorKind::NonPositivePdf: return "NonPositivePdf";
    case ErrorKind::TooManyChildren: return "TooManyChildren";
    case ErrorKind::InconsistentUpf: return "InconsistentUpf";
    case ErrorKind::TailBoundTooLoose: return "TailBoundTooLoose";
    case ErrorKind::RateBoundMissing: return "RateBoundMissing";
    case ErrorKind::LeafRateNotOne: return "LeafRateNotOne";
    case ErrorKind::LeafEncountered: return "LeafEncountered";
    case ErrorKind::WeakInequalityViolation: return "WeakInequalityViolation";
    case ErrorKind::Exhausted: return "Exhausted";
    case ErrorKind::NotConstantRate: return "NotConstantRate";
    case ErrorKind::NotFreeSemigroup: return "NotFreeSemigroup";
    case ErrorKind::EpsilonTooLarge: return "EpsilonTooLarge";
    case ErrorKind::TruncationTooSevere: return "TruncationTooSevere";
    case ErrorKind::Overflow: return "Overflow";
  }
  return "Unknown";
}

bool is_input_error(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::InvalidParams:
    case ErrorKind::Parse:
    case ErrorKind::CycleDetected:
    case ErrorKind::RedundantCover:
    case ErrorKind::InvalidDistribution:
    case ErrorKind::NotATree:
    case ErrorKind::RateBoundMissing:
    case ErrorKind::LeafRateNotOne:
    case ErrorKind::NotFreeSemigroup:
    case ErrorKind::EpsilonTooLarge:
    case ErrorKind::GfDiverges:
    case ErrorKind::GfUnavailable:
      return true;
    default:
      return false;
  }
}

void raise(ErrorKind kind, const std::string& what) {
  throw Error(kind, std::string(to_string(kind)) + ": " + what);
}

}  // namespace posrate
