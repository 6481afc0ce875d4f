#ifndef HYSHADOW_ERROR_HPP
#define HYSHADOW_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hyshadow {

enum class ErrorKind {
  InvalidPoint,
  ProjectionUndefined,
  IncompleteDetection,
  DegeneratePair,
  Instability,
  NoConvergence,
  PairNotFound,
  EmptyContinuum,
  Resolution,
  InvalidBand,
  EmptyBand,
  SearchFailed,
  WindowTooSmall,
  NoN0,
  Precondition,
  Parse,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidPoint: return "invalid-point";
    case ErrorKind::ProjectionUndefined: return "projection-undefined";
    case ErrorKind::IncompleteDetection: return "incomplete-detection";
    case ErrorKind::DegeneratePair: return "degenerate-pair";
    case ErrorKind::Instability: return "instability";
    case ErrorKind::NoConvergence: return "no-convergence";
    case ErrorKind::PairNotFound: return "pair-not-found";
    case ErrorKind::EmptyContinuum: return "empty-continuum";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::InvalidBand: return "invalid-band";
    case ErrorKind::EmptyBand: return "empty-band";
    case ErrorKind::SearchFailed: return "search-failed";
    case ErrorKind::WindowTooSmall: return "window-too-small";
    case ErrorKind::NoN0: return "no-n0";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Parse: return "parse";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hyshadow

#endif  // HYSHADOW_ERROR_HPP
