#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace amalgam {

enum class ErrorCode {
  DimMismatch,
  Singular,
  NonFinite,
  OutOfDomain,
  OutOfCertifiedDomain,
  NoConvergence,
  ExpectationNotInvertible,
  NotInvertibleInB,
  NotInSubalgebra,
  TooLarge,
  BadComposition,
  BadPartition,
  OrderExceeded,
  ShapeMismatch,
  Parse,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::OutOfCertifiedDomain: return "OutOfCertifiedDomain";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ExpectationNotInvertible: return "ExpectationNotInvertible";
    case ErrorCode::NotInvertibleInB: return "NotInvertibleInB";
    case ErrorCode::NotInSubalgebra: return "NotInSubalgebra";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::BadComposition: return "BadComposition";
    case ErrorCode::BadPartition: return "BadPartition";
    case ErrorCode::OrderExceeded: return "OrderExceeded";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace amalgam
