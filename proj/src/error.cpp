#include "cpm/error.hpp"

namespace cpm {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NegativeEntry: return "NegativeEntry";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::VariableAbsent: return "VariableAbsent";
    case ErrorKind::CardinalityMismatch: return "CardinalityMismatch";
    case ErrorKind::ZeroDivision: return "ZeroDivision";
    case ErrorKind::DominanceViolation: return "DominanceViolation";
    case ErrorKind::ScopeMismatch: return "ScopeMismatch";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UndeclaredVariable: return "UndeclaredVariable";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::CheckDisagreement: return "CheckDisagreement";
  }
  return "Unknown";
}

DominanceError DominanceError::at_step(std::size_t step) const {
  std::string msg = "step " + std::to_string(step) + ": " + what();
  return DominanceError(msg, intersection_, witness_, step);
}

ParseError::ParseError(ErrorKind kind, std::size_t line, std::size_t column,
                       const std::string& message)
    : Error(kind, "line " + std::to_string(line) + ", column " +
                      std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

}  // namespace cpm
