#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpm {

enum class ErrorKind {
  ShapeMismatch,
  NegativeEntry,
  NotNormalized,
  VariableAbsent,
  CardinalityMismatch,
  ZeroDivision,
  DominanceViolation,
  ScopeMismatch,
  TooLarge,
  ParseError,
  UndeclaredVariable,
  InvalidArgument,
  CheckDisagreement,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised when a composition is undefined: some configuration of the shared
// variables has zero mass in the denominator marginal but positive mass in
// the numerator marginal.
class DominanceError : public Error {
 public:
  DominanceError(const std::string& what, std::vector<std::size_t> intersection,
                 std::vector<std::size_t> witness,
                 std::optional<std::size_t> step = std::nullopt)
      : Error(ErrorKind::DominanceViolation, what),
        intersection_(std::move(intersection)),
        witness_(std::move(witness)),
        step_(step) {}

  /// Variable ids of the intersection scope.
  const std::vector<std::size_t>& intersection() const noexcept {
    return intersection_;
  }
  /// Configuration of the intersection scope at which dominance fails.
  const std::vector<std::size_t>& witness() const noexcept { return witness_; }
  /// 1-based position in a sequence at which the failing step occurred.
  std::optional<std::size_t> step() const noexcept { return step_; }

  DominanceError at_step(std::size_t step) const;

 private:
  std::vector<std::size_t> intersection_;
  std::vector<std::size_t> witness_;
  std::optional<std::size_t> step_;
};

class ParseError : public Error {
 public:
  ParseError(ErrorKind kind, std::size_t line, std::size_t column,
             const std::string& message);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace cpm
