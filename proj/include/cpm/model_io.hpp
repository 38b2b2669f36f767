#pragma once

#include <string>
#include <string_view>

#include "cpm/sequence.hpp"

namespace cpm {

// Line-oriented model format:
//
//   cpm 1
//   var <name> <cardinality>        (one per variable, canonical order)
//   dist <name> <var>...            (scope in any order)
//   <values>                        (whitespace separated, any number of lines;
//                                    last scope variable varies fastest)
//   end
//
// '#' starts a comment. Dist blocks appear in sequence order.

struct ParseOptions {
  /// Divide each dist by its sum instead of only checking it.
  bool renormalize = false;
  /// Accepted |sum - 1| for hand-written files.
  double norm_tol = 1e-6;
};

/// Throws ParseError (kinds ParseError, UndeclaredVariable, ShapeMismatch,
/// NegativeEntry, NotNormalized) with the 1-based line and column.
GeneratingSequence parse_model(std::string_view text, const ParseOptions& opts = {});

/// Canonical text; values printed with 17 significant digits so that
/// parse_model(serialize_model(s)) == s bit for bit.
std::string serialize_model(const GeneratingSequence& seq);

GeneratingSequence read_model_file(const std::string& path, const ParseOptions& opts = {});
void write_text_file(const std::string& path, const std::string& text);

}  // namespace cpm
