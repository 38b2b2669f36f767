#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpm/error.hpp"

namespace cpm {

/// Index of a variable in its registry. Registry order is the canonical order.
using VarId = std::uint32_t;

struct Tolerance {
  double eq_tol = 1e-9;
  double norm_tol = 1e-9;

  void validate() const;
};

/// Default ceiling on the number of entries in any materialized joint table.
inline constexpr std::size_t kDefaultMaxEntries = std::size_t{1} << 24;

class VariableRegistry {
 public:
  VarId add(std::string name, std::size_t cardinality);

  std::optional<VarId> find(std::string_view name) const;
  /// Throws UndeclaredVariable when the name is unknown.
  VarId id(std::string_view name) const;

  const std::string& name(VarId id) const { return names_.at(id); }
  std::size_t cardinality(VarId id) const { return cards_.at(id); }
  std::size_t size() const noexcept { return names_.size(); }

  bool operator==(const VariableRegistry&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<std::size_t> cards_;
};

/// Strictly ascending set of variable ids.
class Scope {
 public:
  Scope() = default;
  Scope(std::initializer_list<VarId> vars);
  /// Sorts; throws InvalidArgument on duplicates.
  static Scope from_unsorted(std::vector<VarId> vars);

  bool contains(VarId v) const;
  bool empty() const noexcept { return vars_.empty(); }
  std::size_t size() const noexcept { return vars_.size(); }
  VarId operator[](std::size_t i) const { return vars_[i]; }
  auto begin() const noexcept { return vars_.begin(); }
  auto end() const noexcept { return vars_.end(); }
  const std::vector<VarId>& vars() const noexcept { return vars_; }

  /// Position of `v` within the scope, if present.
  std::optional<std::size_t> position(VarId v) const;

  Scope unite(const Scope& other) const;
  Scope intersect(const Scope& other) const;
  Scope minus(const Scope& other) const;
  Scope without(VarId v) const;
  bool is_subset_of(const Scope& other) const;

  bool operator==(const Scope&) const = default;

 private:
  std::vector<VarId> vars_;
};

std::string describe(const Scope& scope, const VariableRegistry* registry = nullptr);

/// Dense row-major table over a scope; the last scope variable varies fastest.
/// Holds arbitrary nonnegative values, e.g. unnormalized intermediates.
class Table {
 public:
  Table() : values_{1.0} {}
  /// Throws ShapeMismatch when sizes disagree.
  Table(Scope scope, std::vector<std::size_t> cards, std::vector<double> values);

  /// Every entry set to `fill`.
  static Table filled(Scope scope, std::vector<std::size_t> cards, double fill);

  const Scope& scope() const noexcept { return scope_; }
  std::span<const std::size_t> cards() const noexcept { return cards_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  /// Cardinality of `v`; throws VariableAbsent when not in scope.
  std::size_t cardinality_of(VarId v) const;

  std::size_t index_of(std::span<const std::size_t> config) const;
  std::vector<std::size_t> config_of(std::size_t index) const;
  double at(std::span<const std::size_t> config) const {
    return values_[index_of(config)];
  }

  double sum() const noexcept;

  bool operator==(const Table&) const = default;

 private:
  Scope scope_;
  std::vector<std::size_t> cards_;
  std::vector<double> values_;
};

/// A probability distribution: a nonnegative table whose entries sum to one.
class Factor {
 public:
  /// Scalar distribution [1.0].
  Factor() = default;

  /// Checks nonnegativity and normalization; stores values verbatim.
  static Factor from_table(Table table, const Tolerance& tol = {});
  /// Skips the checks. For results of operations that preserve total mass.
  static Factor assume_normalized(Table table) { return Factor(std::move(table)); }

  const Table& table() const noexcept { return table_; }
  const Scope& scope() const noexcept { return table_.scope(); }
  std::span<const std::size_t> cards() const noexcept { return table_.cards(); }
  std::span<const double> values() const noexcept { return table_.values(); }
  std::size_t size() const noexcept { return table_.size(); }
  std::size_t cardinality_of(VarId v) const { return table_.cardinality_of(v); }
  double at(std::span<const std::size_t> config) const { return table_.at(config); }
  double sum() const noexcept { return table_.sum(); }

  bool operator==(const Factor&) const = default;

 private:
  explicit Factor(Table table) : table_(std::move(table)) {}

  Table table_;
};

/// Cardinalities of `scope` looked up in `registry`.
std::vector<std::size_t> cards_of(const Scope& scope, const VariableRegistry& registry);

/// Product of `cards`; throws TooLarge when it exceeds `limit` or overflows.
std::size_t checked_volume(std::span<const std::size_t> cards,
                           std::size_t limit = SIZE_MAX);

Factor make_factor(const Scope& scope, std::vector<double> values,
                   const VariableRegistry& registry, const Tolerance& tol = {});

Factor uniform(const Scope& scope, std::vector<std::size_t> cards);

/// Distribution over scope(P) ∩ keep, summing out everything else.
Factor marginal(const Factor& p, const Scope& keep);
Table marginal(const Table& t, const Scope& keep);

/// Removes one variable; throws VariableAbsent when `v` is not in scope.
Factor marginalize_out(const Factor& p, VarId v);

/// Pointwise product broadcast over the union scope.
Table multiply(const Table& a, const Table& b);

/// num / den broadcast over scope(num), with 0·0/0 = 0. Throws ZeroDivision
/// where den is exactly zero but num is positive.
Table divide_by_marginal(const Table& num, const Table& den);

/// Throws ScopeMismatch unless both tables share a scope.
double max_abs_diff(const Table& a, const Table& b);
inline double max_abs_diff(const Factor& a, const Factor& b) {
  return max_abs_diff(a.table(), b.table());
}

/// Union of two layouts; throws CardinalityMismatch on shared-variable conflicts.
void merge_layout(const Scope& a, std::span<const std::size_t> a_cards,
                  const Scope& b, std::span<const std::size_t> b_cards,
                  Scope& out, std::vector<std::size_t>& out_cards);

/// Records the size and scope of every intermediate table an operation builds.
struct Trace {
  std::size_t peak_entries = 0;
  std::size_t tables = 0;
  Scope touched;

  void record(const Table& t);
  void record(const Factor& f) { record(f.table()); }
};

}  // namespace cpm
