#include "cpm/tables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "broadcast.hpp"

namespace cpm {

void Tolerance::validate() const {
  if (!(eq_tol > 0.0) || !(norm_tol > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "tolerances must be positive");
  }
}

// ---------------------------------------------------------------------------
// VariableRegistry

VarId VariableRegistry::add(std::string name, std::size_t cardinality) {
  if (name.empty()) throw Error(ErrorKind::InvalidArgument, "empty variable name");
  if (cardinality < 1) {
    throw Error(ErrorKind::InvalidArgument,
                "variable '" + name + "' must have cardinality >= 1");
  }
  if (find(name)) {
    throw Error(ErrorKind::InvalidArgument, "variable '" + name + "' declared twice");
  }
  names_.push_back(std::move(name));
  cards_.push_back(cardinality);
  return static_cast<VarId>(names_.size() - 1);
}

std::optional<VarId> VariableRegistry::find(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<VarId>(it - names_.begin());
}

VarId VariableRegistry::id(std::string_view name) const {
  if (auto v = find(name)) return *v;
  throw Error(ErrorKind::UndeclaredVariable,
              "undeclared variable '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Scope

Scope::Scope(std::initializer_list<VarId> vars) {
  *this = from_unsorted(std::vector<VarId>(vars));
}

Scope Scope::from_unsorted(std::vector<VarId> vars) {
  std::sort(vars.begin(), vars.end());
  if (std::adjacent_find(vars.begin(), vars.end()) != vars.end()) {
    throw Error(ErrorKind::InvalidArgument, "duplicate variable in scope");
  }
  Scope s;
  s.vars_ = std::move(vars);
  return s;
}

bool Scope::contains(VarId v) const {
  return std::binary_search(vars_.begin(), vars_.end(), v);
}

std::optional<std::size_t> Scope::position(VarId v) const {
  auto it = std::lower_bound(vars_.begin(), vars_.end(), v);
  if (it == vars_.end() || *it != v) return std::nullopt;
  return static_cast<std::size_t>(it - vars_.begin());
}

Scope Scope::unite(const Scope& other) const {
  Scope s;
  std::set_union(vars_.begin(), vars_.end(), other.vars_.begin(), other.vars_.end(),
                 std::back_inserter(s.vars_));
  return s;
}

Scope Scope::intersect(const Scope& other) const {
  Scope s;
  std::set_intersection(vars_.begin(), vars_.end(), other.vars_.begin(),
                        other.vars_.end(), std::back_inserter(s.vars_));
  return s;
}

Scope Scope::minus(const Scope& other) const {
  Scope s;
  std::set_difference(vars_.begin(), vars_.end(), other.vars_.begin(),
                      other.vars_.end(), std::back_inserter(s.vars_));
  return s;
}

Scope Scope::without(VarId v) const { return minus(Scope{v}); }

bool Scope::is_subset_of(const Scope& other) const {
  return std::includes(other.vars_.begin(), other.vars_.end(), vars_.begin(),
                       vars_.end());
}

std::string describe(const Scope& scope, const VariableRegistry* registry) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < scope.size(); ++i) {
    if (i) os << ',';
    if (registry && scope[i] < registry->size()) {
      os << registry->name(scope[i]);
    } else {
      os << '#' << scope[i];
    }
  }
  os << '}';
  return os.str();
}

// ---------------------------------------------------------------------------
// Table / Factor

std::size_t checked_volume(std::span<const std::size_t> cards, std::size_t limit) {
  std::size_t n = 1;
  for (auto c : cards) {
    if (c != 0 && n > std::numeric_limits<std::size_t>::max() / c) {
      throw Error(ErrorKind::TooLarge, "table size overflows");
    }
    n *= c;
  }
  if (n > limit) {
    throw Error(ErrorKind::TooLarge, "table of " + std::to_string(n) +
                                         " entries exceeds the ceiling of " +
                                         std::to_string(limit));
  }
  return n;
}

Table::Table(Scope scope, std::vector<std::size_t> cards, std::vector<double> values)
    : scope_(std::move(scope)), cards_(std::move(cards)), values_(std::move(values)) {
  if (cards_.size() != scope_.size()) {
    throw Error(ErrorKind::ShapeMismatch, "cardinality list does not match scope");
  }
  for (auto c : cards_) {
    if (c < 1) throw Error(ErrorKind::ShapeMismatch, "cardinality must be >= 1");
  }
  const std::size_t expected = checked_volume(cards_);
  if (values_.size() != expected) {
    throw Error(ErrorKind::ShapeMismatch,
                "expected " + std::to_string(expected) + " values, got " +
                    std::to_string(values_.size()));
  }
}

Table Table::filled(Scope scope, std::vector<std::size_t> cards, double fill) {
  std::vector<double> values(checked_volume(cards), fill);
  return Table(std::move(scope), std::move(cards), std::move(values));
}

std::size_t Table::cardinality_of(VarId v) const {
  if (auto pos = scope_.position(v)) return cards_[*pos];
  throw Error(ErrorKind::VariableAbsent, "variable #" + std::to_string(v) + " not in scope");
}

std::size_t Table::index_of(std::span<const std::size_t> config) const {
  if (config.size() != cards_.size()) {
    throw Error(ErrorKind::ShapeMismatch, "configuration length does not match scope");
  }
  std::size_t idx = 0;
  for (std::size_t d = 0; d < cards_.size(); ++d) {
    if (config[d] >= cards_[d]) {
      throw Error(ErrorKind::ShapeMismatch, "configuration value out of range");
    }
    idx = idx * cards_[d] + config[d];
  }
  return idx;
}

std::vector<std::size_t> Table::config_of(std::size_t index) const {
  if (index >= values_.size()) {
    throw Error(ErrorKind::ShapeMismatch, "index out of range");
  }
  std::vector<std::size_t> config(cards_.size());
  for (std::size_t d = cards_.size(); d-- > 0;) {
    config[d] = index % cards_[d];
    index /= cards_[d];
  }
  return config;
}

double Table::sum() const noexcept {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

Factor Factor::from_table(Table table, const Tolerance& tol) {
  for (double v : table.values()) {
    if (std::isnan(v) || v < 0.0) {
      throw Error(ErrorKind::NegativeEntry, "distribution has a negative or NaN entry");
    }
  }
  const double s = table.sum();
  if (!(std::abs(s - 1.0) <= tol.norm_tol)) {
    std::ostringstream os;
    os.precision(17);
    os << "distribution sums to " << s << ", not 1 within " << tol.norm_tol;
    throw Error(ErrorKind::NotNormalized, os.str());
  }
  return Factor(std::move(table));
}

std::vector<std::size_t> cards_of(const Scope& scope, const VariableRegistry& registry) {
  std::vector<std::size_t> cards;
  cards.reserve(scope.size());
  for (VarId v : scope) {
    if (v >= registry.size()) {
      throw Error(ErrorKind::UndeclaredVariable,
                  "variable #" + std::to_string(v) + " not in registry");
    }
    cards.push_back(registry.cardinality(v));
  }
  return cards;
}

Factor make_factor(const Scope& scope, std::vector<double> values,
                   const VariableRegistry& registry, const Tolerance& tol) {
  tol.validate();
  return Factor::from_table(Table(scope, cards_of(scope, registry), std::move(values)), tol);
}

Factor uniform(const Scope& scope, std::vector<std::size_t> cards) {
  const double n = static_cast<double>(checked_volume(cards));
  return Factor::assume_normalized(Table::filled(scope, std::move(cards), 1.0 / n));
}

// ---------------------------------------------------------------------------
// Algebra

void merge_layout(const Scope& a, std::span<const std::size_t> a_cards, const Scope& b,
                  std::span<const std::size_t> b_cards, Scope& out,
                  std::vector<std::size_t>& out_cards) {
  out = a.unite(b);
  out_cards.assign(out.size(), 0);
  for (std::size_t d = 0; d < out.size(); ++d) {
    const VarId v = out[d];
    auto pa = a.position(v);
    auto pb = b.position(v);
    if (pa && pb && a_cards[*pa] != b_cards[*pb]) {
      throw Error(ErrorKind::CardinalityMismatch,
                  "variable #" + std::to_string(v) + " has cardinality " +
                      std::to_string(a_cards[*pa]) + " and " +
                      std::to_string(b_cards[*pb]));
    }
    out_cards[d] = pa ? a_cards[*pa] : b_cards[*pb];
  }
}

Table marginal(const Table& t, const Scope& keep) {
  const Scope out_scope = t.scope().intersect(keep);
  if (out_scope == t.scope()) return t;

  std::vector<std::size_t> out_cards;
  out_cards.reserve(out_scope.size());
  for (VarId v : out_scope) out_cards.push_back(t.cardinality_of(v));

  std::vector<double> out(checked_volume(out_cards), 0.0);
  const auto src = t.values();
  detail::for_each_aligned<1>(
      t.cards(), {detail::aligned_strides(t.scope(), out_scope, out_cards)},
      [&](std::size_t i, const std::array<std::size_t, 1>& o) { out[o[0]] += src[i]; });
  return Table(out_scope, std::move(out_cards), std::move(out));
}

Factor marginal(const Factor& p, const Scope& keep) {
  return Factor::assume_normalized(marginal(p.table(), keep));
}

Factor marginalize_out(const Factor& p, VarId v) {
  if (!p.scope().contains(v)) {
    throw Error(ErrorKind::VariableAbsent,
                "variable #" + std::to_string(v) + " is not in the factor's scope");
  }
  return marginal(p, p.scope().without(v));
}

Table multiply(const Table& a, const Table& b) {
  Scope scope;
  std::vector<std::size_t> cards;
  merge_layout(a.scope(), a.cards(), b.scope(), b.cards(), scope, cards);

  std::vector<double> out(checked_volume(cards));
  const auto av = a.values();
  const auto bv = b.values();
  detail::for_each_aligned<2>(
      cards,
      {detail::aligned_strides(scope, a.scope(), a.cards()),
       detail::aligned_strides(scope, b.scope(), b.cards())},
      [&](std::size_t i, const std::array<std::size_t, 2>& o) {
        out[i] = av[o[0]] * bv[o[1]];
      });
  return Table(std::move(scope), std::move(cards), std::move(out));
}

Table divide_by_marginal(const Table& num, const Table& den) {
  if (!den.scope().is_subset_of(num.scope())) {
    throw Error(ErrorKind::ScopeMismatch, "denominator scope is not within numerator scope");
  }
  for (std::size_t d = 0; d < den.scope().size(); ++d) {
    if (num.cardinality_of(den.scope()[d]) != den.cards()[d]) {
      throw Error(ErrorKind::CardinalityMismatch, "denominator cardinality mismatch");
    }
  }

  std::vector<double> out(num.size());
  const auto nv = num.values();
  const auto dv = den.values();
  detail::for_each_aligned<1>(
      num.cards(), {detail::aligned_strides(num.scope(), den.scope(), den.cards())},
      [&](std::size_t i, const std::array<std::size_t, 1>& o) {
        const double d = dv[o[0]];
        if (d == 0.0) {
          if (nv[i] != 0.0) {
            throw Error(ErrorKind::ZeroDivision,
                        "positive numerator over a zero denominator at entry " +
                            std::to_string(i));
          }
          out[i] = 0.0;
        } else {
          out[i] = nv[i] / d;
        }
      });
  return Table(num.scope(), std::vector<std::size_t>(num.cards().begin(), num.cards().end()),
               std::move(out));
}

double max_abs_diff(const Table& a, const Table& b) {
  if (a.scope() != b.scope() ||
      !std::equal(a.cards().begin(), a.cards().end(), b.cards().begin(), b.cards().end())) {
    throw Error(ErrorKind::ScopeMismatch, "max_abs_diff: tables have different scopes");
  }
  double worst = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = std::abs(av[i] - bv[i]);
    if (std::isnan(d)) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, d);
  }
  return worst;
}

void Trace::record(const Table& t) {
  peak_entries = std::max(peak_entries, t.size());
  ++tables;
  touched = touched.unite(t.scope());
}

}  // namespace cpm
