#include "cpm/compose.hpp"

#include <algorithm>

namespace cpm {

namespace {

void note(Trace* trace, const Table& t) {
  if (trace) trace->record(t);
}

// Index of the first entry where `den` is zero and `num` is not, if any.
std::optional<std::size_t> dominance_witness(const Table& num, const Table& den) {
  const auto nv = num.values();
  const auto dv = den.values();
  for (std::size_t i = 0; i < dv.size(); ++i) {
    if (dv[i] == 0.0 && nv[i] != 0.0) return i;
  }
  return std::nullopt;
}

[[noreturn]] void throw_dominance(const char* op, const Table& den, std::size_t at) {
  std::vector<std::size_t> inter(den.scope().begin(), den.scope().end());
  std::string msg = std::string(op) + " undefined: intersection marginal " +
                    describe(den.scope()) + " is zero at entry " + std::to_string(at) +
                    " where the other operand has mass";
  throw DominanceError(msg, std::move(inter), den.config_of(at));
}

void check_layouts(const Factor& a, const Factor& b) {
  Scope s;
  std::vector<std::size_t> c;
  merge_layout(a.scope(), a.cards(), b.scope(), b.cards(), s, c);
}

// num / den where den is the marginal of `base` on the shared variables and
// `other` must be dominated by it there.
Factor compose_impl(const char* op, const Factor& p1, const Factor& p2, bool right,
                    Trace* trace) {
  check_layouts(p1, p2);
  const Scope shared = p1.scope().intersect(p2.scope());
  const Table m1 = marginal(p1.table(), shared);
  const Table m2 = marginal(p2.table(), shared);
  note(trace, m1);
  note(trace, m2);

  const Table& den = right ? m2 : m1;
  const Table& other = right ? m1 : m2;
  if (auto at = dominance_witness(other, den)) throw_dominance(op, den, *at);

  Table num = multiply(p1.table(), p2.table());
  note(trace, num);
  Table out = divide_by_marginal(num, den);
  note(trace, out);
  return Factor::assume_normalized(std::move(out));
}

}  // namespace

bool dominates(const Factor& a, const Factor& b, const Scope& s) {
  const Scope shared = s.intersect(a.scope()).intersect(b.scope());
  const Table ma = marginal(a.table(), shared);
  const Table mb = marginal(b.table(), shared);
  return !dominance_witness(ma, mb).has_value();
}

Factor compose_right(const Factor& p1, const Factor& p2, Trace* trace) {
  return compose_impl("right composition", p1, p2, true, trace);
}

Factor compose_left(const Factor& p1, const Factor& p2, Trace* trace) {
  return compose_impl("left composition", p1, p2, false, trace);
}

bool is_consistent(const Factor& p1, const Factor& p2, const Tolerance& tol) {
  tol.validate();
  check_layouts(p1, p2);
  const Scope shared = p1.scope().intersect(p2.scope());
  return max_abs_diff(marginal(p1.table(), shared), marginal(p2.table(), shared)) <=
         tol.eq_tol;
}

Factor anticipate(const Factor& p2, const Factor& p3, const Scope& context, AuxChoice aux,
                  Trace* trace) {
  check_layouts(p2, p3);
  const Scope aux_scope = context.minus(p2.scope()).intersect(p3.scope());
  if (aux_scope.empty()) return compose_right(p2, p3, trace);

  Table r;
  if (aux == AuxChoice::OwnMarginal) {
    r = marginal(p3.table(), aux_scope);
  } else {
    std::vector<std::size_t> cards;
    for (VarId v : aux_scope) cards.push_back(p3.cardinality_of(v));
    r = uniform(aux_scope, std::move(cards)).table();
  }
  note(trace, r);

  // aux_scope is disjoint from K2, so the product is again a distribution.
  Table lifted = multiply(r, p2.table());
  note(trace, lifted);
  return compose_right(Factor::assume_normalized(std::move(lifted)), p3, trace);
}

}  // namespace cpm
