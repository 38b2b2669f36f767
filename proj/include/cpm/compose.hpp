#pragma once

#include "cpm/tables.hpp"

namespace cpm {

/// True iff zeros of b^(S) force zeros of a^(S), i.e. a^(S) << b^(S).
/// Zeros are exact.
bool dominates(const Factor& a, const Factor& b, const Scope& s);

/// Right composition p1 ▷ p2 = p1·p2 / p2^(K1∩K2), with 0·0/0 = 0.
/// The result keeps p1 as its marginal on K1.
Factor compose_right(const Factor& p1, const Factor& p2, Trace* trace = nullptr);

/// Left composition p1 ◁ p2 = p1·p2 / p1^(K1∩K2). Keeps p2's marginal on K2.
Factor compose_left(const Factor& p1, const Factor& p2, Trace* trace = nullptr);

/// p1 and p2 agree on their shared variables within tol.eq_tol.
bool is_consistent(const Factor& p1, const Factor& p2, const Tolerance& tol = {});

enum class AuxChoice {
  OwnMarginal,  ///< R = p3, as in the operator's definition
  Uniform,      ///< R = uniform distribution
};

/// Anticipating composition relative to `context`:
///
///   (R^((context \ K2) ∩ K3) · p2) ▷ p3
///
/// Reassociates a chain: p1 ▷ p2 ▷ p3 == p1 ▷ anticipate(p2, p3, K1).
/// With an empty auxiliary scope this is plain p2 ▷ p3.
Factor anticipate(const Factor& p2, const Factor& p3, const Scope& context,
                  AuxChoice aux = AuxChoice::OwnMarginal, Trace* trace = nullptr);

}  // namespace cpm
