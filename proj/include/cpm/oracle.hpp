#pragma once

#include <span>

#include "cpm/tables.hpp"

namespace cpm {

/// Joint distribution of a right-composition chain evaluated entry by entry:
///
///   P1(x) * prod_{k>=2} Pk(x) / Pk^(Kk ∩ (K1 ∪ ... ∪ Kk-1))(x)
///
/// Shares no code with the table algebra, so it serves as a reference for
/// the composition operators. Throws DominanceError carrying the 1-based step
/// at which the chain is undefined, and TooLarge above `max_entries`.
Factor oracle_joint(std::span<const Factor> factors,
                    std::size_t max_entries = kDefaultMaxEntries);

}  // namespace cpm
