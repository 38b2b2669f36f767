#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpm/compose.hpp"
#include "cpm/tables.hpp"

namespace cpm {

/// Ordered factors P1..Pn over a shared registry. Composed left to right.
class GeneratingSequence {
 public:
  GeneratingSequence() = default;
  explicit GeneratingSequence(VariableRegistry registry) : registry_(std::move(registry)) {}

  /// Appends a factor. Throws CardinalityMismatch when the factor's layout
  /// disagrees with the registry. Empty `name` gets "P<k>".
  void add(Factor factor, std::string name = {});

  const VariableRegistry& registry() const noexcept { return registry_; }
  const std::vector<Factor>& factors() const noexcept { return factors_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const Factor& operator[](std::size_t k) const { return factors_.at(k); }
  std::size_t size() const noexcept { return factors_.size(); }
  bool empty() const noexcept { return factors_.empty(); }

  /// K1 ∪ ... ∪ Kn.
  Scope union_scope() const;
  std::vector<std::size_t> union_cards() const;

  bool operator==(const GeneratingSequence&) const = default;

 private:
  VariableRegistry registry_;
  std::vector<Factor> factors_;
  std::vector<std::string> names_;
};

/// (...((P1 ▷ P2) ▷ P3) ... ▷ Pn). DominanceError carries the failing step.
Factor compose_sequence_right(const GeneratingSequence& seq,
                              std::size_t max_entries = kDefaultMaxEntries);

/// (...((P1 ◁ P2) ◁ P3) ... ◁ Pn). Every step marginalizes the running
/// high-dimensional estimate, so this is for desk-scale checks only.
Factor compose_sequence_left(const GeneratingSequence& seq,
                             std::size_t max_entries = kDefaultMaxEntries);

/// Oracle joint of the sequence; see oracle_joint().
Factor oracle_joint(const GeneratingSequence& seq,
                    std::size_t max_entries = kDefaultMaxEntries);

enum class PerfectMethod { Definition, Marginals, Both };

struct PerfectnessReport {
  bool verdict = true;
  PerfectMethod method = PerfectMethod::Both;
  double worst_deviation = 0.0;
  /// 1-based index of the first failing factor (definition: prefix length).
  std::optional<std::size_t> failing_index;
};

/// Definition method: P1▷…▷Pk == P1◁…◁Pk for every k >= 2.
/// Marginals method: each Pk equals the joint's marginal on Kk.
/// Both: runs both and throws CheckDisagreement when their verdicts differ.
PerfectnessReport is_perfect(const GeneratingSequence& seq,
                             PerfectMethod method = PerfectMethod::Both,
                             const Tolerance& tol = {},
                             std::size_t max_entries = kDefaultMaxEntries);

struct EliminationStats {
  /// Largest table built while eliminating, in entries.
  std::size_t peak_entries = 0;
  /// Number of factors rewritten (m), summed over rounds.
  std::size_t touched_count = 0;
  /// 0-based indices of rewritten factors, ascending, across all rounds.
  std::vector<std::size_t> touched;
  /// Union of the scopes of every table built.
  Scope intermediate_scope;
  /// Per touched factor: number of variables the emitted factor gained.
  std::vector<std::size_t> fill_in;
  std::size_t rounds = 0;
};

struct EliminationResult {
  GeneratingSequence reduced;
  /// Last accumulator, which still contains the eliminated variable.
  std::optional<Factor> residual;
  EliminationStats stats;
};

/// Rewrites the sequence into one representing its marginal without `v`.
///
/// Only the factors containing `v` (positions i1 < ... < im) are touched:
/// A1 = P_i1 and Ak = anticipate(Ak-1, P_ik, (K1 ∪ ... ∪ K_ik-1) \ {v}),
/// with Q_ik = Ak summed over v. The other factors are copied unchanged.
/// Appending the residual Am reproduces the original joint.
///
/// Throws VariableAbsent if no factor contains `v`, and DominanceError with
/// the 1-based position of the factor whose step is undefined.
EliminationResult eliminate_variable(const GeneratingSequence& seq, VarId v,
                                     bool keep_residual = false);

/// Eliminates `vars` one at a time in the given order, without residuals.
/// With `ignore_missing`, variables no longer present are skipped.
EliminationResult eliminate_variables(const GeneratingSequence& seq,
                                      const std::vector<VarId>& vars,
                                      bool ignore_missing = false);

enum class FixtureStructure {
  Independent,  ///< no parents
  Chain,        ///< pa(j) = {j-1}
  Random,       ///< 1..2 random earlier parents for every j >= 2
};

struct FixtureOptions {
  std::uint64_t seed = 1;
  std::size_t num_vars = 4;
  std::size_t max_card = 3;
  FixtureStructure structure = FixtureStructure::Random;
};

/// Perfect sequence built from a Bayesian network: a random positive joint
/// Q, parents in topological order, B = prod Q(Xj | pa(Xj)), and factors
/// B^(cl(Xj)) in that order. Variables are named X1..Xn.
GeneratingSequence gen_perfect_fixture(const FixtureOptions& opts);

/// A perfect fixture with one factor (one sharing variables with its
/// predecessors) perturbed by moving `magnitude` times the smaller of two
/// entries' mass between configurations that differ on the shared variables.
/// Throws InvalidArgument when no factor shares variables with an earlier one.
GeneratingSequence gen_nonperfect_fixture(const FixtureOptions& opts,
                                          double magnitude = 0.5);

}  // namespace cpm
