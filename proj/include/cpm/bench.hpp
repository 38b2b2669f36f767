#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpm/sequence.hpp"

namespace cpm {

/// Binary chain X1 - X2 - ... - Xn with random positive pairwise factors
/// P_k(X_k, X_k+1), k = 1..n-1.
GeneratingSequence make_binary_chain(std::size_t num_vars, std::uint64_t seed);

struct BenchOptions {
  std::size_t trials = 5;
  std::size_t max_entries = kDefaultMaxEntries;
  /// Also eliminate every interior variable in turn.
  bool all_interior = false;
};

struct BenchMethod {
  std::string name;
  bool ran = false;
  /// Why the method did not run (e.g. the joint exceeds the entry ceiling).
  std::string refused;
  /// Fastest trial.
  double wall_ms = 0.0;
  std::size_t peak_entries = 0;
  /// Max-abs deviation of the method's marginal from the oracle; only set
  /// when the oracle could be evaluated.
  std::optional<double> delta_vs_oracle;
};

struct BenchReport {
  std::size_t num_vars = 0;
  std::size_t num_factors = 0;
  std::string variable;
  std::size_t trials = 0;
  std::size_t max_entries = 0;
  std::vector<BenchMethod> methods;

  /// Filled when BenchOptions::all_interior is set.
  std::size_t interior_runs = 0;
  double interior_total_ms = 0.0;
  std::size_t interior_peak_entries = 0;
};

/// Compares local elimination of `v` with marginalizing the materialized joint.
BenchReport run_locality_bench(const GeneratingSequence& seq, VarId v,
                               const BenchOptions& opts = {});

}  // namespace cpm
