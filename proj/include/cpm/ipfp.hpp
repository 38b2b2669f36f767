#pragma once

#include <vector>

#include "cpm/sequence.hpp"

namespace cpm {

struct IpfpOptions {
  std::size_t max_cycles = 500;
  double tol = 1e-9;
  std::size_t max_entries = kDefaultMaxEntries;
};

struct IpfpRun {
  Factor result;
  /// Estimate after the first cycle, i.e. the left-composition chain.
  Factor first_cycle;
  /// Cycles needed to reach the final estimate. The cycle that confirms
  /// convergence is not counted; at least 1.
  std::size_t cycles_used = 0;
  /// Max-abs change of the full table over each cycle that was run.
  std::vector<double> per_cycle_change;
  bool converged = false;
  /// Worst max-abs gap between a target and the result's marginal.
  double max_marginal_mismatch = 0.0;
};

/// One fitting step: current ◁ target. The estimate's scope must contain
/// the target's; afterwards its marginal on scope(target) equals target.
Factor ipfp_step(const Factor& current, const Factor& target);

/// Cyclic fitting of the uniform distribution on the union scope to the
/// factors of `seq`, until a full cycle changes no entry by more than
/// `opts.tol` or `opts.max_cycles` cycles have run.
IpfpRun ipfp_run(const GeneratingSequence& seq, const IpfpOptions& opts = {});

}  // namespace cpm
