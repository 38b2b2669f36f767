#include "cpm/ipfp.hpp"

#include <algorithm>

namespace cpm {

Factor ipfp_step(const Factor& current, const Factor& target) {
  if (!target.scope().is_subset_of(current.scope())) {
    throw Error(ErrorKind::ScopeMismatch,
                "ipfp_step: target scope " + describe(target.scope()) +
                    " is not within the estimate's scope " + describe(current.scope()));
  }
  return compose_left(current, target);
}

IpfpRun ipfp_run(const GeneratingSequence& seq, const IpfpOptions& opts) {
  if (seq.empty()) throw Error(ErrorKind::InvalidArgument, "generating sequence has no factors");
  if (opts.max_cycles < 1) throw Error(ErrorKind::InvalidArgument, "max_cycles must be >= 1");
  if (!(opts.tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");

  const Scope scope = seq.union_scope();
  auto cards = seq.union_cards();
  checked_volume(cards, opts.max_entries);

  IpfpRun run;
  Factor estimate = uniform(scope, std::move(cards));
  for (std::size_t cycle = 1; cycle <= opts.max_cycles; ++cycle) {
    const Factor start = estimate;
    for (std::size_t k = 0; k < seq.size(); ++k) {
      try {
        estimate = ipfp_step(estimate, seq[k]);
      } catch (const DominanceError& e) {
        throw e.at_step(k + 1);
      }
    }
    if (cycle == 1) run.first_cycle = estimate;

    const double change = max_abs_diff(start, estimate);
    run.per_cycle_change.push_back(change);
    if (change <= opts.tol) {
      run.converged = true;
      run.cycles_used = std::max<std::size_t>(1, cycle - 1);
      break;
    }
  }
  if (!run.converged) run.cycles_used = opts.max_cycles;

  for (const auto& target : seq.factors()) {
    run.max_marginal_mismatch = std::max(
        run.max_marginal_mismatch, max_abs_diff(target, marginal(estimate, target.scope())));
  }
  run.result = std::move(estimate);
  return run;
}

}  // namespace cpm
