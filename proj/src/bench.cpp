#include "cpm/bench.hpp"

#include <algorithm>
#include <chrono>
#include <random>

namespace cpm {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

GeneratingSequence make_binary_chain(std::size_t num_vars, std::uint64_t seed) {
  if (num_vars < 2) throw Error(ErrorKind::InvalidArgument, "chain needs at least 2 variables");
  VariableRegistry reg;
  for (std::size_t j = 0; j < num_vars; ++j) reg.add("X" + std::to_string(j + 1), 2);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  GeneratingSequence seq(reg);
  for (std::size_t k = 0; k + 1 < num_vars; ++k) {
    std::vector<double> values(4);
    double total = 0.0;
    for (auto& x : values) total += (x = u(rng));
    for (auto& x : values) x /= total;
    const Scope scope{static_cast<VarId>(k), static_cast<VarId>(k + 1)};
    seq.add(Factor::from_table(Table(scope, {2, 2}, std::move(values))));
  }
  return seq;
}

BenchReport run_locality_bench(const GeneratingSequence& seq, VarId v,
                               const BenchOptions& opts) {
  if (opts.trials < 1) throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");

  BenchReport report;
  report.num_vars = seq.union_scope().size();
  report.num_factors = seq.size();
  report.variable = seq.registry().name(v);
  report.trials = opts.trials;
  report.max_entries = opts.max_entries;

  BenchMethod local;
  local.name = "eliminate";
  std::optional<EliminationResult> elim;
  for (std::size_t t = 0; t < opts.trials; ++t) {
    const auto t0 = Clock::now();
    auto r = eliminate_variable(seq, v, false);
    const double ms = ms_since(t0);
    local.wall_ms = t == 0 ? ms : std::min(local.wall_ms, ms);
    local.peak_entries = r.stats.peak_entries;
    elim = std::move(r);
  }
  local.ran = true;

  BenchMethod global;
  global.name = "joint";
  std::optional<Factor> joint_marginal;
  try {
    for (std::size_t t = 0; t < opts.trials; ++t) {
      const auto t0 = Clock::now();
      Factor joint = compose_sequence_right(seq, opts.max_entries);
      Factor m = marginalize_out(joint, v);
      const double ms = ms_since(t0);
      global.wall_ms = t == 0 ? ms : std::min(global.wall_ms, ms);
      global.peak_entries = joint.size();
      joint_marginal = std::move(m);
    }
    global.ran = true;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::TooLarge) throw;
    global.refused = e.what();
  }

  // The oracle needs the full joint as well, so it runs only when that fits.
  if (global.ran) {
    const Factor truth = marginalize_out(oracle_joint(seq, opts.max_entries), v);
    global.delta_vs_oracle = max_abs_diff(*joint_marginal, truth);
    local.delta_vs_oracle =
        max_abs_diff(compose_sequence_right(elim->reduced, opts.max_entries), truth);
  }

  report.methods.push_back(std::move(local));
  report.methods.push_back(std::move(global));

  if (opts.all_interior) {
    // Interior: occurs in at least two factors.
    const auto t0 = Clock::now();
    for (VarId u : seq.union_scope()) {
      std::size_t count = 0;
      for (const auto& f : seq.factors()) count += f.scope().contains(u) ? 1 : 0;
      if (count < 2) continue;
      auto r = eliminate_variable(seq, u, false);
      report.interior_peak_entries = std::max(report.interior_peak_entries, r.stats.peak_entries);
      ++report.interior_runs;
    }
    report.interior_total_ms = ms_since(t0);
  }
  return report;
}

}  // namespace cpm
