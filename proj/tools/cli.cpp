#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "cpm/bench.hpp"
#include "cpm/ipfp.hpp"
#include "cpm/model_io.hpp"
#include "cpm/sequence.hpp"

namespace cpm::cli {

namespace {

enum class Format { Human, Summary };

struct Common {
  std::string model;
  std::string out;
  bool renormalize = false;
  std::size_t max_entries = kDefaultMaxEntries;
  Format format = Format::Human;
};

void add_common(CLI::App* cmd, Common& c, bool model_required = true) {
  auto* m = cmd->add_option("model", c.model, "Model file");
  if (model_required) m->required();
  cmd->add_flag("--renormalize", c.renormalize, "Rescale every dist to sum to 1 on load");
  cmd->add_option("--max-entries", c.max_entries, "Ceiling on materialized table entries")
      ->check(CLI::PositiveNumber);
  cmd->add_option_function<std::string>(
         "--format",
         [&c](const std::string& v) { c.format = v == "summary" ? Format::Summary : Format::Human; },
         "Report format: human or summary (key=value)")
      ->check(CLI::IsMember({"human", "summary"}))
      ->type_name("FORMAT");
}

// Collects report lines and prints them as key=value or aligned text.
class Report {
 public:
  void add(const std::string& key, const std::string& value) { rows_.emplace_back(key, value); }
  void add(const std::string& key, double value) {
    std::ostringstream os;
    os << std::setprecision(6) << value;
    add(key, os.str());
  }
  void add(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }
  void add(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }

  void print(std::ostream& os, Format f) const {
    std::size_t width = 0;
    for (const auto& [k, _] : rows_) width = std::max(width, k.size());
    for (const auto& [k, v] : rows_) {
      if (f == Format::Summary) {
        os << k << '=' << v << '\n';
      } else {
        os << std::left << std::setw(static_cast<int>(width) + 2) << (k + ":") << v << '\n';
      }
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> rows_;
};

GeneratingSequence load(const Common& c) {
  ParseOptions po;
  po.renormalize = c.renormalize;
  return read_model_file(c.model, po);
}

GeneratingSequence single(const VariableRegistry& reg, const Factor& f, const std::string& name) {
  GeneratingSequence s(reg);
  s.add(f, name);
  return s;
}

// Model text goes to --out or stdout; the report follows it on stdout only
// when the model went to a file.
void emit(const Common& c, const GeneratingSequence& model, const Report& report,
          std::ostream& out, std::ostream& err) {
  const std::string text = serialize_model(model);
  if (c.out.empty()) {
    out << text;
    report.print(err, c.format);
  } else {
    write_text_file(c.out, text);
    report.print(out, c.format);
  }
}

std::vector<VarId> resolve(const GeneratingSequence& seq, const std::vector<std::string>& names) {
  std::vector<VarId> ids;
  for (const auto& n : names) ids.push_back(seq.registry().id(n));
  return ids;
}

std::string join(const std::vector<std::size_t>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Composed probabilistic models: composition, elimination, checks"};
  app.name("cpm");
  app.require_subcommand(1);

  // joint
  Common joint_opts;
  auto* joint = app.add_subcommand("joint", "Compose the sequence left to right into its joint");
  add_common(joint, joint_opts);
  joint->add_option("--out", joint_opts.out, "Output model file");

  // eliminate
  Common elim_opts;
  std::vector<std::string> elim_vars;
  bool keep_residual = false, ignore_missing = false;
  std::string order = "ascending";
  auto* elim = app.add_subcommand("eliminate", "Marginalize variables out of the sequence locally");
  add_common(elim, elim_opts);
  elim->add_option("--out", elim_opts.out, "Output model file");
  elim->add_option("--var,--eliminate", elim_vars, "Variable to eliminate (repeatable)")
      ->required()
      ->take_all();
  elim->add_flag("--keep-residual", keep_residual,
                 "Append the residual factor (single variable only)");
  elim->add_flag("--ignore-missing", ignore_missing, "Skip variables absent from the sequence");
  elim->add_option("--order", order, "Elimination order")
      ->check(CLI::IsMember({"ascending", "given"}));

  // check
  Common check_opts;
  bool want_perfect = false, want_consistent = false;
  std::string method = "both";
  double check_tol = 1e-9;
  auto* check = app.add_subcommand("check", "Check perfectness and pairwise consistency");
  add_common(check, check_opts);
  check->add_flag("--perfect", want_perfect, "Check perfectness");
  check->add_flag("--consistent", want_consistent, "Check pairwise consistency");
  check->add_option("--method", method, "Perfectness method")
      ->check(CLI::IsMember({"def", "marginals", "both"}));
  check->add_option("--tol", check_tol, "Equality tolerance")->check(CLI::PositiveNumber);

  // oracle
  Common oracle_opts;
  std::vector<std::string> oracle_vars;
  double oracle_tol = 1e-9;
  auto* oracle = app.add_subcommand("oracle", "Compare the composed chain against the oracle joint");
  add_common(oracle, oracle_opts);
  oracle->add_option("--var,--eliminate", oracle_vars, "Eliminate first, then compare")
      ->take_all();
  oracle->add_option("--tol", oracle_tol, "Pass threshold")->check(CLI::PositiveNumber);

  // ipfp
  Common ipfp_opts;
  IpfpOptions ipfp_cfg;
  auto* ipfp = app.add_subcommand("ipfp", "Iterative proportional fitting to the sequence");
  add_common(ipfp, ipfp_opts);
  ipfp->add_option("--out", ipfp_opts.out, "Output model file");
  ipfp->add_option("--max-cycles", ipfp_cfg.max_cycles, "Cycle limit")->check(CLI::PositiveNumber);
  ipfp->add_option("--tol", ipfp_cfg.tol, "Convergence threshold")->check(CLI::PositiveNumber);

  // bench
  Common bench_opts;
  std::size_t chain_length = 26;
  std::uint64_t bench_seed = 7;
  std::string bench_var;
  BenchOptions bench_cfg;
  auto* bench = app.add_subcommand("bench", "Local elimination versus joint marginalization");
  add_common(bench, bench_opts, false);
  bench->add_option("--chain-length", chain_length, "Variables in the generated binary chain")
      ->check(CLI::Range(2, 1 << 20));
  bench->add_option("--seed", bench_seed, "Seed for the generated chain");
  bench->add_option("--var", bench_var, "Variable to eliminate (default: middle of the chain)");
  bench->add_option("--trials", bench_cfg.trials, "Repetitions per method")
      ->check(CLI::PositiveNumber);
  bench->add_flag("--all-interior", bench_cfg.all_interior,
                  "Also eliminate every interior variable in turn");

  // gen
  Common gen_opts;
  std::string gen_kind = "perfect";
  FixtureOptions fixture;
  std::string structure = "random";
  double magnitude = 0.5;
  auto* gen = app.add_subcommand("gen", "Generate a perfect or non-perfect fixture model");
  gen->add_option("kind", gen_kind, "perfect | nonperfect")
      ->check(CLI::IsMember({"perfect", "nonperfect"}));
  gen->add_option("--out", gen_opts.out, "Output model file");
  gen->add_option("--seed", fixture.seed, "Random seed");
  gen->add_option("--num-vars", fixture.num_vars, "Number of variables")
      ->check(CLI::PositiveNumber);
  gen->add_option("--max-card", fixture.max_card, "Largest cardinality")
      ->check(CLI::PositiveNumber);
  gen->add_option("--structure", structure, "Parent structure")
      ->check(CLI::IsMember({"independent", "chain", "random"}));
  gen->add_option("--magnitude", magnitude, "Perturbation for nonperfect fixtures")
      ->check(CLI::Range(0.0, 1.0));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }

  try {
    if (joint->parsed()) {
      const auto seq = load(joint_opts);
      const Factor j = compose_sequence_right(seq, joint_opts.max_entries);
      Report r;
      r.add("entries", j.size());
      r.add("normalization_error", std::abs(j.sum() - 1.0));
      emit(joint_opts, single(seq.registry(), j, "joint"), r, out, err);
      return kOk;
    }

    if (elim->parsed()) {
      const auto seq = load(elim_opts);
      auto ids = resolve(seq, elim_vars);
      if (order == "ascending") std::sort(ids.begin(), ids.end());
      if (keep_residual && ids.size() != 1) {
        err << "error: --keep-residual needs exactly one --var\n";
        return kError;
      }
      EliminationResult res = keep_residual
                                  ? eliminate_variable(seq, ids.front(), true)
                                  : eliminate_variables(seq, ids, ignore_missing);
      GeneratingSequence model = res.reduced;
      if (res.residual) model.add(*res.residual, "residual");
      Report r;
      r.add("peak_entries", res.stats.peak_entries);
      r.add("touched", join(res.stats.touched));
      r.add("touched_count", res.stats.touched_count);
      r.add("fill_in", join(res.stats.fill_in));
      r.add("intermediate_scope", describe(res.stats.intermediate_scope, &seq.registry()));
      emit(elim_opts, model, r, out, err);
      return kOk;
    }

    if (check->parsed()) {
      const auto seq = load(check_opts);
      if (!want_perfect && !want_consistent) want_perfect = want_consistent = true;
      Tolerance tol;
      tol.eq_tol = check_tol;
      bool ok = true;
      Report r;
      if (want_consistent) {
        std::size_t bad = 0;
        std::string first_bad;
        for (std::size_t i = 0; i < seq.size(); ++i) {
          for (std::size_t j = i + 1; j < seq.size(); ++j) {
            if (!is_consistent(seq[i], seq[j], tol)) {
              if (bad++ == 0) first_bad = seq.names()[i] + "," + seq.names()[j];
            }
          }
        }
        r.add("consistent", bad == 0);
        r.add("inconsistent_pairs", bad);
        if (bad) r.add("first_inconsistent_pair", first_bad);
        ok = ok && bad == 0;
      }
      if (want_perfect) {
        const PerfectMethod m = method == "def"         ? PerfectMethod::Definition
                                : method == "marginals" ? PerfectMethod::Marginals
                                                        : PerfectMethod::Both;
        const auto rep = is_perfect(seq, m, tol, check_opts.max_entries);
        r.add("perfect", rep.verdict);
        r.add("method", method);
        r.add("worst_deviation", rep.worst_deviation);
        if (rep.failing_index) r.add("failing_index", *rep.failing_index);
        ok = ok && rep.verdict;
      }
      r.add("verdict", ok);
      r.print(out, check_opts.format);
      return ok ? kOk : kCheckFailed;
    }

    if (oracle->parsed()) {
      const auto seq = load(oracle_opts);
      Report r;
      double diff = 0.0;
      if (oracle_vars.empty()) {
        diff = max_abs_diff(compose_sequence_right(seq, oracle_opts.max_entries),
                            oracle_joint(seq, oracle_opts.max_entries));
      } else {
        const auto ids = resolve(seq, oracle_vars);
        const auto res = eliminate_variables(seq, ids);
        Factor truth = oracle_joint(seq, oracle_opts.max_entries);
        for (VarId v : ids) truth = marginalize_out(truth, v);
        diff = max_abs_diff(compose_sequence_right(res.reduced, oracle_opts.max_entries), truth);
        r.add("peak_entries", res.stats.peak_entries);
      }
      const bool ok = diff <= oracle_tol;
      r.add("max_abs_diff", diff);
      r.add("worst_deviation", diff);
      r.add("verdict", ok);
      r.print(out, oracle_opts.format);
      return ok ? kOk : kCheckFailed;
    }

    if (ipfp->parsed()) {
      const auto seq = load(ipfp_opts);
      ipfp_cfg.max_entries = ipfp_opts.max_entries;
      const auto run = ipfp_run(seq, ipfp_cfg);
      Report r;
      r.add("converged", run.converged);
      r.add("cycles_used", run.cycles_used);
      r.add("cycles_run", run.per_cycle_change.size());
      r.add("last_change", run.per_cycle_change.back());
      r.add("max_marginal_mismatch", run.max_marginal_mismatch);
      emit(ipfp_opts, single(seq.registry(), run.result, "ipfp"), r, out, err);
      return run.converged ? kOk : kCheckFailed;
    }

    if (bench->parsed()) {
      const GeneratingSequence seq = bench_opts.model.empty()
                                         ? make_binary_chain(chain_length, bench_seed)
                                         : load(bench_opts);
      VarId v = 0;
      if (!bench_var.empty()) {
        v = seq.registry().id(bench_var);
      } else {
        const Scope u = seq.union_scope();
        v = u[u.size() / 2];
      }
      bench_cfg.max_entries = bench_opts.max_entries;
      const auto rep = run_locality_bench(seq, v, bench_cfg);
      Report r;
      r.add("num_vars", rep.num_vars);
      r.add("num_factors", rep.num_factors);
      r.add("variable", rep.variable);
      r.add("trials", rep.trials);
      r.add("max_entries", rep.max_entries);
      for (const auto& m : rep.methods) {
        r.add(m.name + ".ran", m.ran);
        if (!m.ran) {
          r.add(m.name + ".refused", m.refused);
          continue;
        }
        r.add(m.name + ".wall_ms", m.wall_ms);
        r.add(m.name + ".peak_entries", m.peak_entries);
        if (m.delta_vs_oracle) r.add(m.name + ".delta_vs_oracle", *m.delta_vs_oracle);
      }
      if (bench_cfg.all_interior) {
        r.add("interior.runs", rep.interior_runs);
        r.add("interior.total_ms", rep.interior_total_ms);
        r.add("interior.peak_entries", rep.interior_peak_entries);
      }
      r.add("peak_entries", rep.methods.front().peak_entries);
      r.print(out, bench_opts.format);
      return kOk;
    }

    if (gen->parsed()) {
      fixture.structure = structure == "independent" ? FixtureStructure::Independent
                          : structure == "chain"     ? FixtureStructure::Chain
                                                     : FixtureStructure::Random;
      const auto seq = gen_kind == "perfect" ? gen_perfect_fixture(fixture)
                                             : gen_nonperfect_fixture(fixture, magnitude);
      const std::string text = serialize_model(seq);
      if (gen_opts.out.empty()) {
        out << text;
      } else {
        write_text_file(gen_opts.out, text);
      }
      return kOk;
    }
  } catch (const DominanceError& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    if (e.step()) err << "failing_step=" << *e.step() << '\n';
    return kError;
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return kError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}

}  // namespace cpm::cli
