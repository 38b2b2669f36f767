#include "cpm/sequence.hpp"

#include <algorithm>
#include <random>

#include "cpm/oracle.hpp"

namespace cpm {

// ---------------------------------------------------------------------------
// GeneratingSequence

void GeneratingSequence::add(Factor factor, std::string name) {
  const auto expected = cards_of(factor.scope(), registry_);
  if (!std::equal(expected.begin(), expected.end(), factor.cards().begin(),
                  factor.cards().end())) {
    throw Error(ErrorKind::CardinalityMismatch,
                "factor layout " + describe(factor.scope(), &registry_) +
                    " disagrees with the registry");
  }
  if (name.empty()) name = "P" + std::to_string(factors_.size() + 1);
  factors_.push_back(std::move(factor));
  names_.push_back(std::move(name));
}

Scope GeneratingSequence::union_scope() const {
  Scope s;
  for (const auto& f : factors_) s = s.unite(f.scope());
  return s;
}

std::vector<std::size_t> GeneratingSequence::union_cards() const {
  return cards_of(union_scope(), registry_);
}

// ---------------------------------------------------------------------------
// Chains

namespace {

void require_nonempty(const GeneratingSequence& seq) {
  if (seq.empty()) {
    throw Error(ErrorKind::InvalidArgument, "generating sequence has no factors");
  }
}

template <class Op>
Factor fold_chain(const GeneratingSequence& seq, std::size_t max_entries, Op op) {
  require_nonempty(seq);
  checked_volume(seq.union_cards(), max_entries);
  Factor acc = seq[0];
  for (std::size_t k = 1; k < seq.size(); ++k) {
    try {
      acc = op(acc, seq[k]);
    } catch (const DominanceError& e) {
      throw e.at_step(k + 1);
    }
  }
  return acc;
}

}  // namespace

Factor compose_sequence_right(const GeneratingSequence& seq, std::size_t max_entries) {
  return fold_chain(seq, max_entries,
                    [](const Factor& a, const Factor& b) { return compose_right(a, b); });
}

Factor compose_sequence_left(const GeneratingSequence& seq, std::size_t max_entries) {
  return fold_chain(seq, max_entries,
                    [](const Factor& a, const Factor& b) { return compose_left(a, b); });
}

Factor oracle_joint(const GeneratingSequence& seq, std::size_t max_entries) {
  require_nonempty(seq);
  return oracle_joint(std::span<const Factor>(seq.factors()), max_entries);
}

// ---------------------------------------------------------------------------
// Perfectness

namespace {

PerfectnessReport check_by_definition(const GeneratingSequence& seq, const Tolerance& tol) {
  PerfectnessReport report;
  report.method = PerfectMethod::Definition;
  Factor right = seq[0];
  Factor left = seq[0];
  for (std::size_t k = 1; k < seq.size(); ++k) {
    try {
      right = compose_right(right, seq[k]);
      left = compose_left(left, seq[k]);
    } catch (const DominanceError& e) {
      throw e.at_step(k + 1);
    }
    const double dev = max_abs_diff(right, left);
    report.worst_deviation = std::max(report.worst_deviation, dev);
    if (dev > tol.eq_tol && !report.failing_index) report.failing_index = k + 1;
  }
  report.verdict = report.worst_deviation <= tol.eq_tol;
  return report;
}

PerfectnessReport check_by_marginals(const GeneratingSequence& seq, const Tolerance& tol,
                                     std::size_t max_entries) {
  PerfectnessReport report;
  report.method = PerfectMethod::Marginals;
  const Factor joint = compose_sequence_right(seq, max_entries);
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const double dev = max_abs_diff(seq[k], marginal(joint, seq[k].scope()));
    report.worst_deviation = std::max(report.worst_deviation, dev);
    if (dev > tol.eq_tol && !report.failing_index) report.failing_index = k + 1;
  }
  report.verdict = report.worst_deviation <= tol.eq_tol;
  return report;
}

}  // namespace

PerfectnessReport is_perfect(const GeneratingSequence& seq, PerfectMethod method,
                             const Tolerance& tol, std::size_t max_entries) {
  tol.validate();
  require_nonempty(seq);
  checked_volume(seq.union_cards(), max_entries);

  switch (method) {
    case PerfectMethod::Definition:
      return check_by_definition(seq, tol);
    case PerfectMethod::Marginals:
      return check_by_marginals(seq, tol, max_entries);
    case PerfectMethod::Both:
      break;
  }

  const auto def = check_by_definition(seq, tol);
  const auto mar = check_by_marginals(seq, tol, max_entries);
  if (def.verdict != mar.verdict) {
    throw Error(ErrorKind::CheckDisagreement,
                "definition and marginals checks disagree (deviations " +
                    std::to_string(def.worst_deviation) + " vs " +
                    std::to_string(mar.worst_deviation) + ")");
  }
  PerfectnessReport report;
  report.method = PerfectMethod::Both;
  report.verdict = def.verdict;
  report.worst_deviation = std::max(def.worst_deviation, mar.worst_deviation);
  if (def.failing_index && mar.failing_index) {
    report.failing_index = std::min(*def.failing_index, *mar.failing_index);
  } else {
    report.failing_index = def.failing_index ? def.failing_index : mar.failing_index;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Elimination

EliminationResult eliminate_variable(const GeneratingSequence& seq, VarId v,
                                     bool keep_residual) {
  require_nonempty(seq);
  const auto& factors = seq.factors();

  std::vector<Factor> emitted = factors;
  EliminationResult result;
  auto& stats = result.stats;
  Trace trace;

  Scope prefix;  // K1 ∪ ... ∪ K(i-1)
  std::optional<Factor> acc;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const Factor& p = factors[i];
    if (p.scope().contains(v)) {
      if (!acc) {
        acc = p;
      } else {
        try {
          acc = anticipate(*acc, p, prefix.without(v), AuxChoice::OwnMarginal, &trace);
        } catch (const DominanceError& e) {
          throw e.at_step(i + 1);
        }
      }
      emitted[i] = marginalize_out(*acc, v);
      trace.record(emitted[i]);
      stats.touched.push_back(i);
      stats.fill_in.push_back(emitted[i].scope().minus(p.scope()).size());
    }
    prefix = prefix.unite(p.scope());
  }

  if (!acc) {
    const std::string name =
        v < seq.registry().size() ? seq.registry().name(v) : "#" + std::to_string(v);
    throw Error(ErrorKind::VariableAbsent,
                "variable '" + name + "' occurs in no factor of the sequence");
  }

  result.reduced = GeneratingSequence(seq.registry());
  for (std::size_t i = 0; i < emitted.size(); ++i) {
    result.reduced.add(std::move(emitted[i]), seq.names()[i]);
  }
  if (keep_residual) result.residual = std::move(acc);

  stats.peak_entries = trace.peak_entries;
  stats.intermediate_scope = trace.touched;
  stats.touched_count = stats.touched.size();
  stats.rounds = 1;
  return result;
}

EliminationResult eliminate_variables(const GeneratingSequence& seq,
                                      const std::vector<VarId>& vars, bool ignore_missing) {
  require_nonempty(seq);
  EliminationResult acc;
  acc.reduced = seq;
  for (VarId v : vars) {
    if (ignore_missing && !acc.reduced.union_scope().contains(v)) continue;
    EliminationResult round = eliminate_variable(acc.reduced, v, false);
    auto& s = acc.stats;
    s.peak_entries = std::max(s.peak_entries, round.stats.peak_entries);
    s.touched_count += round.stats.touched_count;
    std::vector<std::size_t> merged;
    std::set_union(s.touched.begin(), s.touched.end(), round.stats.touched.begin(),
                   round.stats.touched.end(), std::back_inserter(merged));
    s.touched = std::move(merged);
    s.intermediate_scope = s.intermediate_scope.unite(round.stats.intermediate_scope);
    s.fill_in.insert(s.fill_in.end(), round.stats.fill_in.begin(),
                     round.stats.fill_in.end());
    ++s.rounds;
    acc.reduced = std::move(round.reduced);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Fixtures

namespace {

struct Network {
  VariableRegistry registry;
  std::vector<Scope> families;  // cl(Xj) = {Xj} ∪ pa(Xj)
  std::vector<Scope> parents;
};

Network random_network(const FixtureOptions& opts, std::mt19937_64& rng) {
  if (opts.num_vars < 1) throw Error(ErrorKind::InvalidArgument, "num_vars must be >= 1");
  if (opts.max_card < 1) throw Error(ErrorKind::InvalidArgument, "max_card must be >= 1");

  Network net;
  const std::size_t lo = std::min<std::size_t>(2, opts.max_card);
  std::uniform_int_distribution<std::size_t> card(lo, opts.max_card);
  for (std::size_t j = 0; j < opts.num_vars; ++j) {
    net.registry.add("X" + std::to_string(j + 1), card(rng));
  }

  for (std::size_t j = 0; j < opts.num_vars; ++j) {
    std::vector<VarId> pa;
    switch (opts.structure) {
      case FixtureStructure::Independent:
        break;
      case FixtureStructure::Chain:
        if (j > 0) pa.push_back(static_cast<VarId>(j - 1));
        break;
      case FixtureStructure::Random:
        if (j > 0) {
          std::vector<VarId> earlier(j);
          for (std::size_t i = 0; i < j; ++i) earlier[i] = static_cast<VarId>(i);
          std::shuffle(earlier.begin(), earlier.end(), rng);
          std::uniform_int_distribution<std::size_t> count(1, std::min<std::size_t>(j, 2));
          pa.assign(earlier.begin(), earlier.begin() + count(rng));
        }
        break;
    }
    Scope parents = Scope::from_unsorted(pa);
    net.families.push_back(parents.unite(Scope{static_cast<VarId>(j)}));
    net.parents.push_back(std::move(parents));
  }
  return net;
}

Factor random_positive(const Scope& scope, std::vector<std::size_t> cards,
                       std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> values(checked_volume(cards));
  double total = 0.0;
  for (auto& x : values) total += (x = u(rng));
  for (auto& x : values) x /= total;
  return Factor::assume_normalized(Table(scope, std::move(cards), std::move(values)));
}

}  // namespace

GeneratingSequence gen_perfect_fixture(const FixtureOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  Network net = random_network(opts, rng);

  Scope all;
  for (const auto& f : net.families) all = all.unite(f);
  const Factor q = random_positive(all, cards_of(all, net.registry), rng);

  // B = prod_j Q(Xj | pa(Xj))
  Table b = Table::filled(all, cards_of(all, net.registry), 1.0);
  for (std::size_t j = 0; j < net.families.size(); ++j) {
    const Table conditional =
        divide_by_marginal(marginal(q.table(), net.families[j]),
                           marginal(q.table(), net.parents[j]));
    b = multiply(b, conditional);
  }

  GeneratingSequence seq(net.registry);
  for (const auto& family : net.families) {
    seq.add(Factor::assume_normalized(marginal(b, family)));
  }
  return seq;
}

GeneratingSequence gen_nonperfect_fixture(const FixtureOptions& opts, double magnitude) {
  if (magnitude < 0.0 || magnitude > 1.0) {
    throw Error(ErrorKind::InvalidArgument, "perturbation magnitude must be in [0, 1]");
  }
  const GeneratingSequence base = gen_perfect_fixture(opts);
  std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<std::size_t> eligible;
  Scope prefix = base[0].scope();
  for (std::size_t k = 1; k < base.size(); ++k) {
    const Scope shared = base[k].scope().intersect(prefix);
    if (checked_volume(cards_of(shared, base.registry())) > 1) eligible.push_back(k);
    prefix = prefix.unite(base[k].scope());
  }
  if (eligible.empty()) {
    throw Error(ErrorKind::InvalidArgument,
                "no factor shares variables with its predecessors; cannot break perfectness");
  }
  const std::size_t k = eligible[std::uniform_int_distribution<std::size_t>(
      0, eligible.size() - 1)(rng)];

  Scope before;
  for (std::size_t i = 0; i < k; ++i) before = before.unite(base[i].scope());
  const Factor& target = base[k];
  const Scope shared = target.scope().intersect(before);

  // Pick two entries whose shared-variable configurations differ.
  const Table& t = target.table();
  std::vector<std::size_t> shared_dims;
  for (VarId v : shared) shared_dims.push_back(*target.scope().position(v));
  auto shared_key = [&](std::size_t index) {
    auto cfg = t.config_of(index);
    std::vector<std::size_t> key;
    for (auto d : shared_dims) key.push_back(cfg[d]);
    return key;
  };
  std::uniform_int_distribution<std::size_t> pick(0, t.size() - 1);
  const std::size_t a = pick(rng);
  std::size_t b = pick(rng);
  while (shared_key(b) == shared_key(a)) b = (b + 1) % t.size();

  std::vector<double> values(t.values().begin(), t.values().end());
  const double delta = magnitude * std::min(values[a], values[b]);
  values[a] += delta;
  values[b] -= delta;

  GeneratingSequence seq(base.registry());
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (i == k) {
      seq.add(Factor::from_table(
          Table(t.scope(), std::vector<std::size_t>(t.cards().begin(), t.cards().end()),
                std::move(values))));
    } else {
      seq.add(base[i]);
    }
  }
  return seq;
}

}  // namespace cpm
