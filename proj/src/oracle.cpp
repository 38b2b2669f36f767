#include "cpm/oracle.hpp"

#include <algorithm>
#include <map>

namespace cpm {

namespace {

// Linear index of `factor` at the global assignment `x`, where `where[d]` is
// the position of factor dimension d in the global scope.
std::size_t local_index(const std::vector<std::size_t>& where,
                        std::span<const std::size_t> cards,
                        const std::vector<std::size_t>& x) {
  std::size_t idx = 0;
  for (std::size_t d = 0; d < where.size(); ++d) idx = idx * cards[d] + x[where[d]];
  return idx;
}

}  // namespace

Factor oracle_joint(std::span<const Factor> factors, std::size_t max_entries) {
  if (factors.empty()) {
    throw Error(ErrorKind::InvalidArgument, "oracle_joint needs at least one factor");
  }

  // Global scope and cardinalities, collected with an ordered map.
  std::map<VarId, std::size_t> card_of;
  for (const auto& f : factors) {
    for (std::size_t d = 0; d < f.scope().size(); ++d) {
      auto [it, inserted] = card_of.emplace(f.scope()[d], f.cards()[d]);
      if (!inserted && it->second != f.cards()[d]) {
        throw Error(ErrorKind::CardinalityMismatch,
                    "variable #" + std::to_string(f.scope()[d]) +
                        " has conflicting cardinalities");
      }
    }
  }
  std::vector<VarId> vars;
  std::vector<std::size_t> cards;
  for (auto [v, c] : card_of) {
    vars.push_back(v);
    cards.push_back(c);
  }
  const std::size_t total = checked_volume(cards, max_entries);
  auto global_pos = [&](VarId v) {
    return static_cast<std::size_t>(std::lower_bound(vars.begin(), vars.end(), v) -
                                     vars.begin());
  };

  const std::size_t n = factors.size();
  std::vector<std::vector<std::size_t>> where(n);
  // Denominator of step k: Pk summed down to the variables seen before step k.
  std::vector<std::vector<std::size_t>> den_where(n);
  std::vector<std::vector<std::size_t>> den_cards(n);
  std::vector<std::vector<double>> den(n);

  std::vector<bool> seen(vars.size(), false);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& f = factors[k];
    std::vector<std::size_t> keep_dims;
    for (std::size_t d = 0; d < f.scope().size(); ++d) {
      const std::size_t g = global_pos(f.scope()[d]);
      where[k].push_back(g);
      if (seen[g]) {
        keep_dims.push_back(d);
        den_where[k].push_back(g);
        den_cards[k].push_back(f.cards()[d]);
      }
    }
    std::size_t den_size = 1;
    for (auto c : den_cards[k]) den_size *= c;
    den[k].assign(den_size, 0.0);

    const auto vals = f.values();
    std::vector<std::size_t> cfg(f.scope().size());
    for (std::size_t i = 0; i < vals.size(); ++i) {
      std::size_t rest = i;
      for (std::size_t d = cfg.size(); d-- > 0;) {
        cfg[d] = rest % f.cards()[d];
        rest /= f.cards()[d];
      }
      std::size_t j = 0;
      for (auto d : keep_dims) j = j * f.cards()[d] + cfg[d];
      den[k][j] += vals[i];
    }
    for (auto g : where[k]) seen[g] = true;
  }

  std::vector<double> out(total);
  std::vector<std::size_t> x(vars.size());
  std::size_t first_failure = n;
  std::vector<std::size_t> failure_witness;
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rest = i;
    for (std::size_t d = x.size(); d-- > 0;) {
      x[d] = rest % cards[d];
      rest /= cards[d];
    }
    double value = factors[0].values()[local_index(where[0], factors[0].cards(), x)];
    for (std::size_t k = 1; k < n; ++k) {
      const double d = den[k][local_index(den_where[k], den_cards[k], x)];
      if (d == 0.0) {
        // The prefix puts mass where Pk has none on the shared variables.
        if (value > 0.0 && k < first_failure) {
          first_failure = k;
          failure_witness.clear();
          for (auto g : den_where[k]) failure_witness.push_back(x[g]);
        }
        value = 0.0;
        continue;
      }
      value *= factors[k].values()[local_index(where[k], factors[k].cards(), x)] / d;
    }
    out[i] = value;
  }

  if (first_failure < n) {
    std::vector<std::size_t> inter;
    for (auto g : den_where[first_failure]) inter.push_back(vars[g]);
    throw DominanceError("oracle: composition undefined at step " +
                             std::to_string(first_failure + 1),
                         std::move(inter), std::move(failure_witness), first_failure + 1);
  }

  Scope scope = Scope::from_unsorted(vars);
  return Factor::assume_normalized(Table(std::move(scope), std::move(cards), std::move(out)));
}

}  // namespace cpm
