#include <doctest.h>

#include "cpm/sequence.hpp"
#include "testing.hpp"

using namespace cpm;
using namespace cpm::testing;

namespace {

GeneratingSequence make_seq(const VariableRegistry& reg, const std::vector<Factor>& fs) {
  GeneratingSequence s(reg);
  for (const auto& f : fs) s.add(f);
  return s;
}

VariableRegistry binary(std::size_t n) { return registry_of(std::vector<std::size_t>(n, 2)); }

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an exception");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("GeneratingSequence rejects layouts that disagree with the registry") {
  const auto reg = binary(2);
  GeneratingSequence seq(reg);
  const Table wide(Scope{0}, {3}, {0.2, 0.3, 0.5});
  CHECK(kind_of([&] { seq.add(Factor::from_table(wide)); }) == ErrorKind::CardinalityMismatch);
  seq.add(make_factor(Scope{1}, {0.5, 0.5}, reg));
  CHECK(seq.names() == std::vector<std::string>{"P1"});
  CHECK(seq.union_scope() == Scope{1});
}

TEST_CASE("compose_sequence_right") {
  const auto reg = binary(6);
  Rng rng(21);
  SUBCASE("single factor") {
    const Factor p = random_factor(Scope{0, 1}, reg, rng);
    CHECK(compose_sequence_right(make_seq(reg, {p})) == p);
  }
  SUBCASE("P1(X1) ▷ P2(X2) ▷ P3(X1,X2) = P1(X1) P2(X2)") {
    const Factor p1 = random_factor(Scope{0}, reg, rng);
    const Factor p2 = random_factor(Scope{1}, reg, rng);
    const Factor p3 = random_factor(Scope{0, 1}, reg, rng);
    const Factor j = compose_sequence_right(make_seq(reg, {p1, p2, p3}));
    const Table prod = multiply(p1.table(), p2.table());
    CHECK(max_abs_diff(j.table(), prod) <= 1e-15);
  }
  SUBCASE("random sequences match the oracle") {
    const Scope pool = all_vars(reg);
    for (int t = 0; t < 50; ++t) {
      std::vector<Factor> fs;
      for (int k = 0; k < 4; ++k) fs.push_back(random_factor(random_subset(rng, pool, 1, 3), reg, rng));
      const auto seq = make_seq(reg, fs);
      CHECK(max_abs_diff(compose_sequence_right(seq), oracle_joint(seq)) <= 1e-10);
    }
  }
  SUBCASE("dominance failure carries the step") {
    const auto seq =
        make_seq(reg, {random_factor(Scope{0}, reg, rng), random_factor(Scope{1, 2}, reg, rng),
                       make_factor(Scope{2, 3}, {0.5, 0.5, 0.0, 0.0}, reg)});
    try {
      compose_sequence_right(seq);
      FAIL("expected DominanceError");
    } catch (const DominanceError& e) {
      REQUIRE(e.step());
      CHECK(*e.step() == 3);
    }
  }
  SUBCASE("ceiling") {
    const auto seq = make_seq(reg, {random_factor(Scope{0, 1, 2}, reg, rng)});
    CHECK(kind_of([&] { compose_sequence_right(seq, 7); }) == ErrorKind::TooLarge);
  }
}

TEST_CASE("compose_sequence_left") {
  const auto reg = binary(3);
  Rng rng(23);
  const Factor p = random_factor(Scope{0, 1}, reg, rng);
  CHECK(compose_sequence_left(make_seq(reg, {p})) == p);

  const auto perfect = gen_perfect_fixture({.seed = 4, .num_vars = 4, .max_card = 3,
                                            .structure = FixtureStructure::Chain});
  CHECK(max_abs_diff(compose_sequence_left(perfect), compose_sequence_right(perfect)) <= 1e-10);

  const Factor p1 = random_factor(Scope{0, 1}, reg, rng);
  const Factor p2 = perturb_on(random_factor(Scope{1, 2}, reg, rng), Scope{1}, 0.5);
  const auto pair = make_seq(reg, {p1, p2});
  CHECK(max_abs_diff(compose_sequence_left(pair), compose_sequence_right(pair)) > 1e-9);
}

TEST_CASE("is_perfect") {
  const auto reg = binary(3);
  Rng rng(25);
  SUBCASE("disjoint factors") {
    const auto seq = make_seq(reg, {random_factor(Scope{0}, reg, rng),
                                    random_factor(Scope{1, 2}, reg, rng)});
    const auto r = is_perfect(seq);
    CHECK(r.verdict);
    CHECK(r.worst_deviation <= 1e-15);
    CHECK_FALSE(r.failing_index);
  }
  SUBCASE("Bayesian-network fixture passes both methods") {
    const auto seq = gen_perfect_fixture({.seed = 8, .num_vars = 5});
    CHECK(is_perfect(seq, PerfectMethod::Definition).verdict);
    CHECK(is_perfect(seq, PerfectMethod::Marginals).verdict);
    CHECK(is_perfect(seq, PerfectMethod::Both).verdict);
  }
  SUBCASE("inconsistent pair fails at index 2") {
    const Factor p1 = random_factor(Scope{0, 1}, reg, rng);
    const Factor p2 = perturb_on(random_factor(Scope{1, 2}, reg, rng), Scope{1}, 0.5);
    const auto seq = make_seq(reg, {p1, p2});
    for (auto m : {PerfectMethod::Definition, PerfectMethod::Marginals, PerfectMethod::Both}) {
      const auto r = is_perfect(seq, m);
      CHECK_FALSE(r.verdict);
      REQUIRE(r.failing_index);
      CHECK(*r.failing_index == 2);
    }
  }
  SUBCASE("ceiling") {
    const auto seq = gen_perfect_fixture({.seed = 1, .num_vars = 4, .max_card = 2});
    CHECK(kind_of([&] { is_perfect(seq, PerfectMethod::Both, {}, 8); }) == ErrorKind::TooLarge);
  }
}

TEST_CASE("eliminate_variable") {
  Rng rng(31);
  SUBCASE("variable in a single factor: only that factor is summed") {
    const auto reg = binary(3);
    const Factor p1 = random_factor(Scope{0, 1}, reg, rng);
    const Factor p2 = random_factor(Scope{1, 2}, reg, rng);
    const auto seq = make_seq(reg, {p1, p2});
    const auto r = eliminate_variable(seq, 2);
    CHECK(r.reduced[0] == p1);
    CHECK(r.reduced[1] == marginalize_out(p2, 2));
    CHECK(r.stats.touched == std::vector<std::size_t>{1});
    CHECK(max_abs_diff(compose_sequence_right(r.reduced),
                       marginalize_out(oracle_joint(seq), 2)) <= 1e-12);
  }
  SUBCASE("the four-variable example: eliminate X1 from P1(X1,X3), P2(X2), P3(X1..X4)") {
    const auto reg = binary(4);
    const Factor p1 = random_factor(Scope{0, 2}, reg, rng);
    const Factor p2 = random_factor(Scope{1}, reg, rng);
    const Factor p3 = random_factor(Scope{0, 1, 2, 3}, reg, rng);
    const auto seq = make_seq(reg, {p1, p2, p3});
    const auto r = eliminate_variable(seq, 0, true);

    CHECK(r.reduced[0] == marginalize_out(p1, 0));
    CHECK(r.reduced[1] == p2);
    const Factor q3 = marginalize_out(anticipate(p1, p3, Scope{1, 2}), 0);
    CHECK(max_abs_diff(r.reduced[2], q3) <= 1e-15);
    CHECK(r.stats.touched == std::vector<std::size_t>{0, 2});

    const Factor truth = oracle_joint(seq);
    CHECK(max_abs_diff(compose_sequence_right(r.reduced), marginalize_out(truth, 0)) <= 1e-10);
    REQUIRE(r.residual);
    CHECK(max_abs_diff(compose_sequence_right(appended(r.reduced, *r.residual)), truth) <=
          1e-10);

    // Closed form: P2(X2) · (P1(X1,X3) P3(X4 | X1,X2,X3)) summed over X1.
    const Table p3_cond =
        divide_by_marginal(p3.table(), marginal(p3.table(), Scope{0, 1, 2}));
    const Table inner = marginal(multiply(p1.table(), p3_cond), Scope{1, 2, 3});
    const Table closed = multiply(p2.table(), inner);
    CHECK(max_abs_diff(compose_sequence_right(r.reduced).table(), closed) <= 1e-10);
  }
  SUBCASE("absent variable") {
    const auto reg = binary(3);
    const auto seq = make_seq(reg, {random_factor(Scope{0, 1}, reg, rng)});
    CHECK(kind_of([&] { eliminate_variable(seq, 2); }) == ErrorKind::VariableAbsent);
  }
  SUBCASE("untouched factors are copied and ℓ disappears") {
    for (int t = 0; t < 60; ++t) {
      const auto seq = random_sequence(rng, 5, 6, 4);
      for (VarId v : shared_vars(seq)) {
        const auto r = eliminate_variable(seq, v, true);
        Scope touched_union;
        for (std::size_t i = 0; i < seq.size(); ++i) {
          CHECK_FALSE(r.reduced[i].scope().contains(v));
          if (seq[i].scope().contains(v)) {
            touched_union = touched_union.unite(seq[i].scope());
          } else {
            CHECK(r.reduced[i] == seq[i]);
          }
        }
        CHECK(r.stats.intermediate_scope.is_subset_of(touched_union));
        const Factor truth = oracle_joint(seq);
        CHECK(max_abs_diff(compose_sequence_right(r.reduced), marginalize_out(truth, v)) <= 1e-9);
        CHECK(max_abs_diff(compose_sequence_right(appended(r.reduced, *r.residual)), truth) <=
              1e-9);
      }
    }
  }
}

TEST_CASE("eliminate_variables") {
  Rng rng(37);
  const auto reg = binary(5);
  std::vector<Factor> fs;
  for (VarId k = 0; k + 1 < 5; ++k) fs.push_back(random_factor(Scope{k, k + 1}, reg, rng));
  const auto chain = make_seq(reg, fs);

  CHECK(eliminate_variables(chain, {}).reduced == chain);

  const Factor truth = marginalize_out(marginalize_out(oracle_joint(chain), 1), 3);
  const auto a = eliminate_variables(chain, {1, 3});
  const auto b = eliminate_variables(chain, {3, 1});
  CHECK(a.stats.rounds == 2);
  CHECK(max_abs_diff(compose_sequence_right(a.reduced), truth) <= 1e-9);
  CHECK(max_abs_diff(compose_sequence_right(b.reduced), truth) <= 1e-9);

  CHECK(kind_of([&] { eliminate_variables(chain, {1, 1}); }) == ErrorKind::VariableAbsent);
  CHECK(eliminate_variables(chain, {1, 1}, true).stats.rounds == 1);
}

TEST_CASE("fixture generators") {
  SUBCASE("one variable") {
    const auto seq = gen_perfect_fixture({.seed = 2, .num_vars = 1});
    CHECK(seq.size() == 1);
    CHECK(is_perfect(seq).verdict);
  }
  SUBCASE("no parents: joint is the product of the marginals") {
    const auto seq = gen_perfect_fixture(
        {.seed = 3, .num_vars = 4, .structure = FixtureStructure::Independent});
    for (const auto& f : seq.factors()) CHECK(f.scope().size() == 1);
    CHECK(is_perfect(seq).verdict);
  }
  SUBCASE("ternary chain of five") {
    const auto seq = gen_perfect_fixture(
        {.seed = 4, .num_vars = 5, .max_card = 3, .structure = FixtureStructure::Chain});
    CHECK(is_perfect(seq, PerfectMethod::Definition).verdict);
    CHECK(is_perfect(seq, PerfectMethod::Marginals).verdict);
  }
  SUBCASE("deterministic in the seed") {
    CHECK(gen_perfect_fixture({.seed = 5}) == gen_perfect_fixture({.seed = 5}));
    CHECK_FALSE(gen_perfect_fixture({.seed = 5}) == gen_perfect_fixture({.seed = 6}));
  }
  SUBCASE("zero perturbation stays perfect") {
    CHECK(is_perfect(gen_nonperfect_fixture({.seed = 7}, 0.0)).verdict);
  }
  SUBCASE("perturbed fixtures fail and both checkers agree") {
    const Tolerance tol;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      const auto seq = gen_nonperfect_fixture({.seed = seed, .num_vars = 5});
      const auto def = is_perfect(seq, PerfectMethod::Definition);
      const auto mar = is_perfect(seq, PerfectMethod::Marginals);
      CHECK_FALSE(def.verdict);
      CHECK(def.verdict == mar.verdict);
      CHECK(mar.worst_deviation > 10 * tol.eq_tol);
    }
  }
  SUBCASE("independent structure cannot be made non-perfect") {
    CHECK(kind_of([] {
            gen_nonperfect_fixture({.seed = 1, .structure = FixtureStructure::Independent});
          }) == ErrorKind::InvalidArgument);
  }
}

TEST_CASE("marginal of a composition") {
  Rng rng(41);
  const auto reg = binary(3);
  SUBCASE("L containing the shared variables commutes with ▷") {
    const Scope pool = all_vars(reg);
    for (int t = 0; t < 100; ++t) {
      const Factor p1 = random_factor(random_subset(rng, pool, 1, 3), reg, rng);
      const Factor p2 = random_factor(random_subset(rng, pool, 1, 3), reg, rng);
      const Scope l = p1.scope().intersect(p2.scope()).unite(random_subset(rng, pool, 0, 3));
      CHECK(max_abs_diff(marginal(compose_right(p1, p2), l),
                         compose_right(marginal(p1, l), marginal(p2, l))) <= 1e-10);
    }
  }
  SUBCASE("dropping the shared variable does not") {
    const Factor p1 = make_factor(Scope{0, 1}, {0.4, 0.1, 0.1, 0.4}, reg);
    const Factor p2 = make_factor(Scope{1, 2}, {0.4, 0.1, 0.1, 0.4}, reg);
    const Scope l{0, 2};
    CHECK(max_abs_diff(marginal(compose_right(p1, p2), l),
                       compose_right(marginal(p1, l), marginal(p2, l))) > 1e-3);
  }
}
