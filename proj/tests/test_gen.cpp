#include "doctest.h"

#include <set>

#include "ksat/cnf.hpp"
#include "ksat/gen.hpp"
#include "ksat/keytrace.hpp"

using namespace ksat;

TEST_CASE("generate_planted output is satisfied by the plant") {
  GenSpec spec;
  spec.num_vars = 10;
  spec.seed = 7;
  auto [f, planted] = generate_planted(spec);
  CHECK(evaluate(f, planted) == Eval::Satisfied);
  CHECK(f.clauses.size() >= 41);  // round(r*10), r in [4.1, 4.4]
  CHECK(f.clauses.size() <= 44);
}

TEST_CASE("generate_planted clause count is round(r*n)") {
  GenSpec spec;
  spec.num_vars = 3;
  spec.ratio_min = 4.1;
  spec.ratio_max = 4.1;
  spec.seed = 1;
  auto [f, planted] = generate_planted(spec);
  CHECK(f.clauses.size() == 12);  // round(12.3)
  for (const Clause& c : f.clauses) {
    REQUIRE(c.size() == 3);
    std::set<int> vars;
    for (Literal l : c) vars.insert(l.var());
    CHECK(vars.size() == 3);
  }
}

TEST_CASE("generate_planted is deterministic per seed") {
  GenSpec spec;
  spec.num_vars = 20;
  spec.seed = 42;
  auto [f1, p1] = generate_planted(spec);
  auto [f2, p2] = generate_planted(spec);
  CHECK(write_dimacs(f1) == write_dimacs(f2));
  CHECK(p1 == p2);

  spec.seed = 43;
  auto [f3, p3] = generate_planted(spec);
  CHECK(write_dimacs(f1) != write_dimacs(f3));
}

TEST_CASE("generate_planted respects width, distinctness, and ratio bounds") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    GenSpec spec;
    spec.num_vars = 5 + static_cast<int>(seed % 30);
    spec.seed = 1000 + seed;
    auto [f, planted] = generate_planted(spec);
    CHECK(evaluate(f, planted) == Eval::Satisfied);
    double n = spec.num_vars;
    double m = static_cast<double>(f.clauses.size());
    CHECK(m >= 4.1 * n - 0.5);
    CHECK(m <= 4.4 * n + 0.5);
    for (const Clause& c : f.clauses) {
      REQUIRE(c.size() == 3);
      std::set<int> vars;
      for (Literal l : c) vars.insert(l.var());
      CHECK(vars.size() == 3);
    }
  }
}

TEST_CASE("generate_planted validates its spec") {
  GenSpec bad;
  bad.num_vars = 2;
  CHECK_THROWS_AS(generate_planted(bad), std::invalid_argument);
  bad.num_vars = 5;
  bad.ratio_min = 4.5;
  bad.ratio_max = 4.1;
  CHECK_THROWS_AS(generate_planted(bad), std::invalid_argument);
}

TEST_CASE("permute: identity leaves the formula unchanged") {
  Formula f = parse_dimacs("p cnf 4 3\n1 -3 4 0\n-1 2 3 0\n-2 -3 -4 0\n");
  CHECK(permute(f, VariablePermutation::identity(4)) == f);
}

TEST_CASE("permute: swapping x1 and x2 relabels the worked example") {
  Formula f = parse_dimacs("p cnf 4 3\n1 -3 4 0\n-1 2 3 0\n-2 -3 -4 0\n");
  VariablePermutation swap12({2, 1, 3, 4});
  Formula g = permute(f, swap12);
  CHECK(g.clauses[0].literals() == std::vector<Literal>{Literal(2), Literal(-3), Literal(4)});
  CHECK(g.clauses[1].literals() == std::vector<Literal>{Literal(-2), Literal(1), Literal(3)});
  CHECK(g.clauses[2].literals() == std::vector<Literal>{Literal(-1), Literal(-3), Literal(-4)});
}

TEST_CASE("permute preserves the brute-force verdict") {
  SplitMix64 rng(5150);
  for (int trial = 0; trial < 200; ++trial) {
    Formula f;
    f.num_vars = 4 + static_cast<int>(rng.below(7));
    auto m = rng.below(35);
    for (std::uint64_t c = 0; c < m; ++c) {
      std::vector<Literal> lits;
      for (int j = 0; j < 3; ++j) {
        int v = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(f.num_vars)));
        lits.push_back(Literal(rng.coin() ? v : -v));
      }
      f.clauses.emplace_back(std::move(lits));
    }
    VariablePermutation p = VariablePermutation::random(f.num_vars, rng);
    CHECK(brute_force_solve(f).has_value() == brute_force_solve(permute(f, p)).has_value());
  }
}

TEST_CASE("permutation validation") {
  CHECK_THROWS_AS(VariablePermutation({1, 1, 3}), std::invalid_argument);
  CHECK_THROWS_AS(VariablePermutation({0, 1, 2}), std::invalid_argument);
  Formula f;
  f.num_vars = 5;
  CHECK_THROWS_AS(permute(f, VariablePermutation::identity(3)), std::invalid_argument);
}

TEST_CASE("permute_trace relabels literals only") {
  KeyTrace k;
  k.events = {{Tag::D, Literal(-4), 0},
              {Tag::D, Literal(1), 1},
              {Tag::D, Literal(2), 2},
              {Tag::A, Literal(-3), 2}};

  CHECK(permute_trace(k, VariablePermutation::identity(4)) == k);

  KeyTrace g = permute_trace(k, VariablePermutation({2, 1, 3, 4}));
  CHECK(g.decisions() == std::vector<Literal>{Literal(-4), Literal(2), Literal(1)});
  CHECK(g.events[3] == TrailEvent{Tag::A, Literal(-3), 2});
}

TEST_CASE("replaying a permuted trace on the permuted formula matches") {
  // Count equality is structural for pure replays (every decision accepted
  // from the trace). Once a replay falls back to VSIDS, the index tie-break
  // is not permutation-equivariant, so those runs only promise verdicts.
  auto is_prefix = [](const std::vector<Literal>& xs, const std::vector<Literal>& of) {
    if (xs.size() > of.size()) return false;
    return std::equal(xs.begin(), xs.end(), of.begin());
  };
  auto trail_decisions = [](const Trail& t) {
    std::vector<Literal> ds;
    for (const TrailEvent& e : t.events)
      if (e.tag == Tag::D) ds.push_back(e.lit);
    return ds;
  };

  SolverConfig cfg;
  int pure = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    GenSpec spec;
    spec.num_vars = 12;
    spec.seed = 900 + seed;
    auto [f, planted] = generate_planted(spec);
    Result base = solve(f, cfg);
    KeyTrace k = extract_keytrace(base.trail);

    SplitMix64 rng(seed);
    VariablePermutation p = VariablePermutation::random(f.num_vars, rng);
    KeyTrace pk = permute_trace(k, p);
    Result a = replay(f, k, cfg);
    Result b = replay(permute(f, p), pk, cfg);
    CHECK((a.stats.outcome == b.stats.outcome));
    CHECK(a.stats.outcome == base.stats.outcome);

    if (a.stats.conflicts == 0 && b.stats.conflicts == 0 &&
        is_prefix(trail_decisions(a.trail), k.decisions()) &&
        is_prefix(trail_decisions(b.trail), pk.decisions())) {
      ++pure;
      CHECK(a.stats.decisions == b.stats.decisions);
      CHECK(a.stats.propagations == b.stats.propagations);
      CHECK(a.stats.conflicts == b.stats.conflicts);
    }
  }
  CHECK(pure >= 20);  // the filter must not hollow out the test
}
