#include "doctest.h"

#include "ksat/gen.hpp"
#include "ksat/keytrace.hpp"
#include "test_util.hpp"

using namespace ksat;
using namespace ksat::testutil;

namespace {

Formula eq3_formula() {
  return parse_dimacs("p cnf 4 3\n1 -3 4 0\n-1 2 3 0\n-2 -3 -4 0\n");
}

}  // namespace

TEST_CASE("serialize with an empty prefix") {
  TokenStream ts = serialize(eq3_formula(), KeyTrace{});
  CHECK(stream_text(ts) == "[CNF] 1 -3 4 0 -1 2 3 0 -2 -3 -4 0 [SEP] [D]");
}

TEST_CASE("serialize the walkthrough keytrace") {
  std::string text = serialize_text(walkthrough_formula(), walkthrough_keytrace());
  CHECK(text ==
        "[CNF] 1 2 -3 0 -4 -2 -3 0 1 3 -4 2 0 -3 -1 -4 0 3 -4 -2 0 -2 4 3 0 "
        "[SEP] [D] -4 [D] 1 [D] 2 -3 [D]");
}

TEST_CASE("serialize rejects out-of-range literals") {
  Formula f = eq3_formula();
  KeyTrace k;
  k.events = {{Tag::D, Literal(9), 1}};
  CHECK_THROWS_AS(serialize(f, k), std::invalid_argument);
}

TEST_CASE("leading level-0 assignments are omitted from the stream") {
  Formula f = parse_dimacs("p cnf 2 1\n1 0\n");
  KeyTrace k;
  k.events = {{Tag::A, Literal(1), 0}, {Tag::D, Literal(2), 1}};
  CHECK(stream_text(serialize(f, k)) == "[CNF] 1 0 [SEP] [D] 2 [D]");
}

TEST_CASE("token text round-trips") {
  TokenStream ts = serialize(walkthrough_formula(), walkthrough_keytrace());
  CHECK(parse_stream(stream_text(ts)) == ts);
  CHECK_THROWS_AS(parse_stream("[CNF] x [SEP] [D]"), ParseError);
}

TEST_CASE("deserialize recovers clauses and block structure") {
  Formula f = walkthrough_formula();
  KeyTrace k = walkthrough_keytrace();
  Decoded d = deserialize(serialize(f, k));
  CHECK(d.clauses == f.clauses);
  REQUIRE(d.blocks.size() == 3);
  CHECK(d.blocks[0] == DecisionBlock{Literal(-4), {}});
  CHECK(d.blocks[1] == DecisionBlock{Literal(1), {}});
  CHECK(d.blocks[2] == DecisionBlock{Literal(2), {Literal(-3)}});
}

TEST_CASE("deserialize-serialize round-trips on real runs") {
  SolverConfig cfg;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    GenSpec spec;
    spec.num_vars = 5 + static_cast<int>(seed % 20);
    spec.seed = 7000 + seed;
    auto [f, planted] = generate_planted(spec);
    Result r = solve(f, cfg);
    KeyTrace k = extract_keytrace(r.trail);

    TokenStream ts = serialize(f, k);
    CHECK(ts.front().kind == TokenKind::CnfMark);
    CHECK(ts.back().kind == TokenKind::DecideMark);
    int seps = 0;
    for (const Token& t : ts) seps += t.kind == TokenKind::SepMark;
    CHECK(seps == 1);

    Decoded d = deserialize(ts);
    CHECK(d.clauses == f.clauses);
    CHECK(d.blocks == blocks_of(k));

    // Rebuilding a trace from the decoded blocks reproduces the stream.
    KeyTrace rebuilt;
    for (const DecisionBlock& b : d.blocks) {
      rebuilt.events.push_back({Tag::D, b.decision, 0});
      for (Literal l : b.implied) rebuilt.events.push_back({Tag::A, l, 0});
    }
    Formula f2;
    f2.num_vars = f.num_vars;
    f2.clauses = d.clauses;
    CHECK(serialize(f2, rebuilt) == ts);
  }
}

TEST_CASE("deserialize rejects malformed streams") {
  auto reject = [](const char* text) {
    CHECK_THROWS_AS(deserialize(parse_stream(text)), ParseError);
  };
  reject("1 2 0 [SEP] [D]");            // missing [CNF]
  reject("[CNF] 1 2 0 [D]");            // missing [SEP]
  reject("[CNF] 1 2 [SEP] [D]");        // unterminated clause
  reject("[CNF] 1 2 0 [SEP] 3 [D]");    // block without [D]
  reject("[CNF] 1 0 [SEP] [D] [D]");    // block without decision literal
  reject("[CNF] 1 0 [SEP] [D] 1");      // does not end with [D]
}

TEST_CASE("replay of the walkthrough keytrace is conflict-free SAT") {
  Result r = replay(walkthrough_formula(), walkthrough_keytrace(), SolverConfig{});
  CHECK(r.stats.outcome == Outcome::Sat);
  CHECK(r.stats.conflicts == 0);
  REQUIRE(r.trail.events.size() >= 3);
  CHECK(r.trail.events[0] == TrailEvent{Tag::D, Literal(-4), 1});
  CHECK(r.trail.events[1] == TrailEvent{Tag::D, Literal(1), 2});
  CHECK(r.trail.events[2] == TrailEvent{Tag::D, Literal(2), 3});
}

TEST_CASE("replay of a conflict-free run reproduces its trail") {
  // Negative clauses only: phase-false VSIDS never conflicts.
  Formula f = parse_dimacs("p cnf 5 3\n-1 -2 -3 0\n-2 -4 -5 0\n-1 -3 -5 0\n");
  Result base = solve(f, SolverConfig{});
  CHECK(base.stats.conflicts == 0);
  KeyTrace k = extract_keytrace(base.trail);
  Result again = replay(f, k, SolverConfig{});
  CHECK(again.trail == base.trail);
  CHECK(again.stats.decisions == base.stats.decisions);
  CHECK(again.stats.propagations == base.stats.propagations);
}

TEST_CASE("replay keeps verdicts and trims work on planted instances") {
  SolverConfig cfg;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    GenSpec spec;
    spec.num_vars = 20 + static_cast<int>(seed % 30);
    spec.seed = 8100 + seed;
    auto [f, planted] = generate_planted(spec);
    Result base = solve(f, cfg);
    KeyTrace k = extract_keytrace(base.trail);
    Result rep = replay(f, k, cfg);
    CHECK((rep.stats.outcome == base.stats.outcome));
    if (base.stats.outcome == Outcome::Sat && base.stats.conflicts >= 3)
      CHECK(rep.stats.conflicts < base.stats.conflicts);
  }
}

TEST_CASE("replay keeps UNSAT verdicts") {
  SplitMix64 rng(606);
  int unsat_seen = 0;
  while (unsat_seen < 10) {
    Formula f = random_3sat(rng, 12, 5.0);
    Result base = solve(f, SolverConfig{});
    if (base.stats.outcome != Outcome::Unsat) continue;
    ++unsat_seen;
    KeyTrace k = extract_keytrace(base.trail);
    Result rep = replay(f, k, SolverConfig{});
    CHECK(rep.stats.outcome == Outcome::Unsat);
  }
}

TEST_CASE("harvest_probes on the walkthrough run") {
  std::vector<ProbeSample> probes = harvest_probes(walkthrough_formula(), walkthrough_trail());
  REQUIRE(probes.size() == 3);
  CHECK(probes[0].target == Literal(-4));
  CHECK(probes[1].target == Literal(1));
  CHECK(probes[2].target == Literal(2));
  CHECK(blocks_of(probes[0].prefix).empty());
  CHECK(blocks_of(probes[1].prefix).size() == 1);
  CHECK(blocks_of(probes[2].prefix).size() == 2);
}

TEST_CASE("a conflict-free run with d decisions yields d probes") {
  Formula f = parse_dimacs("p cnf 5 3\n-1 -2 -3 0\n-2 -4 -5 0\n-1 -3 -5 0\n");
  Result base = solve(f, SolverConfig{});
  REQUIRE(base.stats.conflicts == 0);
  CHECK(harvest_probes(f, base.trail).size() == base.stats.decisions);
}

TEST_CASE("probe targets are unassigned under their prefixes") {
  SolverConfig cfg;
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    GenSpec spec;
    spec.num_vars = 15;
    spec.seed = 8200 + seed;
    auto [f, planted] = generate_planted(spec);
    Result base = solve(f, cfg);
    for (const ProbeSample& p : harvest_probes(f, base.trail)) {
      // No prefix event touches the target variable.
      for (const TrailEvent& e : p.prefix.events) CHECK(e.lit.var() != p.target.var());

      // Replaying the prefix decisions leaves the target variable open.
      Solver s(f, cfg);
      bool conflict = s.propagate_to_fixpoint();
      for (Literal d : p.prefix.decisions()) {
        if (conflict || s.value(d.var()) != Value::Unassigned) break;
        s.assume(d);
        conflict = s.propagate_to_fixpoint();
      }
      if (!conflict) CHECK(s.value(p.target.var()) == Value::Unassigned);
    }
  }
}
