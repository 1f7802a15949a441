// Shared fixtures for the test suites.
#pragma once

#include <vector>

#include "ksat/cnf.hpp"
#include "ksat/rng.hpp"
#include "ksat/solver.hpp"
#include "ksat/trail.hpp"

namespace ksat::testutil {

// Four-variable walkthrough instance:
// (x1 v x2 v ~x3) & (~x4 v ~x2 v ~x3) & (x1 v x3 v ~x4 v x2)
// & (~x3 v ~x1 v ~x4) & (x3 v ~x4 v ~x2) & (~x2 v x4 v x3).
inline Formula walkthrough_formula() {
  return parse_dimacs(
      "p cnf 4 6\n"
      "1 2 -3 0\n"
      "-4 -2 -3 0\n"
      "1 3 -4 2 0\n"
      "-3 -1 -4 0\n"
      "3 -4 -2 0\n"
      "-2 4 3 0\n");
}

// Its recorded solver trail and collapsed form.
inline Trail walkthrough_trail() {
  Trail t;
  t.events = {{Tag::D, Literal(4), 1},   {Tag::D, Literal(3), 2}, {Tag::BT, Literal(-3), 1},
              {Tag::BT, Literal(-4), 0}, {Tag::D, Literal(1), 1}, {Tag::D, Literal(2), 2},
              {Tag::A, Literal(-3), 2}};
  return t;
}

inline KeyTrace walkthrough_keytrace() {
  KeyTrace k;
  k.events = {{Tag::D, Literal(-4), 0},
              {Tag::D, Literal(1), 1},
              {Tag::D, Literal(2), 2},
              {Tag::A, Literal(-3), 2}};
  return k;
}

// Uniform random 3-SAT (not planted): mixed verdicts at ratios around the
// threshold.
inline Formula random_3sat(SplitMix64& rng, int num_vars, double ratio) {
  Formula f;
  f.num_vars = num_vars;
  auto m = static_cast<std::size_t>(ratio * num_vars + 0.5);
  while (f.clauses.size() < m) {
    int a = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(num_vars)));
    int b, c;
    do b = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(num_vars)));
    while (b == a);
    do c = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(num_vars)));
    while (c == a || c == b);
    std::vector<Literal> lits{Literal(rng.coin() ? a : -a), Literal(rng.coin() ? b : -b),
                              Literal(rng.coin() ? c : -c)};
    f.clauses.emplace_back(std::move(lits));
  }
  return f;
}

// Proposes a fixed decision list in order, then abstains forever.
class ForcedPolicy : public BranchingPolicy {
public:
  explicit ForcedPolicy(std::vector<Literal> decisions) : decisions_(std::move(decisions)) {}

  std::optional<Literal> query(const Formula&, const KeyTrace&) override {
    if (next_ >= decisions_.size()) return std::nullopt;
    return decisions_[next_++];
  }
  std::string name() const override { return "forced"; }

private:
  std::vector<Literal> decisions_;
  std::size_t next_ = 0;
};

}  // namespace ksat::testutil
