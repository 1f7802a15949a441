// CNF data model: literals, clauses, formulas, assignments, DIMACS I/O.
#pragma once

#include <cassert>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ksat {

// Signed DIMACS literal: +v means x_v = true, -v means x_v = false.
// A default-constructed Literal has value 0 and acts as a "no literal"
// sentinel (used by restart markers in trails); it is never a member of
// a clause.
class Literal {
public:
  constexpr Literal() = default;
  explicit constexpr Literal(int value) : v_(value) { assert(value != 0); }

  constexpr int value() const { return v_; }
  constexpr int var() const { return v_ < 0 ? -v_ : v_; }
  constexpr bool positive() const { return v_ > 0; }
  constexpr bool valid() const { return v_ != 0; }
  constexpr Literal negated() const { return Literal(-v_); }

  friend constexpr bool operator==(Literal, Literal) = default;
  friend constexpr auto operator<=>(Literal, Literal) = default;

private:
  int v_ = 0;
};

std::ostream& operator<<(std::ostream& os, Literal l);

// Disjunction of literals. Construction normalizes: duplicate literals are
// removed (first occurrence kept) and a clause containing both l and ~l is
// marked tautological.
class Clause {
public:
  Clause() = default;
  explicit Clause(std::vector<Literal> lits);

  const std::vector<Literal>& literals() const { return lits_; }
  bool tautological() const { return taut_; }
  bool empty() const { return lits_.empty(); }
  std::size_t size() const { return lits_.size(); }

  auto begin() const { return lits_.begin(); }
  auto end() const { return lits_.end(); }

  friend bool operator==(const Clause&, const Clause&) = default;

private:
  std::vector<Literal> lits_;
  bool taut_ = false;
};

// Conjunction of clauses over variables 1..num_vars.
struct Formula {
  int num_vars = 0;
  std::vector<Clause> clauses;

  friend bool operator==(const Formula&, const Formula&) = default;
};

enum class Value : std::int8_t { False = -1, Unassigned = 0, True = 1 };

// Total or partial assignment over variables 1..num_vars.
class Assignment {
public:
  Assignment() = default;
  explicit Assignment(int num_vars) : values_(static_cast<std::size_t>(num_vars) + 1, Value::Unassigned) {}

  int num_vars() const { return static_cast<int>(values_.size()) - 1; }

  Value get(int var) const {
    assert(var >= 1 && var <= num_vars());
    return values_[static_cast<std::size_t>(var)];
  }
  void set(int var, bool value) {
    assert(var >= 1 && var <= num_vars());
    values_[static_cast<std::size_t>(var)] = value ? Value::True : Value::False;
  }
  void clear(int var) {
    assert(var >= 1 && var <= num_vars());
    values_[static_cast<std::size_t>(var)] = Value::Unassigned;
  }

  bool total() const;

  // True iff l evaluates to true (resp. false) under this assignment.
  bool satisfies(Literal l) const {
    Value v = get(l.var());
    return v != Value::Unassigned && (v == Value::True) == l.positive();
  }
  bool falsifies(Literal l) const {
    Value v = get(l.var());
    return v != Value::Unassigned && (v == Value::True) != l.positive();
  }

  friend bool operator==(const Assignment&, const Assignment&) = default;

private:
  std::vector<Value> values_;
};

class ParseError : public std::runtime_error {
public:
  ParseError(std::string message, int line);
  int line() const { return line_; }

private:
  int line_;
};

// Parses standard DIMACS CNF. Comment lines start with 'c'; clauses may span
// lines; a '%' line ends the clause section (SATLIB convention). Exactly the
// header's clause count must be present; anything after it is an error.
Formula parse_dimacs(std::istream& in);
Formula parse_dimacs(std::string_view text);

// Canonical DIMACS form: "p cnf n m" header, one clause per line, literals
// space-separated, each line terminated by " 0\n". No comments.
std::string write_dimacs(const Formula& f);
void write_dimacs(const Formula& f, std::ostream& out);

enum class Eval { Satisfied, Falsified, Undetermined };

// A clause is satisfied iff some literal is true under a, falsified iff all
// its literals are false. The formula result aggregates over clauses.
Eval evaluate(const Formula& f, const Assignment& a);

// Exhaustive enumeration, variable 1 as the least significant bit, false
// before true; first satisfying assignment wins. Refuses num_vars > 24.
std::optional<Assignment> brute_force_solve(const Formula& f);

// Drops tautological clauses. Duplicate literals are already removed by
// Clause construction.
Formula simplify(const Formula& f);

}  // namespace ksat
