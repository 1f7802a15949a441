#include "ksat/cnf.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace ksat {

std::ostream& operator<<(std::ostream& os, Literal l) { return os << l.value(); }

Clause::Clause(std::vector<Literal> lits) {
  lits_.reserve(lits.size());
  for (Literal l : lits) {
    if (std::find(lits_.begin(), lits_.end(), l) != lits_.end()) continue;
    if (std::find(lits_.begin(), lits_.end(), l.negated()) != lits_.end()) taut_ = true;
    lits_.push_back(l);
  }
}

bool Assignment::total() const {
  for (std::size_t v = 1; v < values_.size(); ++v)
    if (values_[v] == Value::Unassigned) return false;
  return true;
}

ParseError::ParseError(std::string message, int line)
    : std::runtime_error("line " + std::to_string(line) + ": " + std::move(message)), line_(line) {}

namespace {

// Splits a line into whitespace-separated fields.
std::vector<std::string_view> fields_of(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_int(std::string_view s, long& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

Formula parse_dimacs(std::istream& in) {
  Formula f;
  bool header_seen = false;
  bool trailer_seen = false;  // '%' line: SATLIB end-of-clauses marker
  long want_clauses = 0;
  std::vector<Literal> current;
  bool clause_open = false;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto fs = fields_of(line);
    if (fs.empty()) continue;
    if (fs[0][0] == 'c') continue;
    if (fs[0][0] == '%') {
      if (!header_seen) throw ParseError("'%' before header", lineno);
      trailer_seen = true;
      continue;
    }
    if (fs[0] == "p") {
      if (header_seen) throw ParseError("duplicate header", lineno);
      long n = 0, m = 0;
      if (fs.size() != 4 || fs[1] != "cnf" || !parse_int(fs[2], n) || !parse_int(fs[3], m) ||
          n <= 0 || m < 0)
        throw ParseError("malformed header, expected 'p cnf <vars> <clauses>'", lineno);
      f.num_vars = static_cast<int>(n);
      want_clauses = m;
      header_seen = true;
      continue;
    }
    if (!header_seen) throw ParseError("clause data before header", lineno);
    for (std::string_view tok : fs) {
      long v = 0;
      if (!parse_int(tok, v)) throw ParseError("not an integer: '" + std::string(tok) + "'", lineno);
      if (trailer_seen) {
        // After '%' only a lone terminating 0 is tolerated.
        if (v == 0) continue;
        throw ParseError("literal after '%' end marker", lineno);
      }
      if (static_cast<long>(f.clauses.size()) == want_clauses)
        throw ParseError("trailing garbage after last clause", lineno);
      if (v == 0) {
        f.clauses.emplace_back(std::move(current));
        current.clear();
        clause_open = false;
      } else {
        if (v < -f.num_vars || v > f.num_vars)
          throw ParseError("literal " + std::to_string(v) + " out of range 1.." +
                               std::to_string(f.num_vars),
                           lineno);
        current.push_back(Literal(static_cast<int>(v)));
        clause_open = true;
      }
    }
  }
  if (!header_seen) throw ParseError("missing 'p cnf' header", lineno);
  if (clause_open) throw ParseError("unterminated clause at end of input", lineno);
  if (static_cast<long>(f.clauses.size()) != want_clauses)
    throw ParseError("expected " + std::to_string(want_clauses) + " clauses, found " +
                         std::to_string(f.clauses.size()),
                     lineno);
  return f;
}

Formula parse_dimacs(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_dimacs(in);
}

void write_dimacs(const Formula& f, std::ostream& out) {
  out << "p cnf " << f.num_vars << ' ' << f.clauses.size() << '\n';
  for (const Clause& c : f.clauses) {
    for (Literal l : c) out << l.value() << ' ';
    out << "0\n";
  }
}

std::string write_dimacs(const Formula& f) {
  std::ostringstream out;
  write_dimacs(f, out);
  return out.str();
}

Eval evaluate(const Formula& f, const Assignment& a) {
  bool all_satisfied = true;
  for (const Clause& c : f.clauses) {
    bool sat = false;
    bool all_false = true;
    for (Literal l : c) {
      if (a.satisfies(l)) {
        sat = true;
        break;
      }
      if (!a.falsifies(l)) all_false = false;
    }
    if (sat) continue;
    if (all_false) return Eval::Falsified;
    all_satisfied = false;
  }
  return all_satisfied ? Eval::Satisfied : Eval::Undetermined;
}

std::optional<Assignment> brute_force_solve(const Formula& f) {
  if (f.num_vars > 24) throw std::invalid_argument("brute_force_solve: num_vars > 24");
  const int n = f.num_vars;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    Assignment a(n);
    for (int v = 1; v <= n; ++v) a.set(v, (mask >> (v - 1)) & 1);
    if (evaluate(f, a) == Eval::Satisfied) return a;
  }
  return std::nullopt;
}

Formula simplify(const Formula& f) {
  Formula out;
  out.num_vars = f.num_vars;
  for (const Clause& c : f.clauses)
    if (!c.tautological()) out.clauses.push_back(c);
  return out;
}

}  // namespace ksat
