// Token serialization of (formula, KeyTrace) pairs, KeyTrace replay, and
// decision-probe harvesting.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ksat/cnf.hpp"
#include "ksat/solver.hpp"
#include "ksat/trail.hpp"

namespace ksat {

// Alphabet of the serialized stream: framing markers, the clause terminator,
// and signed literals.
enum class TokenKind : char { CnfMark, SepMark, DecideMark, ClauseEnd, Lit };

struct Token {
  TokenKind kind;
  int lit = 0;  // meaningful for Lit only

  static Token cnf() { return {TokenKind::CnfMark}; }
  static Token sep() { return {TokenKind::SepMark}; }
  static Token decide() { return {TokenKind::DecideMark}; }
  static Token clause_end() { return {TokenKind::ClauseEnd}; }
  static Token literal(int v) { return {TokenKind::Lit, v}; }

  friend bool operator==(const Token&, const Token&) = default;
};

using TokenStream = std::vector<Token>;

// Text wire form: markers spelled [CNF] [SEP] [D], literals as signed
// decimals, 0 for clause end; space-separated, one stream per line.
std::string token_text(const Token& t);
std::string stream_text(const TokenStream& ts);
TokenStream parse_stream(std::string_view text);  // throws ParseError

// [CNF] || clause literals with 0 terminators || [SEP] || one block per
// decision (the decision literal then its implied assignments) || [D].
// Level fields and tags are dropped. Implied assignments preceding the first
// decision (level-0 facts) are omitted; they are derivable from the formula.
TokenStream serialize(const Formula& f, const KeyTrace& k);
std::string serialize_text(const Formula& f, const KeyTrace& k);

struct DecisionBlock {
  Literal decision;
  std::vector<Literal> implied;

  friend bool operator==(const DecisionBlock&, const DecisionBlock&) = default;
};

struct Decoded {
  std::vector<Clause> clauses;
  std::vector<DecisionBlock> blocks;
};

// Inverse of serialize up to (clause list, block structure).
Decoded deserialize(const TokenStream& ts);

// Groups a KeyTrace into decision blocks (leading level-0 assignments
// dropped, as in serialization).
std::vector<DecisionBlock> blocks_of(const KeyTrace& k);

// Runs the solver on f forcing, at the i-th branching point, the i-th
// decision literal of k; an exhausted cursor or an illegal proposal falls
// back to VSIDS (the illegal proposal still consumes its position). Clause
// learning and backjumping stay active.
Result replay(const Formula& f, const KeyTrace& k, const SolverConfig& cfg);

// One behavior-cloning supervision sample: the decision that followed
// `prefix` in the originating run.
struct ProbeSample {
  Formula formula;
  KeyTrace prefix;
  Literal target;
};

// One probe per decision event of extract_keytrace(t).
std::vector<ProbeSample> harvest_probes(const Formula& f, const Trail& t);

}  // namespace ksat
