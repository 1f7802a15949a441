#include "ksat/keytrace.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace ksat {

std::string token_text(const Token& t) {
  switch (t.kind) {
    case TokenKind::CnfMark: return "[CNF]";
    case TokenKind::SepMark: return "[SEP]";
    case TokenKind::DecideMark: return "[D]";
    case TokenKind::ClauseEnd: return "0";
    case TokenKind::Lit: return std::to_string(t.lit);
  }
  return "?";
}

std::string stream_text(const TokenStream& ts) {
  std::string out;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (i) out += ' ';
    out += token_text(ts[i]);
  }
  return out;
}

TokenStream parse_stream(std::string_view text) {
  TokenStream out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) {
    if (tok == "[CNF]")
      out.push_back(Token::cnf());
    else if (tok == "[SEP]")
      out.push_back(Token::sep());
    else if (tok == "[D]")
      out.push_back(Token::decide());
    else if (tok == "0")
      out.push_back(Token::clause_end());
    else {
      int v = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || v == 0)
        throw ParseError("bad token '" + tok + "'", 1);
      out.push_back(Token::literal(v));
    }
  }
  return out;
}

std::vector<DecisionBlock> blocks_of(const KeyTrace& k) {
  std::vector<DecisionBlock> blocks;
  for (const TrailEvent& e : k.events) {
    if (e.tag == Tag::D) {
      blocks.push_back({e.lit, {}});
    } else if (!blocks.empty()) {
      blocks.back().implied.push_back(e.lit);
    }
    // An A event before any decision is a level-0 fact; dropped.
  }
  return blocks;
}

TokenStream serialize(const Formula& f, const KeyTrace& k) {
  TokenStream ts;
  ts.push_back(Token::cnf());
  for (const Clause& c : f.clauses) {
    for (Literal l : c) {
      if (l.var() > f.num_vars) throw std::invalid_argument("serialize: literal out of range");
      ts.push_back(Token::literal(l.value()));
    }
    ts.push_back(Token::clause_end());
  }
  ts.push_back(Token::sep());
  for (const DecisionBlock& b : blocks_of(k)) {
    if (b.decision.var() > f.num_vars)
      throw std::invalid_argument("serialize: literal out of range");
    ts.push_back(Token::decide());
    ts.push_back(Token::literal(b.decision.value()));
    for (Literal l : b.implied) {
      if (l.var() > f.num_vars) throw std::invalid_argument("serialize: literal out of range");
      ts.push_back(Token::literal(l.value()));
    }
  }
  ts.push_back(Token::decide());
  return ts;
}

std::string serialize_text(const Formula& f, const KeyTrace& k) {
  return stream_text(serialize(f, k));
}

Decoded deserialize(const TokenStream& ts) {
  auto fail = [](const std::string& msg) { throw ParseError("token stream: " + msg, 1); };

  Decoded out;
  if (ts.empty() || ts.front().kind != TokenKind::CnfMark) fail("must begin with [CNF]");
  if (ts.back().kind != TokenKind::DecideMark) fail("must end with [D]");

  std::size_t i = 1;
  std::vector<Literal> current;
  while (i < ts.size() && ts[i].kind != TokenKind::SepMark) {
    const Token& t = ts[i];
    if (t.kind == TokenKind::Lit) {
      current.push_back(Literal(t.lit));
    } else if (t.kind == TokenKind::ClauseEnd) {
      out.clauses.emplace_back(std::move(current));
      current.clear();
    } else {
      fail("unexpected marker in CNF segment");
    }
    ++i;
  }
  if (i == ts.size()) fail("missing [SEP]");
  if (!current.empty()) fail("unterminated clause before [SEP]");
  ++i;  // skip [SEP]

  while (i + 1 < ts.size()) {
    if (ts[i].kind != TokenKind::DecideMark) fail("expected [D] at block start");
    ++i;
    if (i + 1 >= ts.size() || ts[i].kind != TokenKind::Lit) fail("block missing decision literal");
    DecisionBlock b{Literal(ts[i].lit), {}};
    ++i;
    while (i + 1 < ts.size() && ts[i].kind == TokenKind::Lit) {
      b.implied.push_back(Literal(ts[i].lit));
      ++i;
    }
    out.blocks.push_back(std::move(b));
  }
  return out;
}

namespace {

// Proposes k's decisions in order, one per branching point, advancing
// whether or not the solver accepts the proposal.
class CursorPolicy : public BranchingPolicy {
public:
  explicit CursorPolicy(std::vector<Literal> decisions) : decisions_(std::move(decisions)) {}

  std::optional<Literal> query(const Formula&, const KeyTrace&) override {
    if (next_ >= decisions_.size()) return std::nullopt;
    return decisions_[next_++];
  }
  std::string name() const override { return "replay-cursor"; }

private:
  std::vector<Literal> decisions_;
  std::size_t next_ = 0;
};

}  // namespace

Result replay(const Formula& f, const KeyTrace& k, const SolverConfig& cfg) {
  CursorPolicy policy(k.decisions());
  Solver s(f, cfg);
  return s.solve(&policy, Budget::unlimited());
}

std::vector<ProbeSample> harvest_probes(const Formula& f, const Trail& t) {
  KeyTrace key = extract_keytrace(t);
  std::vector<ProbeSample> probes;
  for (std::size_t i = 0; i < key.events.size(); ++i) {
    if (key.events[i].tag != Tag::D) continue;
    KeyTrace prefix;
    prefix.events.assign(key.events.begin(), key.events.begin() + static_cast<std::ptrdiff_t>(i));
    probes.push_back({f, std::move(prefix), key.events[i].lit});
  }
  return probes;
}

}  // namespace ksat
