#include "ksat/trail.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace ksat {

std::vector<Literal> KeyTrace::decisions() const {
  std::vector<Literal> out;
  for (const TrailEvent& e : events)
    if (e.tag == Tag::D) out.push_back(e.lit);
  return out;
}

KeyTrace extract_keytrace(const Trail& t) {
  KeyTrace k;
  for (const TrailEvent& e : t.events) {
    switch (e.tag) {
      case Tag::D:
      case Tag::A:
        k.events.push_back(e);
        break;
      case Tag::BT:
        while (!k.events.empty() && k.events.back().level > e.level) k.events.pop_back();
        if (e.lit.valid()) k.events.push_back({Tag::D, e.lit, e.level});
        break;
    }
  }
  return k;
}

namespace {

const char* tag_name(Tag t) {
  switch (t) {
    case Tag::D: return "D";
    case Tag::A: return "A";
    case Tag::BT: return "BT";
  }
  return "?";
}

}  // namespace

void write_trail(std::ostream& out, int num_vars, const std::vector<TrailEvent>& events) {
  out << "trail v1 n=" << num_vars << '\n';
  for (const TrailEvent& e : events)
    out << tag_name(e.tag) << ' ' << (e.lit.valid() ? e.lit.value() : 0) << ' ' << e.level << '\n';
}

TrailFile read_trail(std::istream& in) {
  std::string line;
  int lineno = 0;

  auto fail = [&](const std::string& msg) { throw ParseError(msg, lineno); };

  if (!std::getline(in, line)) throw ParseError("empty trail file", 0);
  ++lineno;
  int n = 0;
  {
    std::istringstream hs(line);
    std::string magic, version, nfield;
    hs >> magic >> version >> nfield;
    if (magic != "trail" || version != "v1" || nfield.rfind("n=", 0) != 0)
      fail("expected header 'trail v1 n=<n>'");
    auto [ptr, ec] = std::from_chars(nfield.data() + 2, nfield.data() + nfield.size(), n);
    if (ec != std::errc() || ptr != nfield.data() + nfield.size() || n <= 0)
      fail("bad variable count in header");
  }

  TrailFile tf;
  tf.num_vars = n;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    int lit = 0, level = 0;
    if (!(ls >> tag)) continue;  // blank line
    if (!(ls >> lit >> level)) fail("expected '<tag> <lit> <level>'");
    std::string rest;
    if (ls >> rest) fail("trailing field '" + rest + "'");
    Tag t;
    if (tag == "D")
      t = Tag::D;
    else if (tag == "A")
      t = Tag::A;
    else if (tag == "BT")
      t = Tag::BT;
    else {
      fail("unknown tag '" + tag + "'");
      continue;
    }
    if (lit == 0 && t != Tag::BT) fail("literal 0 only valid on BT (restart)");
    if (lit != 0 && (lit < -n || lit > n)) fail("literal out of range");
    if (level < 0) fail("negative level");
    tf.events.push_back({t, lit == 0 ? Literal{} : Literal(lit), level});
  }
  return tf;
}

}  // namespace ksat
