// Reference responder for the extern-policy wire protocol: replays the
// decisions of a KeyTrace file by longest-prefix matching, like the in-process
// expert policy. Usage: ktrace-responder <ktrace-file>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ksat/keytrace.hpp"
#include "ksat/trail.hpp"

using namespace ksat;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: " << argv[0] << " <ktrace-file>\n";
    return 2;
  }
  std::ifstream in(argv[1]);
  if (!in) {
    std::cerr << "cannot open " << argv[1] << "\n";
    return 2;
  }
  TrailFile tf = read_trail(in);
  std::vector<Literal> expert;
  for (const TrailEvent& e : tf.events)
    if (e.tag == Tag::D) expert.push_back(e.lit);

  std::string line;
  if (!std::getline(std::cin, line)) return 1;
  if (line.rfind("HELLO keytrace-sat", 0) != 0) {
    std::cerr << "unexpected handshake: " << line << "\n";
    return 1;
  }
  std::cout << "READY\n" << std::flush;

  while (std::getline(std::cin, line)) {
    auto bar = line.find('|');
    if (line.rfind("QUERY ", 0) != 0 || bar == std::string::npos) {
      std::cout << "PASS\n" << std::flush;
      continue;
    }
    std::vector<Literal> seen;
    try {
      Decoded d = deserialize(parse_stream(line.substr(bar + 1)));
      for (const DecisionBlock& b : d.blocks) seen.push_back(b.decision);
    } catch (const std::exception&) {
      std::cout << "PASS\n" << std::flush;
      continue;
    }
    std::size_t match = 0;
    while (match < seen.size() && match < expert.size() && seen[match] == expert[match]) ++match;
    if (match >= expert.size())
      std::cout << "PASS\n" << std::flush;
    else
      std::cout << "DECIDE " << expert[match].value() << "\n" << std::flush;
  }
  return 0;
}
