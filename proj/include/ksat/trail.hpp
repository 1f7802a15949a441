// Level-annotated solver event trails and their backtrack-collapsed form.
#pragma once

#include <iosfwd>
#include <vector>

#include "ksat/cnf.hpp"

namespace ksat {

// D = decision, A = implied assignment from unit propagation, BT = backjump.
enum class Tag : char { D = 'D', A = 'A', BT = 'B' };

// One solver event. `level` is the decision level after the event; for a BT
// event it is the backjump target and `lit` the asserting literal enqueued
// there. A restart is a BT event with the sentinel literal (value 0) and
// level 0.
struct TrailEvent {
  Tag tag;
  Literal lit;
  int level;

  bool is_restart() const { return tag == Tag::BT && !lit.valid(); }

  friend bool operator==(const TrailEvent&, const TrailEvent&) = default;
};

// Chronological event log of one solver run.
struct Trail {
  std::vector<TrailEvent> events;

  friend bool operator==(const Trail&, const Trail&) = default;
};

// Backtrack-collapsed trail: only D and A events survive, each backjump
// becomes a prefix truncation plus a pseudo-decision.
struct KeyTrace {
  std::vector<TrailEvent> events;

  // The surviving decision literals, in order.
  std::vector<Literal> decisions() const;

  friend bool operator==(const KeyTrace&, const KeyTrace&) = default;
};

// Left-to-right scan: D and A events append; a BT event first trims the
// retained suffix of events with level above its target, then appends the
// asserting literal as a decision at the target level. Restarts trim to
// level 0 and append nothing.
KeyTrace extract_keytrace(const Trail& t);

// Trail file format: header "trail v1 n=<n>", then one event per line,
// "D|A|BT <signed-int> <level>". Restarts are written "BT 0 0". KeyTrace
// files use the same format with tags restricted to D/A.
void write_trail(std::ostream& out, int num_vars, const std::vector<TrailEvent>& events);
struct TrailFile {
  int num_vars;
  std::vector<TrailEvent> events;
};
TrailFile read_trail(std::istream& in);

}  // namespace ksat
