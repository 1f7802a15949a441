// MiniSAT-2.2-style CDCL solver with two-watched-literal propagation, VSIDS,
// first-UIP learning, non-chronological backjumping, Luby restarts, and a
// full level-annotated event trail with per-phase timing.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ksat/cnf.hpp"
#include "ksat/trail.hpp"

namespace ksat {

struct SolverConfig {
  double var_decay = 0.95;
  double clause_decay = 0.999;
  int restart_base = 100;  // Luby unit, in conflicts
  bool phase_saving = true;
  double learned_db_growth = 1.1;
  std::uint64_t seed = 0;

  // Test hooks, off in normal runs.
  bool self_check = false;     // verify watch/learn/backjump invariants as we go
  bool record_learned = false; // keep a copy of every learned clause
};

enum class Outcome { Sat, Unsat };

struct RunStats {
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;  // implied literal assignments (A events)
  std::uint64_t conflicts = 0;     // conflict analyses
  std::uint64_t restarts = 0;
  std::uint64_t learned_clauses = 0;
  std::uint64_t queries = 0;          // policy queries consumed
  std::uint64_t extern_failures = 0;  // filled in by extern-policy callers
  double time_propagate = 0.0;  // seconds, monotonic clock
  double time_analyze = 0.0;
  double time_decide = 0.0;
  double wall_time = 0.0;  // solve loop only; setup excluded
  Outcome outcome = Outcome::Unsat;
  std::optional<Assignment> model;
};

// A branching oracle queried with the instance and the current collapsed
// trail; returns a proposed decision literal or nothing to defer to VSIDS.
class BranchingPolicy {
public:
  virtual ~BranchingPolicy() = default;
  virtual std::optional<Literal> query(const Formula& f, const KeyTrace& k) = 0;
  virtual std::string name() const = 0;
};

// Query budget and schedule. A query is admitted at decision index i
// (1-based) iff remaining > 0 and i > after; every admitted query consumes
// one unit whether or not the proposal is accepted.
struct Budget {
  std::uint64_t total = 0;
  std::uint64_t remaining = 0;
  std::uint64_t after = 0;  // 0 = front-loaded; k = first query at decision k+1

  static Budget none() { return {}; }
  static Budget front_loaded(std::uint64_t b) { return {b, b, 0}; }
  static Budget after_k(std::uint64_t b, std::uint64_t k) { return {b, b, k}; }
  static Budget unlimited() { return {UINT64_MAX, UINT64_MAX, 0}; }
};

struct Result {
  RunStats stats;
  Trail trail;
};

// Indexed binary max-heap over variable indices ordered by activity,
// ties broken toward the lower index.
class VarOrderHeap {
public:
  explicit VarOrderHeap(const std::vector<double>* activity) : act_(activity) {}

  void grow(int n) { pos_.resize(static_cast<std::size_t>(n), -1); }
  bool contains(int v) const { return pos_[static_cast<std::size_t>(v)] >= 0; }
  bool empty() const { return heap_.empty(); }
  void insert(int v);
  void on_increased(int v);  // restore order after activity of v grew
  int pop();

private:
  bool before(int a, int b) const {
    double aa = (*act_)[static_cast<std::size_t>(a)], ab = (*act_)[static_cast<std::size_t>(b)];
    return aa > ab || (aa == ab && a < b);
  }
  void up(int i);
  void down(int i);

  std::vector<int> heap_;
  std::vector<int> pos_;
  const std::vector<double>* act_;
};

// Luby sequence value: luby(y, 0), luby(y, 1), ... = y^0, y^0, y^1, ...
double luby(double y, int x);

class Solver {
public:
  Solver(const Formula& f, SolverConfig cfg);
  ~Solver();

  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;

  // Complete decision procedure. Single use per instance.
  Result solve(BranchingPolicy* policy = nullptr, Budget budget = Budget::none());

  // Low-level stepping interface for tests.
  bool propagate_to_fixpoint();  // true on conflict
  void assume(Literal l);        // open a new level and decide l
  Value value(int var) const;
  int decision_level() const;
  Literal vsids_pick();  // VSIDS choice; does not assign
  void bump_activity(int var, double amount);

  const Trail& trail() const { return trail_; }
  const std::vector<Clause>& recorded_learned() const { return recorded_learned_; }

private:
  struct Cls;
  struct Watcher {
    Cls* c;
    int blocker;
  };

  static int lit_index(Literal l) { return 2 * (l.var() - 1) + (l.positive() ? 0 : 1); }
  static Literal lit_of(int idx) {
    int v = idx / 2 + 1;
    return Literal((idx & 1) ? -v : v);
  }
  static int neg(int idx) { return idx ^ 1; }
  static int var_of(int idx) { return idx / 2; }  // 0-based

  Value lit_value(int idx) const;
  bool is_legal(Literal l) const;

  void attach(Cls* c);
  void detach(Cls* c);
  bool add_load_clause(const Clause& c);  // false if the instance became UNSAT

  enum class Enq { Decision, Implied, Asserting };
  void enqueue(int litidx, Cls* reason, Enq kind);

  Cls* propagate();
  void analyze(Cls* conflict, std::vector<int>& out_learnt, int& out_level);
  void cancel_until(int level);
  bool handle_conflict(Cls* conflict);  // false once UNSAT proven
  Literal next_decision(BranchingPolicy* policy, Budget& budget);

  void bump_var(int v);
  void decay_var_activity();
  void bump_clause(Cls* c);
  void decay_clause_activity();
  void reduce_db();
  bool locked(const Cls* c) const;

  void check_watch_invariant() const;
  void check_learnt_shape(const std::vector<int>& learnt, int conflict_level) const;

  Formula formula_;  // as given (pre-simplify), used for model checking and policy queries
  SolverConfig cfg_;
  int num_vars_;
  bool ok_ = true;
  bool used_ = false;

  std::vector<std::unique_ptr<Cls>> clauses_;
  std::vector<std::unique_ptr<Cls>> learnts_;
  std::vector<std::vector<Watcher>> watches_;  // indexed by watched literal

  std::vector<Value> assigns_;   // per 0-based var
  std::vector<int> level_;
  std::vector<Cls*> reason_;
  std::vector<int> stack_;       // assignment order, literal indices
  std::vector<std::size_t> stack_lim_;
  std::size_t qhead_ = 0;

  std::vector<double> activity_;
  std::vector<bool> saved_phase_;
  std::vector<char> seen_;
  VarOrderHeap heap_;
  double var_inc_ = 1.0;
  double cla_inc_ = 1.0;

  double max_learnts_ = 0.0;
  std::uint64_t conflicts_since_restart_ = 0;
  std::uint64_t restart_threshold_ = 0;

  Trail trail_;
  RunStats stats_;
  std::vector<Clause> recorded_learned_;

  std::int64_t ns_propagate_ = 0;
  std::int64_t ns_analyze_ = 0;
  std::int64_t ns_decide_ = 0;
};

// Convenience wrapper: construct, solve, return.
Result solve(const Formula& f, const SolverConfig& cfg, BranchingPolicy* policy = nullptr,
             Budget budget = Budget::none());

}  // namespace ksat
