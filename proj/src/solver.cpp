#include "ksat/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace ksat {

namespace {

using Clock = std::chrono::steady_clock;

// Accumulates elapsed nanoseconds into a counter on scope exit.
class PhaseTimer {
public:
  explicit PhaseTimer(std::int64_t& sink) : sink_(sink), start_(Clock::now()) {}
  ~PhaseTimer() {
    sink_ += std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start_).count();
  }

private:
  std::int64_t& sink_;
  Clock::time_point start_;
};

constexpr double kVarRescaleLimit = 1e100;
constexpr double kClauseRescaleLimit = 1e20;

}  // namespace

struct Solver::Cls {
  std::vector<int> lits;  // internal literal indices; lits[0..1] are watched
  bool learnt = false;
  double activity = 0.0;
};

void VarOrderHeap::insert(int v) {
  if (contains(v)) return;
  pos_[static_cast<std::size_t>(v)] = static_cast<int>(heap_.size());
  heap_.push_back(v);
  up(static_cast<int>(heap_.size()) - 1);
}

void VarOrderHeap::on_increased(int v) {
  if (contains(v)) up(pos_[static_cast<std::size_t>(v)]);
}

int VarOrderHeap::pop() {
  int top = heap_[0];
  heap_[0] = heap_.back();
  pos_[static_cast<std::size_t>(heap_[0])] = 0;
  heap_.pop_back();
  pos_[static_cast<std::size_t>(top)] = -1;
  if (!heap_.empty()) down(0);
  return top;
}

void VarOrderHeap::up(int i) {
  int v = heap_[static_cast<std::size_t>(i)];
  while (i > 0) {
    int parent = (i - 1) / 2;
    if (!before(v, heap_[static_cast<std::size_t>(parent)])) break;
    heap_[static_cast<std::size_t>(i)] = heap_[static_cast<std::size_t>(parent)];
    pos_[static_cast<std::size_t>(heap_[static_cast<std::size_t>(i)])] = i;
    i = parent;
  }
  heap_[static_cast<std::size_t>(i)] = v;
  pos_[static_cast<std::size_t>(v)] = i;
}

void VarOrderHeap::down(int i) {
  int v = heap_[static_cast<std::size_t>(i)];
  const int n = static_cast<int>(heap_.size());
  for (;;) {
    int left = 2 * i + 1;
    if (left >= n) break;
    int right = left + 1;
    int child = (right < n && before(heap_[static_cast<std::size_t>(right)],
                                     heap_[static_cast<std::size_t>(left)]))
                    ? right
                    : left;
    if (!before(heap_[static_cast<std::size_t>(child)], v)) break;
    heap_[static_cast<std::size_t>(i)] = heap_[static_cast<std::size_t>(child)];
    pos_[static_cast<std::size_t>(heap_[static_cast<std::size_t>(i)])] = i;
    i = child;
  }
  heap_[static_cast<std::size_t>(i)] = v;
  pos_[static_cast<std::size_t>(v)] = i;
}

double luby(double y, int x) {
  int size = 1, seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  return std::pow(y, seq);
}

Solver::Solver(const Formula& f, SolverConfig cfg)
    : formula_(f), cfg_(std::move(cfg)), num_vars_(f.num_vars), heap_(&activity_) {
  const auto n = static_cast<std::size_t>(num_vars_);
  watches_.resize(2 * n);
  assigns_.resize(n, Value::Unassigned);
  level_.resize(n, 0);
  reason_.resize(n, nullptr);
  activity_.resize(n, 0.0);
  saved_phase_.resize(n, false);
  seen_.resize(n, 0);
  heap_.grow(num_vars_);
  for (int v = 0; v < num_vars_; ++v) heap_.insert(v);

  for (const Clause& c : f.clauses) {
    if (c.tautological()) continue;  // simplify pass, untimed
    if (!add_load_clause(c)) {
      ok_ = false;
      break;
    }
  }
  max_learnts_ = static_cast<double>(f.clauses.size()) / 3.0;
  restart_threshold_ =
      static_cast<std::uint64_t>(luby(2.0, 0) * cfg_.restart_base);
}

Solver::~Solver() = default;

Value Solver::lit_value(int idx) const {
  Value v = assigns_[static_cast<std::size_t>(var_of(idx))];
  if (v == Value::Unassigned) return v;
  bool truth = (v == Value::True) == !(idx & 1);
  return truth ? Value::True : Value::False;
}

bool Solver::is_legal(Literal l) const {
  return l.valid() && l.var() >= 1 && l.var() <= num_vars_ &&
         assigns_[static_cast<std::size_t>(l.var() - 1)] == Value::Unassigned;
}

void Solver::attach(Cls* c) {
  watches_[static_cast<std::size_t>(c->lits[0])].push_back({c, c->lits[1]});
  watches_[static_cast<std::size_t>(c->lits[1])].push_back({c, c->lits[0]});
}

void Solver::detach(Cls* c) {
  for (int w : {c->lits[0], c->lits[1]}) {
    auto& list = watches_[static_cast<std::size_t>(w)];
    auto it = std::find_if(list.begin(), list.end(), [c](const Watcher& x) { return x.c == c; });
    if (it != list.end()) list.erase(it);
  }
}

// Level-0 load: drop satisfied clauses, strip false literals, enqueue units.
bool Solver::add_load_clause(const Clause& c) {
  std::vector<int> lits;
  lits.reserve(c.size());
  for (Literal l : c) {
    int idx = lit_index(l);
    Value v = lit_value(idx);
    if (v == Value::True) return true;  // already satisfied at level 0
    if (v == Value::False) continue;
    lits.push_back(idx);
  }
  if (lits.empty()) return false;  // empty (or all-false) clause: UNSAT
  if (lits.size() == 1) {
    enqueue(lits[0], nullptr, Enq::Implied);
    return true;
  }
  auto cls = std::make_unique<Cls>();
  cls->lits = std::move(lits);
  attach(cls.get());
  clauses_.push_back(std::move(cls));
  return true;
}

void Solver::enqueue(int litidx, Cls* reason, Enq kind) {
  int v = var_of(litidx);
  assigns_[static_cast<std::size_t>(v)] = (litidx & 1) ? Value::False : Value::True;
  level_[static_cast<std::size_t>(v)] = decision_level();
  reason_[static_cast<std::size_t>(v)] = reason;
  stack_.push_back(litidx);
  switch (kind) {
    case Enq::Decision:
      trail_.events.push_back({Tag::D, lit_of(litidx), decision_level()});
      break;
    case Enq::Implied:
      trail_.events.push_back({Tag::A, lit_of(litidx), decision_level()});
      ++stats_.propagations;
      break;
    case Enq::Asserting:
      // Recorded by the caller as the BT event.
      break;
  }
}

int Solver::decision_level() const { return static_cast<int>(stack_lim_.size()); }

Value Solver::value(int var) const { return assigns_[static_cast<std::size_t>(var - 1)]; }

void Solver::assume(Literal l) {
  stack_lim_.push_back(stack_.size());
  enqueue(lit_index(l), nullptr, Enq::Decision);
}

Solver::Cls* Solver::propagate() {
  Cls* conflict = nullptr;
  while (qhead_ < stack_.size()) {
    const int p = stack_[qhead_++];  // p became true; clauses watching ~p need a look
    auto& list = watches_[static_cast<std::size_t>(neg(p))];
    std::size_t i = 0, j = 0;
    const int false_lit = neg(p);
    while (i < list.size()) {
      Watcher w = list[i];
      if (lit_value(w.blocker) == Value::True) {
        list[j++] = list[i++];
        continue;
      }
      Cls& c = *w.c;
      if (c.lits[0] == false_lit) std::swap(c.lits[0], c.lits[1]);
      ++i;
      // c.lits[1] == false_lit now.
      int first = c.lits[0];
      if (lit_value(first) == Value::True) {
        list[j++] = {&c, first};
        continue;
      }
      bool moved = false;
      for (std::size_t k = 2; k < c.lits.size(); ++k) {
        if (lit_value(c.lits[k]) != Value::False) {
          std::swap(c.lits[1], c.lits[k]);
          watches_[static_cast<std::size_t>(c.lits[1])].push_back({&c, first});
          moved = true;
          break;
        }
      }
      if (moved) continue;
      // Unit or conflicting.
      list[j++] = {&c, first};
      if (lit_value(first) == Value::False) {
        conflict = &c;
        qhead_ = stack_.size();
        while (i < list.size()) list[j++] = list[i++];
      } else {
        enqueue(first, &c, Enq::Implied);
      }
    }
    list.resize(j);
    if (conflict) break;
  }
  if (cfg_.self_check && !conflict) check_watch_invariant();
  return conflict;
}

bool Solver::propagate_to_fixpoint() { return propagate() != nullptr; }

// First-UIP conflict analysis. out_learnt[0] is the asserting literal; if the
// clause is non-unit, out_learnt[1] holds a literal from the backjump level.
void Solver::analyze(Cls* conflict, std::vector<int>& out_learnt, int& out_level) {
  out_learnt.clear();
  out_learnt.push_back(-1);  // slot for the asserting literal
  int path_count = 0;
  int p = -1;
  auto index = stack_.size();

  Cls* c = conflict;
  do {
    if (c->learnt) bump_clause(c);
    for (std::size_t j = (p == -1 ? 0 : 1); j < c->lits.size(); ++j) {
      int q = c->lits[j];
      int v = var_of(q);
      if (!seen_[static_cast<std::size_t>(v)] && level_[static_cast<std::size_t>(v)] > 0) {
        bump_var(v);
        seen_[static_cast<std::size_t>(v)] = 1;
        if (level_[static_cast<std::size_t>(v)] >= decision_level())
          ++path_count;
        else
          out_learnt.push_back(q);
      }
    }
    while (!seen_[static_cast<std::size_t>(var_of(stack_[index - 1]))]) --index;
    --index;
    p = stack_[index];
    c = reason_[static_cast<std::size_t>(var_of(p))];
    seen_[static_cast<std::size_t>(var_of(p))] = 0;
    --path_count;
  } while (path_count > 0);
  out_learnt[0] = neg(p);

  if (out_learnt.size() == 1) {
    out_level = 0;
  } else {
    std::size_t max_i = 1;
    for (std::size_t i = 2; i < out_learnt.size(); ++i)
      if (level_[static_cast<std::size_t>(var_of(out_learnt[i]))] >
          level_[static_cast<std::size_t>(var_of(out_learnt[max_i]))])
        max_i = i;
    std::swap(out_learnt[1], out_learnt[max_i]);
    out_level = level_[static_cast<std::size_t>(var_of(out_learnt[1]))];
  }
  for (int q : out_learnt) seen_[static_cast<std::size_t>(var_of(q))] = 0;
}

void Solver::cancel_until(int target) {
  if (decision_level() <= target) return;
  for (auto i = stack_.size(); i-- > stack_lim_[static_cast<std::size_t>(target)];) {
    int v = var_of(stack_[i]);
    if (cfg_.phase_saving)
      saved_phase_[static_cast<std::size_t>(v)] =
          assigns_[static_cast<std::size_t>(v)] == Value::True;
    assigns_[static_cast<std::size_t>(v)] = Value::Unassigned;
    reason_[static_cast<std::size_t>(v)] = nullptr;
    heap_.insert(v);
  }
  stack_.resize(stack_lim_[static_cast<std::size_t>(target)]);
  stack_lim_.resize(static_cast<std::size_t>(target));
  qhead_ = stack_.size();
}

bool Solver::locked(const Cls* c) const {
  int v = var_of(c->lits[0]);
  return reason_[static_cast<std::size_t>(v)] == c &&
         assigns_[static_cast<std::size_t>(v)] != Value::Unassigned;
}

void Solver::bump_var(int v) {
  activity_[static_cast<std::size_t>(v)] += var_inc_;
  if (activity_[static_cast<std::size_t>(v)] > kVarRescaleLimit) {
    for (double& a : activity_) a *= 1.0 / kVarRescaleLimit;
    var_inc_ *= 1.0 / kVarRescaleLimit;
  }
  heap_.on_increased(v);
}

void Solver::bump_activity(int var, double amount) {
  activity_[static_cast<std::size_t>(var - 1)] += amount;
  heap_.on_increased(var - 1);
}

void Solver::decay_var_activity() { var_inc_ /= cfg_.var_decay; }

void Solver::bump_clause(Cls* c) {
  c->activity += cla_inc_;
  if (c->activity > kClauseRescaleLimit) {
    for (auto& lc : learnts_) lc->activity *= 1.0 / kClauseRescaleLimit;
    cla_inc_ *= 1.0 / kClauseRescaleLimit;
  }
}

void Solver::decay_clause_activity() { cla_inc_ /= cfg_.clause_decay; }

void Solver::reduce_db() {
  // Lowest-activity half goes, except reasons and binary clauses.
  std::vector<Cls*> order;
  order.reserve(learnts_.size());
  for (auto& c : learnts_) order.push_back(c.get());
  std::stable_sort(order.begin(), order.end(),
                   [](const Cls* a, const Cls* b) { return a->activity < b->activity; });

  std::vector<Cls*> doomed;
  for (std::size_t i = 0; i < order.size() / 2; ++i) {
    Cls* c = order[i];
    if (c->lits.size() > 2 && !locked(c)) doomed.push_back(c);
  }
  for (Cls* c : doomed) detach(c);
  std::erase_if(learnts_, [&](const std::unique_ptr<Cls>& c) {
    return std::find(doomed.begin(), doomed.end(), c.get()) != doomed.end();
  });
  max_learnts_ *= cfg_.learned_db_growth;
}

Literal Solver::vsids_pick() {
  for (;;) {
    int v = heap_.pop();
    if (assigns_[static_cast<std::size_t>(v)] == Value::Unassigned) {
      bool phase = cfg_.phase_saving && saved_phase_[static_cast<std::size_t>(v)];
      return Literal(phase ? v + 1 : -(v + 1));
    }
  }
}

Literal Solver::next_decision(BranchingPolicy* policy, Budget& budget) {
  if (policy && budget.remaining > 0 && stats_.decisions + 1 > budget.after) {
    --budget.remaining;  // consumed even if the proposal is rejected
    ++stats_.queries;
    KeyTrace k = extract_keytrace(trail_);
    std::optional<Literal> proposal = policy->query(formula_, k);
    if (proposal && is_legal(*proposal)) return *proposal;
  }
  return vsids_pick();
}

bool Solver::handle_conflict(Cls* conflict) {
  if (decision_level() == 0) return false;  // UNSAT; not analyzed, not counted
  ++stats_.conflicts;
  ++conflicts_since_restart_;

  std::vector<int> learnt;
  int back_level = 0;
  analyze(conflict, learnt, back_level);
  if (cfg_.self_check) check_learnt_shape(learnt, decision_level());
  if (cfg_.record_learned) {
    std::vector<Literal> ext;
    for (int q : learnt) ext.push_back(lit_of(q));
    recorded_learned_.emplace_back(std::move(ext));
  }

  cancel_until(back_level);
  trail_.events.push_back({Tag::BT, lit_of(learnt[0]), back_level});

  ++stats_.learned_clauses;
  if (learnt.size() == 1) {
    enqueue(learnt[0], nullptr, Enq::Asserting);
  } else {
    auto cls = std::make_unique<Cls>();
    cls->lits = learnt;
    cls->learnt = true;
    attach(cls.get());
    bump_clause(cls.get());
    Cls* raw = cls.get();
    learnts_.push_back(std::move(cls));
    enqueue(learnt[0], raw, Enq::Asserting);
  }

  decay_var_activity();
  decay_clause_activity();
  return true;
}

Result Solver::solve(BranchingPolicy* policy, Budget budget) {
  if (used_) throw std::logic_error("Solver::solve is single-use");
  used_ = true;
  const Budget initial_budget = budget;

  auto wall_start = Clock::now();
  bool done = false;
  if (!ok_) {
    stats_.outcome = Outcome::Unsat;
    done = true;
  }

  while (!done) {
    Cls* conflict;
    {
      PhaseTimer t(ns_propagate_);
      conflict = propagate();
    }
    if (conflict) {
      PhaseTimer t(ns_analyze_);
      if (!handle_conflict(conflict)) {
        stats_.outcome = Outcome::Unsat;
        break;
      }
      continue;
    }

    if (conflicts_since_restart_ >= restart_threshold_) {
      ++stats_.restarts;
      conflicts_since_restart_ = 0;
      restart_threshold_ = static_cast<std::uint64_t>(
          luby(2.0, static_cast<int>(stats_.restarts)) * cfg_.restart_base);
      if (decision_level() > 0) {
        cancel_until(0);
        trail_.events.push_back({Tag::BT, Literal{}, 0});
      }
      continue;
    }

    if (static_cast<double>(learnts_.size()) >= max_learnts_ && max_learnts_ > 0) reduce_db();

    if (stack_.size() == static_cast<std::size_t>(num_vars_)) {
      Assignment model(num_vars_);
      for (int v = 1; v <= num_vars_; ++v)
        model.set(v, assigns_[static_cast<std::size_t>(v - 1)] == Value::True);
      if (evaluate(formula_, model) != Eval::Satisfied)
        throw std::logic_error("internal error: SAT model fails evaluation");
      stats_.outcome = Outcome::Sat;
      stats_.model = std::move(model);
      break;
    }

    {
      PhaseTimer t(ns_decide_);
      Literal dec = next_decision(policy, budget);
      ++stats_.decisions;
      assume(dec);
    }
  }

  stats_.wall_time =
      std::chrono::duration<double>(Clock::now() - wall_start).count();
  stats_.time_propagate = static_cast<double>(ns_propagate_) * 1e-9;
  stats_.time_analyze = static_cast<double>(ns_analyze_) * 1e-9;
  stats_.time_decide = static_cast<double>(ns_decide_) * 1e-9;

  if (policy) {
    std::uint64_t admitted =
        stats_.decisions > initial_budget.after ? stats_.decisions - initial_budget.after : 0;
    std::uint64_t expected = std::min(initial_budget.total, admitted);
    if (stats_.queries != expected)
      throw std::logic_error("internal error: query accounting mismatch");
  }
  return {stats_, trail_};
}

void Solver::check_watch_invariant() const {
  auto check = [&](const Cls& c) {
    bool satisfied = false;
    for (int q : c.lits)
      if (lit_value(q) == Value::True) satisfied = true;
    if (satisfied) return;
    if (lit_value(c.lits[0]) == Value::False || lit_value(c.lits[1]) == Value::False)
      throw std::logic_error("watch invariant violated");
  };
  for (const auto& c : clauses_) check(*c);
  for (const auto& c : learnts_) check(*c);
}

void Solver::check_learnt_shape(const std::vector<int>& learnt, int conflict_level) const {
  int at_conflict_level = 0;
  for (int q : learnt) {
    if (lit_value(q) != Value::False)
      throw std::logic_error("learned clause not falsified before backjump");
    if (level_[static_cast<std::size_t>(var_of(q))] == conflict_level) ++at_conflict_level;
  }
  if (at_conflict_level != 1)
    throw std::logic_error("learned clause must have exactly one current-level literal");
  if (level_[static_cast<std::size_t>(var_of(learnt[0]))] != conflict_level)
    throw std::logic_error("asserting literal must sit at the conflict level");
}

Result solve(const Formula& f, const SolverConfig& cfg, BranchingPolicy* policy, Budget budget) {
  Solver s(f, cfg);
  return s.solve(policy, budget);
}

}  // namespace ksat
