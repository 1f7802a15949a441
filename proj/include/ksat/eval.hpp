// Dataset runner, propagation metrics, and report writers.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ksat/policy.hpp"
#include "ksat/solver.hpp"

namespace ksat {

// Median of p_i/p'_i over pairs with p'_i > 0; even count takes the mean of
// the two middle ratios. Throws when no pair has a positive baseline.
double mrpp(const std::vector<std::pair<double, double>>& pairs);

// Fraction of all N pairs with p'_i > 0 and p_i <= (1-delta) * p'_i.
double win_rate(const std::vector<std::pair<double, double>>& pairs, double delta);

struct MethodSpec {
  enum class Kind { Vsids, Expert, Bc, Extern };
  Kind kind = Kind::Vsids;
  std::string arg;  // model path (bc) or command line (extern)

  // "vsids" | "expert" | "bc:<file>" | "extern:<command>"
  static MethodSpec parse(const std::string& text);
  std::string to_string() const;
};

struct InstanceRow {
  std::string id;
  int n = 0;
  int m = 0;
  std::string verdict;
  std::uint64_t p_base = 0, p_method = 0;
  std::uint64_t conf_base = 0, conf_method = 0;
  std::uint64_t dec_base = 0, dec_method = 0;
  std::uint64_t queries = 0;
  double wall_base = 0.0, wall_method = 0.0;
};

// Table-4-style phase timing aggregate over the baseline runs.
struct PhaseBreakdown {
  double mean_propagate_ms = 0, mean_analyze_ms = 0, mean_decide_ms = 0;
  double median_propagate_ms = 0, median_analyze_ms = 0, median_decide_ms = 0;
  double share_propagate = 0, share_analyze = 0, share_decide = 0;  // of the means
};

struct EvalReport {
  std::vector<InstanceRow> per_instance;
  double mrpp = 0.0;
  double win_rate = 0.0;
  double delta = 0.01;
  PhaseBreakdown breakdown;
  std::uint64_t extern_failures = 0;
  std::string method;
  std::int64_t budget = 0;
  std::uint64_t schedule_after = 0;
  std::uint64_t seed = 0;
};

struct EvalConfig {
  std::string dataset_dir;
  MethodSpec method;
  std::int64_t budget = 0;           // negative = unlimited
  std::uint64_t schedule_after = 0;  // 0 = front-loaded, k = query after k decisions
  std::uint64_t seed = 0;
  int workers = 1;
  double delta = 0.01;
  SolverConfig solver;
};

// Runs baseline VSIDS and the method on every .cnf in the dataset under
// identical per-instance configs (instance i uses seed + i) and aggregates.
// Counter columns are deterministic given seeds; timing lives in the JSON.
EvalReport run_eval(const EvalConfig& cfg);

// CSV: id,n,m,verdict,p_base,p_method,conf_base,conf_method,dec_base,dec_method
// (counters only, byte-stable across reruns; wall times are in the JSON).
std::string report_csv(const EvalReport& report);
std::string report_json_text(const EvalReport& report);

// Two one-call schedules under budget 1: query at the first decision versus
// after three fallback decisions.
struct ScheduleComparison {
  EvalReport call_at_first;
  EvalReport call_after_3;
};
ScheduleComparison schedule_experiment(EvalConfig base);

// Baseline-only timing breakdown over a dataset.
PhaseBreakdown bench_breakdown(const std::string& dataset_dir, const SolverConfig& solver,
                               std::uint64_t seed, int workers);

// Sorted .cnf paths under dir.
std::vector<std::string> list_cnf_files(const std::string& dir);

}  // namespace ksat
