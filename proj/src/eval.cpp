#include "ksat/eval.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "ksat/keytrace.hpp"

namespace ksat {

namespace fs = std::filesystem;
using nlohmann::json;

double mrpp(const std::vector<std::pair<double, double>>& pairs) {
  std::vector<double> ratios;
  ratios.reserve(pairs.size());
  for (const auto& [p, base] : pairs)
    if (base > 0) ratios.push_back(p / base);
  if (ratios.empty()) throw std::invalid_argument("mrpp: no pair with positive baseline");
  std::sort(ratios.begin(), ratios.end());
  std::size_t n = ratios.size();
  if (n % 2 == 1) return ratios[n / 2];
  return (ratios[n / 2 - 1] + ratios[n / 2]) / 2.0;
}

double win_rate(const std::vector<std::pair<double, double>>& pairs, double delta) {
  if (pairs.empty()) throw std::invalid_argument("win_rate: empty pair list");
  std::size_t wins = 0;
  for (const auto& [p, base] : pairs)
    if (base > 0 && p <= (1.0 - delta) * base) ++wins;
  return static_cast<double>(wins) / static_cast<double>(pairs.size());
}

MethodSpec MethodSpec::parse(const std::string& text) {
  MethodSpec m;
  if (text == "vsids") {
    m.kind = Kind::Vsids;
  } else if (text == "expert") {
    m.kind = Kind::Expert;
  } else if (text.rfind("bc:", 0) == 0) {
    m.kind = Kind::Bc;
    m.arg = text.substr(3);
  } else if (text.rfind("extern:", 0) == 0) {
    m.kind = Kind::Extern;
    m.arg = text.substr(7);
  } else {
    throw std::invalid_argument("unknown method '" + text + "'");
  }
  return m;
}

std::string MethodSpec::to_string() const {
  switch (kind) {
    case Kind::Vsids: return "vsids";
    case Kind::Expert: return "expert";
    case Kind::Bc: return "bc:" + arg;
    case Kind::Extern: return "extern:" + arg;
  }
  return "?";
}

std::vector<std::string> list_cnf_files(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".cnf")
      files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  return files;
}

namespace {

double median_of(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  std::size_t n = xs.size();
  if (n % 2 == 1) return xs[n / 2];
  return (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

PhaseBreakdown breakdown_of(const std::vector<RunStats>& runs) {
  PhaseBreakdown b;
  if (runs.empty()) return b;
  std::vector<double> prop, ana, dec;
  for (const RunStats& s : runs) {
    prop.push_back(s.time_propagate * 1e3);
    ana.push_back(s.time_analyze * 1e3);
    dec.push_back(s.time_decide * 1e3);
  }
  auto mean = [](const std::vector<double>& xs) {
    double sum = 0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
  };
  b.mean_propagate_ms = mean(prop);
  b.mean_analyze_ms = mean(ana);
  b.mean_decide_ms = mean(dec);
  b.median_propagate_ms = median_of(prop);
  b.median_analyze_ms = median_of(ana);
  b.median_decide_ms = median_of(dec);
  double total = b.mean_propagate_ms + b.mean_analyze_ms + b.mean_decide_ms;
  if (total > 0) {
    b.share_propagate = b.mean_propagate_ms / total;
    b.share_analyze = b.mean_analyze_ms / total;
    b.share_decide = b.mean_decide_ms / total;
  }
  return b;
}

Formula load_formula(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_dimacs(in);
}

Budget make_budget(std::int64_t budget, std::uint64_t after) {
  if (budget < 0) {
    Budget b = Budget::unlimited();
    b.after = after;
    return b;
  }
  return Budget::after_k(static_cast<std::uint64_t>(budget), after);
}

// Runs a worker pool over [0, count); rethrows the first worker exception.
void parallel_for(int workers, std::size_t count, const std::function<void(std::size_t)>& body) {
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto run = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

EvalReport run_eval(const EvalConfig& cfg) {
  std::vector<std::string> files = list_cnf_files(cfg.dataset_dir);
  if (files.empty()) throw std::runtime_error("dataset has no .cnf files: " + cfg.dataset_dir);

  std::shared_ptr<const BcModel> model;
  std::unique_ptr<ExternPolicy> extern_policy;
  if (cfg.method.kind == MethodSpec::Kind::Bc) {
    std::ifstream in(cfg.method.arg);
    if (!in) throw std::runtime_error("cannot open model " + cfg.method.arg);
    model = std::make_shared<BcModel>(BcModel::load(in));
  } else if (cfg.method.kind == MethodSpec::Kind::Extern) {
    extern_policy = std::make_unique<ExternPolicy>(cfg.method.arg);
  }

  std::vector<InstanceRow> rows(files.size());
  std::vector<RunStats> base_stats(files.size());

  parallel_for(cfg.workers, files.size(), [&](std::size_t i) {
    Formula f = load_formula(files[i]);
    SolverConfig scfg = cfg.solver;
    scfg.seed = cfg.seed + i;

    Result base = solve(f, scfg);

    Result method;
    switch (cfg.method.kind) {
      case MethodSpec::Kind::Vsids: {
        method = solve(f, scfg);
        break;
      }
      case MethodSpec::Kind::Expert: {
        KeyTrace k = extract_keytrace(base.trail);
        ExpertPolicy expert(k);
        method = solve(f, scfg, &expert, make_budget(cfg.budget, cfg.schedule_after));
        break;
      }
      case MethodSpec::Kind::Bc: {
        BcPolicy policy(model);
        method = solve(f, scfg, &policy, make_budget(cfg.budget, cfg.schedule_after));
        break;
      }
      case MethodSpec::Kind::Extern: {
        method = solve(f, scfg, extern_policy.get(), make_budget(cfg.budget, cfg.schedule_after));
        break;
      }
    }

    if (base.stats.outcome != method.stats.outcome)
      throw std::logic_error("verdict mismatch between baseline and method on " + files[i]);

    InstanceRow& row = rows[i];
    row.id = fs::path(files[i]).stem().string();
    row.n = f.num_vars;
    row.m = static_cast<int>(f.clauses.size());
    row.verdict = base.stats.outcome == Outcome::Sat ? "SAT" : "UNSAT";
    row.p_base = base.stats.propagations;
    row.p_method = method.stats.propagations;
    row.conf_base = base.stats.conflicts;
    row.conf_method = method.stats.conflicts;
    row.dec_base = base.stats.decisions;
    row.dec_method = method.stats.decisions;
    row.queries = method.stats.queries;
    row.wall_base = base.stats.wall_time;
    row.wall_method = method.stats.wall_time;
    base_stats[i] = base.stats;
  });

  EvalReport report;
  report.per_instance = std::move(rows);
  report.delta = cfg.delta;
  report.method = cfg.method.to_string();
  report.budget = cfg.budget;
  report.schedule_after = cfg.schedule_after;
  report.seed = cfg.seed;
  std::vector<std::pair<double, double>> pairs;
  for (const InstanceRow& r : report.per_instance)
    pairs.emplace_back(static_cast<double>(r.p_method), static_cast<double>(r.p_base));
  report.mrpp = mrpp(pairs);
  report.win_rate = win_rate(pairs, cfg.delta);
  report.breakdown = breakdown_of(base_stats);
  if (extern_policy) report.extern_failures = extern_policy->failures();
  return report;
}

std::string report_csv(const EvalReport& report) {
  std::string out = "id,n,m,verdict,p_base,p_method,conf_base,conf_method,dec_base,dec_method\n";
  for (const InstanceRow& r : report.per_instance) {
    out += r.id;
    out += ',' + std::to_string(r.n) + ',' + std::to_string(r.m) + ',' + r.verdict;
    out += ',' + std::to_string(r.p_base) + ',' + std::to_string(r.p_method);
    out += ',' + std::to_string(r.conf_base) + ',' + std::to_string(r.conf_method);
    out += ',' + std::to_string(r.dec_base) + ',' + std::to_string(r.dec_method);
    out += '\n';
  }
  return out;
}

std::string report_json_text(const EvalReport& report) {
  json j;
  j["method"] = report.method;
  j["budget"] = report.budget;
  j["schedule_after"] = report.schedule_after;
  j["seed"] = report.seed;
  j["delta"] = report.delta;
  j["mrpp"] = report.mrpp;
  j["win_rate"] = report.win_rate;
  j["extern_failures"] = report.extern_failures;
  j["breakdown"] = {
      {"mean_propagate_ms", report.breakdown.mean_propagate_ms},
      {"mean_analyze_ms", report.breakdown.mean_analyze_ms},
      {"mean_decide_ms", report.breakdown.mean_decide_ms},
      {"median_propagate_ms", report.breakdown.median_propagate_ms},
      {"median_analyze_ms", report.breakdown.median_analyze_ms},
      {"median_decide_ms", report.breakdown.median_decide_ms},
      {"share_propagate", report.breakdown.share_propagate},
      {"share_analyze", report.breakdown.share_analyze},
      {"share_decide", report.breakdown.share_decide},
  };
  json rows = json::array();
  for (const InstanceRow& r : report.per_instance) {
    rows.push_back({{"id", r.id},
                    {"n", r.n},
                    {"m", r.m},
                    {"verdict", r.verdict},
                    {"p_base", r.p_base},
                    {"p_method", r.p_method},
                    {"conf_base", r.conf_base},
                    {"conf_method", r.conf_method},
                    {"dec_base", r.dec_base},
                    {"dec_method", r.dec_method},
                    {"queries", r.queries},
                    {"wall_base", r.wall_base},
                    {"wall_method", r.wall_method}});
  }
  j["instances"] = std::move(rows);
  return j.dump(2) + "\n";
}

ScheduleComparison schedule_experiment(EvalConfig base) {
  base.budget = 1;
  ScheduleComparison cmp;
  base.schedule_after = 0;
  cmp.call_at_first = run_eval(base);
  base.schedule_after = 3;
  cmp.call_after_3 = run_eval(base);
  return cmp;
}

PhaseBreakdown bench_breakdown(const std::string& dataset_dir, const SolverConfig& solver,
                               std::uint64_t seed, int workers) {
  std::vector<std::string> files = list_cnf_files(dataset_dir);
  if (files.empty()) throw std::runtime_error("dataset has no .cnf files: " + dataset_dir);
  std::vector<RunStats> stats(files.size());
  parallel_for(workers, files.size(), [&](std::size_t i) {
    Formula f = load_formula(files[i]);
    SolverConfig scfg = solver;
    scfg.seed = seed + i;
    stats[i] = solve(f, scfg).stats;
  });
  return breakdown_of(stats);
}

}  // namespace ksat
