// keytrace-sat command line: instance generation, solving, trail/KeyTrace
// handling, probe harvesting, BC training, and dataset evaluation.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ksat/eval.hpp"
#include "ksat/gen.hpp"
#include "ksat/keytrace.hpp"
#include "ksat/policy.hpp"
#include "ksat/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ksat;

namespace {

Formula load_cnf(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_dimacs(in);
}

std::uint64_t parse_schedule(const std::string& text) {
  if (text == "front") return 0;
  if (text.rfind("after:", 0) == 0) return std::stoull(text.substr(6));
  throw CLI::ValidationError("--schedule", "expected 'front' or 'after:K'");
}

json stats_json(const RunStats& s) {
  json j;
  j["outcome"] = s.outcome == Outcome::Sat ? "SAT" : "UNSAT";
  j["decisions"] = s.decisions;
  j["propagations"] = s.propagations;
  j["conflicts"] = s.conflicts;
  j["restarts"] = s.restarts;
  j["learned_clauses"] = s.learned_clauses;
  j["queries"] = s.queries;
  j["extern_failures"] = s.extern_failures;
  j["time_propagate"] = s.time_propagate;
  j["time_analyze"] = s.time_analyze;
  j["time_decide"] = s.time_decide;
  j["wall_time"] = s.wall_time;
  if (s.model) {
    json model = json::array();
    for (int v = 1; v <= s.model->num_vars(); ++v)
      model.push_back(s.model->get(v) == Value::True ? v : -v);
    j["model"] = std::move(model);
  }
  return j;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

int cmd_gen(int n_min, int n_max, int count, double ratio_min, double ratio_max,
            std::uint64_t seed, const std::string& out_dir, const std::string& bucket) {
  if (!bucket.empty()) {
    const Bucket* b = find_bucket(bucket);
    if (!b) throw std::runtime_error("unknown bucket '" + bucket + "'");
    n_min = b->n_min;
    n_max = b->n_max;
  }
  if (n_min < 3 || n_max < n_min) throw std::runtime_error("need 3 <= n-min <= n-max");
  fs::create_directories(out_dir);

  json manifest;
  manifest["seed"] = seed;
  manifest["count"] = count;
  manifest["n_min"] = n_min;
  manifest["n_max"] = n_max;
  manifest["ratio_min"] = ratio_min;
  manifest["ratio_max"] = ratio_max;
  json instances = json::array();

  for (int i = 0; i < count; ++i) {
    // Documented derivation: seed_i = seed + i; n from the first draw of
    // SplitMix64(seed_i), the generator seed from the second.
    std::uint64_t seed_i = seed + static_cast<std::uint64_t>(i);
    SplitMix64 meta(seed_i);
    GenSpec spec;
    spec.num_vars = n_min + static_cast<int>(meta.below(static_cast<std::uint64_t>(n_max - n_min) + 1));
    spec.ratio_min = ratio_min;
    spec.ratio_max = ratio_max;
    spec.seed = meta.next();
    auto [f, planted] = generate_planted(spec);

    char name[32];
    std::snprintf(name, sizeof name, "%06d.cnf", i);
    write_file((fs::path(out_dir) / name).string(), write_dimacs(f));

    json planted_lits = json::array();
    for (int v = 1; v <= f.num_vars; ++v)
      planted_lits.push_back(planted.get(v) == Value::True ? v : -v);
    instances.push_back({{"file", name},
                         {"n", f.num_vars},
                         {"m", f.clauses.size()},
                         {"seed", seed_i},
                         {"planted", std::move(planted_lits)}});
  }
  manifest["instances"] = std::move(instances);
  write_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  std::cout << "wrote " << count << " instances to " << out_dir << "\n";
  return 0;
}

int cmd_solve(const std::string& cnf_path, const std::string& policy_spec, std::int64_t budget,
              bool budget_set, const std::string& schedule, std::uint64_t seed,
              const std::string& trail_out, const std::string& stats_out) {
  Formula f = load_cnf(cnf_path);
  SolverConfig cfg;
  cfg.seed = seed;

  std::unique_ptr<BranchingPolicy> policy;
  std::optional<KeyTrace> expert_trace;
  std::shared_ptr<const BcModel> model;
  if (policy_spec == "vsids") {
    // no policy
  } else if (policy_spec.rfind("expert:", 0) == 0) {
    std::ifstream in(policy_spec.substr(7));
    if (!in) throw std::runtime_error("cannot open trace " + policy_spec.substr(7));
    TrailFile tf = read_trail(in);
    KeyTrace k;
    k.events = tf.events;
    policy = std::make_unique<ExpertPolicy>(k);
  } else if (policy_spec.rfind("bc:", 0) == 0) {
    std::ifstream in(policy_spec.substr(3));
    if (!in) throw std::runtime_error("cannot open model " + policy_spec.substr(3));
    model = std::make_shared<BcModel>(BcModel::load(in));
    policy = std::make_unique<BcPolicy>(model);
  } else if (policy_spec.rfind("extern:", 0) == 0) {
    policy = std::make_unique<ExternPolicy>(policy_spec.substr(7));
  } else {
    throw std::runtime_error("unknown policy '" + policy_spec + "'");
  }

  Budget b = Budget::none();
  if (policy) {
    std::uint64_t after = parse_schedule(schedule);
    if (!budget_set || budget < 0) {
      b = Budget::unlimited();
      b.after = after;
    } else {
      b = Budget::after_k(static_cast<std::uint64_t>(budget), after);
    }
  }

  Result r = solve(f, cfg, policy.get(), b);
  if (auto* ext = dynamic_cast<ExternPolicy*>(policy.get()))
    r.stats.extern_failures = ext->failures();

  std::cout << (r.stats.outcome == Outcome::Sat ? "s SATISFIABLE" : "s UNSATISFIABLE") << "\n";
  if (r.stats.model) {
    std::cout << "v";
    for (int v = 1; v <= r.stats.model->num_vars(); ++v)
      std::cout << ' ' << (r.stats.model->get(v) == Value::True ? v : -v);
    std::cout << " 0\n";
  }
  std::cout << "c decisions=" << r.stats.decisions << " propagations=" << r.stats.propagations
            << " conflicts=" << r.stats.conflicts << " restarts=" << r.stats.restarts
            << " queries=" << r.stats.queries << "\n";

  if (!trail_out.empty()) {
    std::ofstream out(trail_out);
    write_trail(out, f.num_vars, r.trail.events);
  }
  if (!stats_out.empty()) write_file(stats_out, stats_json(r.stats).dump(2) + "\n");
  return r.stats.outcome == Outcome::Sat ? 10 : 20;
}

int cmd_extract(const std::string& trail_path, const std::string& out_path) {
  std::ifstream in(trail_path);
  if (!in) throw std::runtime_error("cannot open " + trail_path);
  TrailFile tf = read_trail(in);
  Trail t;
  t.events = tf.events;
  KeyTrace k = extract_keytrace(t);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  write_trail(out, tf.num_vars, k.events);
  std::cout << "extracted " << k.events.size() << " events (" << k.decisions().size()
            << " decisions)\n";
  return 0;
}

int cmd_replay(const std::string& cnf_path, const std::string& ktrace_path,
               const std::string& stats_out) {
  Formula f = load_cnf(cnf_path);
  std::ifstream in(ktrace_path);
  if (!in) throw std::runtime_error("cannot open " + ktrace_path);
  TrailFile tf = read_trail(in);
  for (const TrailEvent& e : tf.events)
    if (e.tag == Tag::BT) throw std::runtime_error("ktrace file must contain only D/A events");
  KeyTrace k;
  k.events = tf.events;

  Result r = replay(f, k, SolverConfig{});
  std::cout << (r.stats.outcome == Outcome::Sat ? "s SATISFIABLE" : "s UNSATISFIABLE") << "\n";
  std::cout << "c decisions=" << r.stats.decisions << " propagations=" << r.stats.propagations
            << " conflicts=" << r.stats.conflicts << "\n";
  if (!stats_out.empty()) write_file(stats_out, stats_json(r.stats).dump(2) + "\n");
  return r.stats.outcome == Outcome::Sat ? 10 : 20;
}

int cmd_probes(const std::string& cnf_dir, const std::string& out_path, std::uint64_t seed) {
  std::vector<std::string> files = list_cnf_files(cnf_dir);
  if (files.empty()) throw std::runtime_error("no .cnf files in " + cnf_dir);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  std::size_t total = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    Formula f = load_cnf(files[i]);
    SolverConfig cfg;
    cfg.seed = seed + i;
    Result r = solve(f, cfg);
    std::vector<ProbeRecord> records;
    for (const ProbeSample& p : harvest_probes(f, r.trail))
      records.push_back(make_probe_record(files[i], r.stats.outcome == Outcome::Sat, p));
    save_probes(out, records);
    total += records.size();
  }
  std::cout << "wrote " << total << " probes from " << files.size() << " instances\n";
  return 0;
}

int cmd_train(const std::string& probes_path, const BcTrainConfig& cfg,
              const std::string& out_path) {
  std::ifstream in(probes_path);
  if (!in) throw std::runtime_error("cannot open " + probes_path);
  std::vector<ProbeRecord> records = load_probes(in);
  BcModel m = BcModel::train(std::move(records), cfg);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  m.save(out);
  std::cout << "trained on " << m.total_mass() << " samples, " << m.context_count()
            << " contexts, nll=" << m.training_nll() << "\n";
  return 0;
}

int cmd_eval(const EvalConfig& cfg, const std::string& out_json, const std::string& out_csv) {
  EvalReport report = run_eval(cfg);
  if (!out_json.empty()) write_file(out_json, report_json_text(report));
  if (!out_csv.empty()) write_file(out_csv, report_csv(report));
  std::cout << "instances=" << report.per_instance.size() << " mrpp=" << report.mrpp
            << " win_rate=" << report.win_rate
            << " propagate_share=" << report.breakdown.share_propagate << "\n";
  return 0;
}

int cmd_breakdown(const std::string& dataset, std::uint64_t seed, int workers,
                  const std::string& out_path) {
  PhaseBreakdown b = bench_breakdown(dataset, SolverConfig{}, seed, workers);
  json j;
  j["mean_ms"] = {{"propagate", b.mean_propagate_ms},
                  {"analyze", b.mean_analyze_ms},
                  {"decide", b.mean_decide_ms}};
  j["median_ms"] = {{"propagate", b.median_propagate_ms},
                    {"analyze", b.median_analyze_ms},
                    {"decide", b.median_decide_ms}};
  j["share_of_mean"] = {{"propagate", b.share_propagate},
                        {"analyze", b.share_analyze},
                        {"decide", b.share_decide}};
  if (!out_path.empty()) write_file(out_path, j.dump(2) + "\n");
  std::cout << "propagate share " << b.share_propagate << ", analyze " << b.share_analyze
            << ", decide " << b.share_decide << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"keytrace-sat: CDCL solving with KeyTrace imitation"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate planted 3-SAT instances");
  int n_min = 5, n_max = 15, count = 100;
  double ratio_min = 4.1, ratio_max = 4.4;
  std::uint64_t gen_seed = 1;
  std::string out_dir, bucket;
  gen->add_option("--n-min", n_min);
  gen->add_option("--n-max", n_max);
  gen->add_option("--count", count);
  gen->add_option("--ratio-min", ratio_min);
  gen->add_option("--ratio-max", ratio_max);
  gen->add_option("--seed", gen_seed);
  gen->add_option("--bucket", bucket, "preset range: 5-15|16-30|31-60|61-100|50|100");
  gen->add_option("--out-dir", out_dir)->required();

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "run the CDCL solver on one instance");
  std::string solve_cnf, policy_spec = "vsids", schedule = "front";
  std::string trail_out, stats_out;
  std::int64_t budget = -1;
  std::uint64_t solve_seed = 0;
  solve_cmd->add_option("cnf", solve_cnf)->required();
  solve_cmd->add_option("--policy", policy_spec, "vsids|expert:<trace>|bc:<model>|extern:<cmd>");
  auto* budget_opt = solve_cmd->add_option("--budget", budget, "query budget; negative = unlimited");
  solve_cmd->add_option("--schedule", schedule, "front|after:K");
  solve_cmd->add_option("--seed", solve_seed);
  solve_cmd->add_option("--trail-out", trail_out);
  solve_cmd->add_option("--stats-out", stats_out);

  // extract
  auto* extract_cmd = app.add_subcommand("extract", "collapse a trail into a KeyTrace");
  std::string extract_in, extract_out;
  extract_cmd->add_option("trail", extract_in)->required();
  extract_cmd->add_option("-o,--out", extract_out)->required();

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "replay a KeyTrace on an instance");
  std::string replay_cnf, replay_trace, replay_stats;
  replay_cmd->add_option("cnf", replay_cnf)->required();
  replay_cmd->add_option("ktrace", replay_trace)->required();
  replay_cmd->add_option("--stats-out", replay_stats);

  // probes
  auto* probes_cmd = app.add_subcommand("probes", "harvest decision probes from a dataset");
  std::string probes_dir, probes_out;
  std::uint64_t probes_seed = 0;
  probes_cmd->add_option("cnf-dir", probes_dir)->required();
  probes_cmd->add_option("--out", probes_out)->required();
  probes_cmd->add_option("--seed", probes_seed);

  // train-bc
  auto* train_cmd = app.add_subcommand("train-bc", "train the behavior-cloning count model");
  std::string train_probes, train_out, curriculum;
  BcTrainConfig bc_cfg;
  train_cmd->add_option("--probes", train_probes)->required();
  train_cmd->add_option("--order", bc_cfg.order);
  train_cmd->add_option("--digest", bc_cfg.digest);
  train_cmd->add_option("--alpha", bc_cfg.alpha);
  train_cmd->add_option("--perms", bc_cfg.perms);
  train_cmd->add_option("--curriculum", curriculum, "comma-separated bucket names");
  train_cmd->add_option("--seed", bc_cfg.seed);
  train_cmd->add_option("--out", train_out)->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "baseline-vs-method dataset evaluation");
  EvalConfig ecfg;
  std::string eval_method = "vsids", eval_schedule = "front", eval_json, eval_csv;
  eval_cmd->add_option("--dataset", ecfg.dataset_dir)->required();
  eval_cmd->add_option("--method", eval_method, "vsids|expert|bc:<model>|extern:<cmd>");
  eval_cmd->add_option("--budget", ecfg.budget, "query budget; negative = unlimited");
  eval_cmd->add_option("--schedule", eval_schedule, "front|after:K");
  eval_cmd->add_option("--seed", ecfg.seed);
  eval_cmd->add_option("--workers", ecfg.workers);
  eval_cmd->add_option("--delta", ecfg.delta);
  eval_cmd->add_option("--out", eval_json);
  eval_cmd->add_option("--csv", eval_csv);

  // bench-breakdown
  auto* bench_cmd = app.add_subcommand("bench-breakdown", "phase timing shares on a dataset");
  std::string bench_dataset, bench_out;
  std::uint64_t bench_seed = 0;
  int bench_workers = 1;
  bench_cmd->add_option("--dataset", bench_dataset)->required();
  bench_cmd->add_option("--seed", bench_seed);
  bench_cmd->add_option("--workers", bench_workers);
  bench_cmd->add_option("--out", bench_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen)
      return cmd_gen(n_min, n_max, count, ratio_min, ratio_max, gen_seed, out_dir, bucket);
    if (*solve_cmd)
      return cmd_solve(solve_cnf, policy_spec, budget, budget_opt->count() > 0, schedule,
                       solve_seed, trail_out, stats_out);
    if (*extract_cmd) return cmd_extract(extract_in, extract_out);
    if (*replay_cmd) return cmd_replay(replay_cnf, replay_trace, replay_stats);
    if (*probes_cmd) return cmd_probes(probes_dir, probes_out, probes_seed);
    if (*train_cmd) {
      if (!curriculum.empty()) {
        std::stringstream ss(curriculum);
        std::string item;
        while (std::getline(ss, item, ',')) bc_cfg.curriculum.push_back(item);
      }
      return cmd_train(train_probes, bc_cfg, train_out);
    }
    if (*eval_cmd) {
      ecfg.method = MethodSpec::parse(eval_method);
      ecfg.schedule_after = parse_schedule(eval_schedule);
      return cmd_eval(ecfg, eval_json, eval_csv);
    }
    if (*bench_cmd) return cmd_breakdown(bench_dataset, bench_seed, bench_workers, bench_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
