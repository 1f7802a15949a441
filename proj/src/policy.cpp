#include "ksat/policy.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "ksat/gen.hpp"

#include "json.hpp"

namespace ksat {

using nlohmann::json;

std::optional<Literal> ExpertPolicy::query(const Formula&, const KeyTrace& k) {
  std::vector<Literal> seen = k.decisions();
  std::size_t match = 0;
  while (match < seen.size() && match < decisions_.size() && seen[match] == decisions_[match])
    ++match;
  if (match >= decisions_.size()) return std::nullopt;
  return decisions_[match];
}

std::vector<ProbeRecord> load_probes(std::istream& in) {
  std::vector<ProbeRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError("bad JSON in probes file", lineno);
    ProbeRecord r;
    r.cnf_path = j.value("cnf_path", "");
    r.num_vars = j.at("n").get<int>();
    r.sat = j.value("sat", true);
    r.prefix_tokens = j.at("prefix_tokens").get<std::string>();
    r.target = j.at("target").get<int>();
    if (r.target == 0 || r.num_vars <= 0) throw ParseError("bad probe record", lineno);
    out.push_back(std::move(r));
  }
  return out;
}

void save_probes(std::ostream& out, const std::vector<ProbeRecord>& probes) {
  for (const ProbeRecord& r : probes) {
    json j;
    j["cnf_path"] = r.cnf_path;
    j["n"] = r.num_vars;
    j["sat"] = r.sat;
    j["prefix_tokens"] = r.prefix_tokens;
    j["target"] = r.target;
    out << j.dump() << '\n';
  }
}

ProbeRecord make_probe_record(const std::string& cnf_path, bool sat, const ProbeSample& p) {
  ProbeRecord r;
  r.cnf_path = cnf_path;
  r.num_vars = p.formula.num_vars;
  r.sat = sat;
  r.prefix_tokens = serialize_text(p.formula, p.prefix);
  r.target = p.target.value();
  return r;
}

std::string BcModel::context_key(const TokenStream& z) const {
  std::string key;
  // CNF digest: up to digest_ tokens following [CNF], stopping at [SEP].
  std::size_t i = 1;
  for (int taken = 0; taken < digest_ && i < z.size() && z[i].kind != TokenKind::SepMark;
       ++taken, ++i) {
    key += token_text(z[i]);
    key += ' ';
  }
  key += '|';
  std::size_t start = z.size() > static_cast<std::size_t>(order_)
                          ? z.size() - static_cast<std::size_t>(order_)
                          : 0;
  for (std::size_t j = start; j < z.size(); ++j) {
    key += ' ';
    key += token_text(z[j]);
  }
  return key;
}

void BcModel::add_sample(const TokenStream& z, Literal target) {
  ContextEntry& e = table_[context_key(z)];
  ++e.counts[std::to_string(target.value())];
  ++e.total;
}

std::uint64_t BcModel::total_mass() const {
  std::uint64_t mass = 0;
  for (const auto& [key, e] : table_) mass += e.total;
  return mass;
}

BcModel BcModel::train(std::vector<ProbeRecord> probes, const BcTrainConfig& cfg) {
  if (probes.empty()) throw std::invalid_argument("train: empty probe set");
  if (cfg.perms < 1) throw std::invalid_argument("train: perms must be >= 1");

  BcModel m;
  m.order_ = cfg.order;
  m.digest_ = cfg.digest;
  m.alpha_ = cfg.alpha;

  // Curriculum: stable-partition probes into the named buckets, in order;
  // probes outside every named bucket keep their relative order at the end.
  if (!cfg.curriculum.empty()) {
    std::vector<ProbeRecord> ordered;
    std::vector<bool> taken(probes.size(), false);
    for (const std::string& name : cfg.curriculum) {
      const Bucket* b = find_bucket(name);
      if (!b) throw std::invalid_argument("train: unknown bucket '" + name + "'");
      for (std::size_t i = 0; i < probes.size(); ++i)
        if (!taken[i] && probes[i].num_vars >= b->n_min && probes[i].num_vars <= b->n_max) {
          ordered.push_back(std::move(probes[i]));
          taken[i] = true;
        }
    }
    for (std::size_t i = 0; i < probes.size(); ++i)
      if (!taken[i]) ordered.push_back(std::move(probes[i]));
    probes = std::move(ordered);
  }

  for (const ProbeRecord& r : probes) m.max_var_ = std::max(m.max_var_, r.num_vars);

  SplitMix64 rng(cfg.seed);
  std::vector<std::pair<std::string, std::string>> samples;  // (context key, target token)
  for (const ProbeRecord& r : probes) {
    TokenStream z = parse_stream(r.prefix_tokens);
    m.add_sample(z, Literal(r.target));
    samples.emplace_back(m.context_key(z), std::to_string(r.target));
    if (cfg.perms > 1) {
      Decoded d = deserialize(z);
      for (int c = 1; c < cfg.perms; ++c) {
        VariablePermutation p = VariablePermutation::random(r.num_vars, rng);
        Formula pf;
        pf.num_vars = r.num_vars;
        for (const Clause& cl : d.clauses) {
          std::vector<Literal> lits;
          for (Literal l : cl) lits.push_back(p.apply(l));
          pf.clauses.emplace_back(std::move(lits));
        }
        KeyTrace pk;
        for (const DecisionBlock& b : d.blocks) {
          pk.events.push_back({Tag::D, p.apply(b.decision), 0});
          for (Literal l : b.implied) pk.events.push_back({Tag::A, p.apply(l), 0});
        }
        TokenStream pz = serialize(pf, pk);
        Literal pt = p.apply(Literal(r.target));
        m.add_sample(pz, pt);
        samples.emplace_back(m.context_key(pz), std::to_string(pt.value()));
      }
    }
  }

  // Training NLL over all samples under the final smoothed tables.
  double nll = 0.0;
  const double v = static_cast<double>(m.vocab_size());
  for (const auto& [key, target] : samples) {
    const ContextEntry& e = m.table_.at(key);
    auto it = e.counts.find(target);
    double c = it == e.counts.end() ? 0.0 : static_cast<double>(it->second);
    nll -= std::log((c + m.alpha_) / (static_cast<double>(e.total) + m.alpha_ * v));
  }
  m.training_nll_ = nll / static_cast<double>(samples.size());
  return m;
}

std::optional<Literal> BcModel::predict(const TokenStream& z, int num_vars,
                                        const std::vector<bool>& assigned) const {
  auto it = table_.find(context_key(z));
  if (it == table_.end()) return std::nullopt;
  const ContextEntry& e = it->second;

  std::uint64_t best = 0;
  std::optional<Literal> pick;
  for (int v = 1; v <= num_vars; ++v) {
    if (assigned[static_cast<std::size_t>(v)]) continue;
    for (int sign : {+1, -1}) {
      auto cit = e.counts.find(std::to_string(sign * v));
      if (cit == e.counts.end()) continue;
      if (cit->second > best) {
        best = cit->second;
        pick = Literal(sign * v);
      }
    }
  }
  // best == 0 means every legal decision sits at the smoothed floor.
  return pick;
}

double BcModel::probability(const TokenStream& z, Literal target) const {
  const double v = static_cast<double>(vocab_size());
  auto it = table_.find(context_key(z));
  if (it == table_.end()) return 1.0 / v;
  const ContextEntry& e = it->second;
  auto cit = e.counts.find(std::to_string(target.value()));
  double c = cit == e.counts.end() ? 0.0 : static_cast<double>(cit->second);
  return (c + alpha_) / (static_cast<double>(e.total) + alpha_ * v);
}

void BcModel::save(std::ostream& out) const {
  json j;
  j["format"] = "bcmodel v1";
  j["order"] = order_;
  j["digest"] = digest_;
  j["alpha"] = alpha_;
  j["max_var"] = max_var_;
  j["nll"] = training_nll_;
  json contexts = json::object();
  for (const auto& [key, e] : table_) {
    json counts = json::object();
    for (const auto& [tok, c] : e.counts) counts[tok] = c;
    contexts[key] = std::move(counts);
  }
  j["contexts"] = std::move(contexts);
  out << j.dump() << '\n';
}

BcModel BcModel::load(std::istream& in) {
  json j = json::parse(in);
  if (j.value("format", "") != "bcmodel v1")
    throw std::runtime_error("model file: expected \"bcmodel v1\"");
  BcModel m;
  m.order_ = j.at("order").get<int>();
  m.digest_ = j.at("digest").get<int>();
  m.alpha_ = j.at("alpha").get<double>();
  m.max_var_ = j.at("max_var").get<int>();
  m.training_nll_ = j.value("nll", 0.0);
  for (const auto& [key, counts] : j.at("contexts").items()) {
    ContextEntry e;
    for (const auto& [tok, c] : counts.items()) {
      e.counts[tok] = c.get<std::uint64_t>();
      e.total += c.get<std::uint64_t>();
    }
    m.table_[key] = std::move(e);
  }
  return m;
}

std::optional<Literal> BcPolicy::query(const Formula& f, const KeyTrace& k) {
  TokenStream z = serialize(f, k);
  std::vector<bool> assigned(static_cast<std::size_t>(f.num_vars) + 1, false);
  for (const TrailEvent& e : k.events) assigned[static_cast<std::size_t>(e.lit.var())] = true;
  return model_->predict(z, f.num_vars, assigned);
}

}  // namespace ksat
