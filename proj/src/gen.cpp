#include "ksat/gen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ksat {

std::pair<Formula, Assignment> generate_planted(const GenSpec& spec) {
  if (spec.num_vars < 3) throw std::invalid_argument("generate_planted: num_vars must be >= 3");
  if (!(spec.ratio_min > 0) || spec.ratio_min > spec.ratio_max)
    throw std::invalid_argument("generate_planted: need 0 < ratio_min <= ratio_max");

  const int n = spec.num_vars;
  SplitMix64 rng(spec.seed);

  Assignment planted(n);
  for (int v = 1; v <= n; ++v) planted.set(v, rng.coin());

  double r = spec.ratio_min + rng.unit() * (spec.ratio_max - spec.ratio_min);
  auto m = static_cast<std::size_t>(std::llround(r * n));

  Formula f;
  f.num_vars = n;
  f.clauses.reserve(m);
  while (f.clauses.size() < m) {
    int vars[3];
    vars[0] = static_cast<int>(rng.range(1, n));
    do vars[1] = static_cast<int>(rng.range(1, n));
    while (vars[1] == vars[0]);
    do vars[2] = static_cast<int>(rng.range(1, n));
    while (vars[2] == vars[0] || vars[2] == vars[1]);

    std::vector<Literal> lits;
    lits.reserve(3);
    bool any_true = false;
    for (int v : vars) {
      Literal l(rng.coin() ? v : -v);
      if (planted.satisfies(l)) any_true = true;
      lits.push_back(l);
    }
    if (!any_true) continue;  // falsified by the plant: resample whole clause
    f.clauses.emplace_back(std::move(lits));
  }
  return {std::move(f), std::move(planted)};
}

VariablePermutation::VariablePermutation(std::vector<int> mapping) : mapping_(std::move(mapping)) {
  std::vector<bool> seen(mapping_.size() + 1, false);
  for (int image : mapping_) {
    if (image < 1 || image > static_cast<int>(mapping_.size()) || seen[image])
      throw std::invalid_argument("VariablePermutation: mapping is not a bijection on 1..n");
    seen[image] = true;
  }
}

VariablePermutation VariablePermutation::identity(int n) {
  std::vector<int> m(static_cast<std::size_t>(n));
  for (int v = 1; v <= n; ++v) m[v - 1] = v;
  return VariablePermutation(std::move(m));
}

VariablePermutation VariablePermutation::random(int n, SplitMix64& rng) {
  std::vector<int> m(static_cast<std::size_t>(n));
  for (int v = 1; v <= n; ++v) m[v - 1] = v;
  for (int i = n - 1; i > 0; --i)
    std::swap(m[i], m[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  return VariablePermutation(std::move(m));
}

int VariablePermutation::apply(int var) const {
  if (var < 1 || var > size())
    throw std::invalid_argument("VariablePermutation: variable outside domain");
  return mapping_[var - 1];
}

Formula permute(const Formula& f, const VariablePermutation& p) {
  if (p.size() < f.num_vars)
    throw std::invalid_argument("permute: permutation domain smaller than formula");
  Formula out;
  out.num_vars = f.num_vars;
  out.clauses.reserve(f.clauses.size());
  for (const Clause& c : f.clauses) {
    std::vector<Literal> lits;
    lits.reserve(c.size());
    for (Literal l : c) lits.push_back(p.apply(l));
    out.clauses.emplace_back(std::move(lits));
  }
  return out;
}

KeyTrace permute_trace(const KeyTrace& k, const VariablePermutation& p) {
  KeyTrace out;
  out.events.reserve(k.events.size());
  for (const TrailEvent& e : k.events)
    out.events.push_back({e.tag, p.apply(e.lit), e.level});
  return out;
}

const std::vector<Bucket>& bucket_presets() {
  static const std::vector<Bucket> presets = {
      {"5-15", 5, 15},   {"16-30", 16, 30}, {"31-60", 31, 60},
      {"61-100", 61, 100}, {"50", 50, 50},  {"100", 100, 100},
  };
  return presets;
}

const Bucket* find_bucket(std::string_view name) {
  for (const Bucket& b : bucket_presets())
    if (name == b.name) return &b;
  return nullptr;
}

}  // namespace ksat
