// Random planted 3-SAT generation and variable permutations.
#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "ksat/cnf.hpp"
#include "ksat/rng.hpp"
#include "ksat/trail.hpp"

namespace ksat {

struct GenSpec {
  int num_vars = 0;
  double ratio_min = 4.1;
  double ratio_max = 4.4;
  std::uint64_t seed = 0;
};

// Draws a hidden satisfying assignment, then m = round(r*n) clauses with
// r uniform in [ratio_min, ratio_max]. Each clause picks 3 distinct
// variables and independent signs; a clause falsified by the hidden
// assignment is resampled whole. Deterministic given the seed.
std::pair<Formula, Assignment> generate_planted(const GenSpec& spec);

// Bijection pi on {1..n}. mapping[v-1] = pi(v).
class VariablePermutation {
public:
  explicit VariablePermutation(std::vector<int> mapping);

  // Identity on 1..n.
  static VariablePermutation identity(int n);
  // Uniformly random permutation of 1..n (Fisher-Yates).
  static VariablePermutation random(int n, SplitMix64& rng);

  int size() const { return static_cast<int>(mapping_.size()); }
  int apply(int var) const;
  Literal apply(Literal l) const {
    int image = apply(l.var());
    return Literal(l.positive() ? image : -image);
  }

private:
  std::vector<int> mapping_;
};

// Relabels every literal +-j to +-pi(j); clause and literal order preserved.
Formula permute(const Formula& f, const VariablePermutation& p);

// Relabels event literals; tags and levels unchanged.
KeyTrace permute_trace(const KeyTrace& k, const VariablePermutation& p);

// Named variable-count buckets used by the generator presets.
struct Bucket {
  const char* name;
  int n_min;
  int n_max;
};
const std::vector<Bucket>& bucket_presets();
const Bucket* find_bucket(std::string_view name);

}  // namespace ksat
