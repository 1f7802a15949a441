// Branching policies: expert KeyTrace oracle, behavior-cloned count model,
// and an external-process bridge.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ksat/keytrace.hpp"
#include "ksat/solver.hpp"

namespace ksat {

// Stateless prefix-matching oracle over a previously extracted KeyTrace:
// proposes the expert decision following the longest matching
// decision-prefix of the queried trace, or nothing when exhausted.
class ExpertPolicy : public BranchingPolicy {
public:
  explicit ExpertPolicy(const KeyTrace& k) : decisions_(k.decisions()) {}

  std::optional<Literal> query(const Formula&, const KeyTrace& k) override;
  std::string name() const override { return "expert"; }

private:
  std::vector<Literal> decisions_;
};

// One probes.jsonl record. prefix_tokens holds the full serialized
// z(F, prefix) text, so records are self-contained for training.
struct ProbeRecord {
  std::string cnf_path;
  int num_vars = 0;
  bool sat = true;
  std::string prefix_tokens;
  int target = 0;
};

std::vector<ProbeRecord> load_probes(std::istream& in);
void save_probes(std::ostream& out, const std::vector<ProbeRecord>& probes);
ProbeRecord make_probe_record(const std::string& cnf_path, bool sat, const ProbeSample& p);

struct BcTrainConfig {
  int order = 24;      // tail of z kept in the context, in tokens
  int digest = 16;     // CNF-segment tokens mixed into the context
  double alpha = 1.0;  // add-alpha smoothing
  int perms = 1;       // copies per probe: the identity plus perms-1 permuted
  std::vector<std::string> curriculum;  // bucket names, processed first, in order
  std::uint64_t seed = 0;
};

// Smoothed conditional count model over bounded token contexts. Training
// counts context -> next-token occurrences; prediction is a masked argmax
// with add-alpha smoothing, abstaining when the context is unseen or
// carries no signal for any legal decision.
class BcModel {
public:
  static BcModel train(std::vector<ProbeRecord> probes, const BcTrainConfig& cfg);

  double training_nll() const { return training_nll_; }
  std::size_t context_count() const { return table_.size(); }
  std::uint64_t total_mass() const;
  int order() const { return order_; }
  double alpha() const { return alpha_; }
  int max_var() const { return max_var_; }

  // Masked argmax over unassigned in-range variables; ties go to the lowest
  // variable, positive polarity first. nullopt at the confidence floor.
  std::optional<Literal> predict(const TokenStream& z, int num_vars,
                                 const std::vector<bool>& assigned) const;

  double probability(const TokenStream& z, Literal target) const;

  // "bcmodel v1" JSON dump; byte-stable given identical training inputs.
  void save(std::ostream& out) const;
  static BcModel load(std::istream& in);

private:
  struct ContextEntry {
    std::unordered_map<std::string, std::uint64_t> counts;
    std::uint64_t total = 0;
  };

  std::string context_key(const TokenStream& z) const;
  void add_sample(const TokenStream& z, Literal target);
  std::size_t vocab_size() const { return 2 * static_cast<std::size_t>(max_var_) + 4; }

  int order_ = 24;
  int digest_ = 16;
  double alpha_ = 1.0;
  int max_var_ = 0;
  double training_nll_ = 0.0;
  std::unordered_map<std::string, ContextEntry> table_;
};

class BcPolicy : public BranchingPolicy {
public:
  explicit BcPolicy(std::shared_ptr<const BcModel> model) : model_(std::move(model)) {}

  std::optional<Literal> query(const Formula& f, const KeyTrace& k) override;
  std::string name() const override { return "bc"; }

private:
  std::shared_ptr<const BcModel> model_;
};

// Bridges queries to a child process over a line protocol:
//   parent: HELLO keytrace-sat 1        child: READY
//   parent: QUERY <n> | <token text>    child: DECIDE <lit> | PASS
// PASS, malformed output, or a timeout yield no proposal; a dead child makes
// the policy permanently abstain. Malformed/timeout/dead queries count as
// failures. Queries are serialized; the policy may be shared across solvers.
class ExternPolicy : public BranchingPolicy {
public:
  explicit ExternPolicy(std::string command, int timeout_ms = 2000);
  ~ExternPolicy() override;

  ExternPolicy(const ExternPolicy&) = delete;
  ExternPolicy& operator=(const ExternPolicy&) = delete;

  std::optional<Literal> query(const Formula& f, const KeyTrace& k) override;
  std::string name() const override { return "extern"; }

  bool alive() const { return alive_; }
  std::uint64_t failures() const { return failures_; }

private:
  bool start(const std::string& command);
  bool write_line(const std::string& line);
  std::optional<std::string> read_line();
  void shutdown();

  std::mutex mu_;
  int to_child_ = -1;
  int from_child_ = -1;
  long pid_ = -1;
  int timeout_ms_;
  bool alive_ = false;
  std::uint64_t failures_ = 0;
  std::string buffer_;
};

}  // namespace ksat
