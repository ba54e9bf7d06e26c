#ifndef MEMBRANA_ENGINE_HPP
#define MEMBRANA_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "membrana/membrane.hpp"
#include "membrana/rule.hpp"

namespace membrana {

class EngineError : public std::runtime_error {
 public:
  explicit EngineError(const std::string& what) : std::runtime_error(what) {}
};

/// SplitMix64: the engine's documented PRNG. 64-bit seed, platform-stable.
/// Bounded draws use rejection sampling so sequences are identical everywhere.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform draw in [0, bound); bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t state() const { return state_; }
  void set_state(std::uint64_t s) { state_ = s; }

 private:
  std::uint64_t state_;
};

/// Execution mode of a synchronized step.
struct Mode {
  enum class Kind { Sequential, MinimalParallel, BoundedParallel, MaximalParallel };
  Kind kind = Kind::MaximalParallel;
  Multiset::Count limit = 0;  // BoundedParallel only, >= 1

  static Mode sequential() { return {Kind::Sequential, 0}; }
  static Mode minimal() { return {Kind::MinimalParallel, 0}; }
  static Mode bounded(Multiset::Count k);
  static Mode maximal() { return {Kind::MaximalParallel, 0}; }

  bool operator==(const Mode&) const = default;
  std::string to_string() const;
  /// Parses "sequential" | "minimal" | "bounded <k>" | "bounded(k)" | "maximal".
  static std::optional<Mode> parse(const std::string& text);
};

struct Firing {
  std::string rule;
  NodeId host = kNoNode;
  Multiset::Count count = 0;
};

struct ObjectMove {
  std::string sym;
  NodeId from = kNoNode;
  NodeId to = kNoNode;
  Multiset::Count n = 0;
};

struct MembraneEvent {
  std::string op;  // "create" or "wrap"
  NodeId id = kNoNode;
  std::string label;
  NodeId parent = kNoNode;
};

/// What one synchronized step did. Replaying the firings of a trace from the
/// initial configuration reproduces the final configuration exactly.
struct StepReport {
  std::uint64_t step = 0;
  std::vector<Firing> firings;
  std::vector<ObjectMove> moves;
  std::vector<MembraneEvent> membranes;
};

struct RunResult {
  bool halted = false;
  std::uint64_t steps = 0;
};

struct RecordedFiring {
  std::string rule;
  NodeId host = kNoNode;
  Multiset::Count count = 0;
};

/// A full membrane system: the tree, the rule registry (rules bind to nodes
/// by scope label), a step counter, and the seeded generator state. One
/// configuration is one simulation instance; it is movable across threads
/// and shares nothing with other instances.
class Configuration {
 public:
  Configuration(std::unique_ptr<MembraneNode> root, std::vector<Rule> rules,
                std::uint64_t seed);

  Configuration(Configuration&&) = default;
  Configuration& operator=(Configuration&&) = default;

  MembraneNode& root() { return *root_; }
  const MembraneNode& root() const { return *root_; }
  const std::vector<Rule>& rules() const { return rules_; }
  std::uint64_t step_count() const { return step_counter_; }
  std::uint64_t seed() const { return seed_; }
  void reseed(std::uint64_t seed);

  NodeIdAllocator& ids() { return ids_; }
  MembraneNode* find(NodeId id);

  /// True iff no rule has an applicable instance anywhere.
  bool is_halted();

  /// Performs one synchronized step. Throws EngineError when halted.
  StepReport step(Mode mode);

  /// Steps until halt or max_steps. Non-halting is reported, not thrown.
  /// `on_step` (optional) receives every StepReport.
  RunResult run_to_halt(Mode mode, std::uint64_t max_steps = 1000000,
                        const std::function<void(const StepReport&)>* on_step = nullptr);

  /// Adds objects to a node (an external event, e.g. value injection).
  void inject(NodeId node, const Multiset& objects);

  /// Applies a recorded step (trace replay): validates guards, availability
  /// and clone exclusivity against the current snapshot, then applies.
  StepReport apply_recorded(const std::vector<RecordedFiring>& firings);

  /// FNV-1a over the canonical structure+contents rendering (ids excluded).
  std::uint64_t structural_hash() const;

  /// When set, every MaximalParallel step asserts non-extendability of the
  /// fired instance multiset and the tree is validated after each step.
  void set_verify(bool on) { verify_ = on; }

  /// Sum of applicable instances over all (host, rule) pairs.
  Multiset::Count total_applicable();

 private:
  struct Option {
    MembraneNode* node;
    std::size_t rule_idx;    // index into rules_
    Multiset::Count max_count;
    std::size_t order;       // preorder position × rule slot (canonical)
  };

  struct Selected {
    MembraneNode* node = nullptr;
    std::size_t rule_idx = 0;
    Multiset::Count count = 0;
    std::size_t order = 0;
    std::vector<MembraneNode*> targets;  // per rhs production (rewrites)
  };

  /// What a rule's instance count can depend on besides structure: host
  /// contents symbols and the contents of direct children by label.
  struct RuleDeps {
    std::vector<Symbol> self_symbols;
    std::vector<Label> child_labels;
    std::vector<std::pair<Symbol, Multiset::Count>> consumed;  // lhs or trigger, flattened
  };

  /// Per scope label: which rule slots depend on which host symbol or on
  /// which child label. Slots index the scope's rule list (node.rules).
  struct ScopeDeps {
    std::unordered_map<std::string, std::vector<std::uint32_t>> by_symbol;
    std::unordered_map<std::string, std::vector<std::uint32_t>> by_child_label;
  };

  void attach_rules(MembraneNode& node);
  void rebuild_index();
  Multiset::Count cached_instances(MembraneNode& node, std::size_t slot);
  void refresh_node(MembraneNode& node);
  void refresh_node_for_symbols(MembraneNode& node, const Symbol* syms, std::size_t n_syms);
  void refresh_parent_for_child(MembraneNode& child);
  void update_active(MembraneNode& node, Multiset::Count old_total);
  void note_change(MembraneNode& node, const Symbol* syms, std::size_t n_syms);
  std::vector<Option>& collect_options();
  std::vector<Selected>& select(Mode mode, std::vector<Option>& options);
  bool select_sequential(std::vector<Selected>& out);
  void verify_nonextendable(const std::vector<Option>& options,
                            const std::vector<Selected>& chosen);
  const StepReport& apply(std::vector<Selected>& chosen);
  void apply_clone_structural(const Rule& rule, MembraneNode& host, StepReport& report);
  MembraneNode* node_for_recorded(NodeId id);

  std::unique_ptr<MembraneNode> root_;
  std::vector<Rule> rules_;
  std::vector<RuleDeps> deps_;
  std::unordered_map<std::string, std::size_t> rules_by_name_;
  std::unordered_map<std::string, std::vector<std::size_t>> rules_by_scope_;
  std::unordered_map<std::string, ScopeDeps> scope_deps_;
  std::unordered_map<NodeId, MembraneNode*> nodes_;
  std::set<std::pair<std::uint32_t, MembraneNode*>> active_;
  Multiset::Count global_total_ = 0;
  std::vector<Option> options_scratch_;
  std::vector<Selected> chosen_scratch_;
  std::vector<std::pair<MembraneNode*, Symbol>> changes_scratch_;
  StepReport report_scratch_;
  bool index_valid_ = false;
  NodeIdAllocator ids_;
  SplitMix64 rng_;
  std::uint64_t seed_;
  std::uint64_t step_counter_ = 0;
  bool verify_ = false;
};

}  // namespace membrana

#endif  // MEMBRANA_ENGINE_HPP
