#ifndef MEMBRANA_MEMBRANE_HPP
#define MEMBRANA_MEMBRANE_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "membrana/multiset.hpp"

namespace membrana {

/// A compartment tag. Labels address rules and targets; they are reused
/// freely after cloning, so identity comes from engine-assigned node ids.
struct Label {
  std::string tag;

  Label() = default;
  explicit Label(std::string t) : tag(std::move(t)) {
    if (tag.empty()) throw std::invalid_argument("label tag must be nonempty");
  }
  auto operator<=>(const Label&) const = default;
};

using NodeId = std::uint64_t;
inline constexpr NodeId kNoNode = 0;

/// A labeled membrane in a rooted tree. Children are owned and ordered
/// (ordering is for deterministic traversal only; no semantics rests on it).
/// `rules` lists the indices of registry rules scoped to this node's label.
class MembraneNode {
 public:
  NodeId id = kNoNode;
  Label label;
  Multiset contents;
  MembraneNode* parent = nullptr;  // non-owning; null at the root
  std::vector<std::unique_ptr<MembraneNode>> children;
  std::vector<std::size_t> rules;

  // Engine-managed applicability scratch (see Configuration): cached
  // instance counts per attached rule, their sum, and the node's preorder
  // position. Not part of the membrane value itself.
  std::vector<Multiset::Count> rule_counts;
  std::vector<std::uint8_t> rule_ok;  // structural applicability per rule
  Multiset::Count rule_total = 0;
  std::uint32_t preorder = 0;

  MembraneNode() = default;
  MembraneNode(NodeId node_id, Label l) : id(node_id), label(std::move(l)) {}

  MembraneNode(const MembraneNode&) = delete;
  MembraneNode& operator=(const MembraneNode&) = delete;

  bool is_leaf() const { return children.empty(); }

  void add_child(std::unique_ptr<MembraneNode> child) {
    child->parent = this;
    children.push_back(std::move(child));
  }

  /// The unique direct child carrying `l`, or null if absent or ambiguous.
  MembraneNode* unique_child(const Label& l) const;
  /// Number of direct children carrying `l`.
  std::size_t child_count(const Label& l) const;

  /// Preorder visit of this subtree.
  template <typename Fn>
  void for_each(Fn&& fn) {
    fn(*this);
    for (auto& c : children) c->for_each(fn);
  }
  template <typename Fn>
  void for_each(Fn&& fn) const {
    fn(*this);
    for (const auto& c : children) c->for_each(fn);
  }
};

/// Allocates monotonically increasing node ids for one configuration.
class NodeIdAllocator {
 public:
  NodeId next() { return ++last_; }
  NodeId last() const { return last_; }
  void advance_to(NodeId floor_id) { if (floor_id > last_) last_ = floor_id; }

 private:
  NodeId last_ = kNoNode;
};

/// Builds a node with a fresh id, adopting the given children.
std::unique_ptr<MembraneNode> build_membrane(NodeIdAllocator& ids, const Label& label,
                                             Multiset contents,
                                             std::vector<std::unique_ptr<MembraneNode>> children = {});

/// Deep copy with fresh ids throughout; contents and rule lists are copied.
std::unique_ptr<MembraneNode> deep_copy(const MembraneNode& node, NodeIdAllocator& ids);

/// Topmost ancestor of `node` (the node itself when it has no parent).
const MembraneNode* root_of(const MembraneNode& node);
MembraneNode* root_of(MembraneNode& node);

/// The structural root form: the node's label with children stripped,
/// rendered in bracket notation (e.g. "[h0]").
std::string root_structure(const MembraneNode& node);

enum class StructureKind { Leaf, Flat, Deep, Mixed };

/// Flat: >= 2 children, all leaves. Deep: a single-child descending chain of
/// depth >= 2 (a lone leaf child counts as deep, making the classification
/// total). Leaf: no children. Mixed: anything else.
StructureKind classify_structure(const MembraneNode& node);

std::string to_string(StructureKind k);

/// Bracket serialization of the membrane skeleton: `[<label> <child>*]`,
/// children space-separated, e.g. "[h0 [h1] [h2]]". Contents are not
/// included (they are serialized separately by the DSL).
std::string structure_to_string(const MembraneNode& node);

/// Checks tree well-formedness: unique ids, correct parent links.
/// Returns an empty string when valid, else a diagnostic.
std::string validate_tree(const MembraneNode& root);

}  // namespace membrana

#endif  // MEMBRANA_MEMBRANE_HPP
