#include "membrana/membrane.hpp"

#include <sstream>
#include <unordered_set>

namespace membrana {

MembraneNode* MembraneNode::unique_child(const Label& l) const {
  MembraneNode* found = nullptr;
  for (const auto& c : children) {
    if (c->label == l) {
      if (found) return nullptr;  // ambiguous
      found = c.get();
    }
  }
  return found;
}

std::size_t MembraneNode::child_count(const Label& l) const {
  std::size_t n = 0;
  for (const auto& c : children)
    if (c->label == l) ++n;
  return n;
}

std::unique_ptr<MembraneNode> build_membrane(NodeIdAllocator& ids, const Label& label,
                                             Multiset contents,
                                             std::vector<std::unique_ptr<MembraneNode>> children) {
  auto node = std::make_unique<MembraneNode>(ids.next(), label);
  node->contents = std::move(contents);
  for (auto& c : children) node->add_child(std::move(c));
  return node;
}

std::unique_ptr<MembraneNode> deep_copy(const MembraneNode& node, NodeIdAllocator& ids) {
  auto copy = std::make_unique<MembraneNode>(ids.next(), node.label);
  copy->contents = node.contents;
  copy->rules = node.rules;
  for (const auto& c : node.children) copy->add_child(deep_copy(*c, ids));
  return copy;
}

const MembraneNode* root_of(const MembraneNode& node) {
  const MembraneNode* cur = &node;
  while (cur->parent) cur = cur->parent;
  return cur;
}

MembraneNode* root_of(MembraneNode& node) {
  MembraneNode* cur = &node;
  while (cur->parent) cur = cur->parent;
  return cur;
}

std::string root_structure(const MembraneNode& node) {
  return "[" + node.label.tag + "]";
}

StructureKind classify_structure(const MembraneNode& node) {
  if (node.is_leaf()) return StructureKind::Leaf;
  if (node.children.size() == 1) {
    // Single-child chain: deep when every node down the path has <= 1 child.
    const MembraneNode* cur = node.children.front().get();
    while (true) {
      if (cur->children.size() > 1) return StructureKind::Mixed;
      if (cur->children.empty()) return StructureKind::Deep;
      cur = cur->children.front().get();
    }
  }
  for (const auto& c : node.children)
    if (!c->is_leaf()) return StructureKind::Mixed;
  return StructureKind::Flat;
}

std::string to_string(StructureKind k) {
  switch (k) {
    case StructureKind::Leaf: return "leaf";
    case StructureKind::Flat: return "flat";
    case StructureKind::Deep: return "deep";
    case StructureKind::Mixed: return "mixed";
  }
  return "?";
}

static void structure_to_string_rec(const MembraneNode& node, std::ostringstream& os) {
  os << '[' << node.label.tag;
  for (const auto& c : node.children) {
    os << ' ';
    structure_to_string_rec(*c, os);
  }
  os << ']';
}

std::string structure_to_string(const MembraneNode& node) {
  std::ostringstream os;
  structure_to_string_rec(node, os);
  return os.str();
}

std::string validate_tree(const MembraneNode& root) {
  std::unordered_set<NodeId> seen;
  std::string problem;
  root.for_each([&](const MembraneNode& n) {
    if (!problem.empty()) return;
    if (n.id == kNoNode) problem = "node without id under label " + n.label.tag;
    if (!seen.insert(n.id).second) problem = "duplicate node id " + std::to_string(n.id);
    for (const auto& c : n.children)
      if (c->parent != &n) problem = "broken parent link at node " + std::to_string(c->id);
  });
  return problem;
}

}  // namespace membrana
