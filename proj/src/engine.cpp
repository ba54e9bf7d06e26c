#include "membrana/engine.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>
#include <unordered_set>

namespace membrana {

std::uint64_t SplitMix64::below(std::uint64_t bound) {
  if (bound == 0) throw EngineError("SplitMix64::below(0)");
  if (bound == 1) return 0;
  std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    std::uint64_t r = next();
    if (r >= threshold) return r % bound;
  }
}

Mode Mode::bounded(Multiset::Count k) {
  if (k < 1) throw EngineError("bounded mode limit must be >= 1");
  return {Kind::BoundedParallel, k};
}

std::string Mode::to_string() const {
  switch (kind) {
    case Kind::Sequential: return "sequential";
    case Kind::MinimalParallel: return "minimal";
    case Kind::BoundedParallel: return "bounded " + std::to_string(limit);
    case Kind::MaximalParallel: return "maximal";
  }
  return "?";
}

std::optional<Mode> Mode::parse(const std::string& text) {
  std::string t = text;
  for (char& ch : t)
    if (ch == '(' || ch == ')' || ch == ':') ch = ' ';
  std::istringstream is(t);
  std::string word;
  if (!(is >> word)) return std::nullopt;
  std::string extra;
  if (word == "sequential" && !(is >> extra)) return sequential();
  if (word == "minimal" && !(is >> extra)) return minimal();
  if (word == "maximal" && !(is >> extra)) return maximal();
  if (word == "bounded") {
    long long k = 0;
    if (!(is >> k) || k < 1 || (is >> extra)) return std::nullopt;
    return bounded(k);
  }
  return std::nullopt;
}

namespace {

Multiset scaled(const Multiset& m, Multiset::Count k) {
  Multiset out;
  for (const auto& [sym, n] : m.entries()) out.add(sym, n * k);
  return out;
}

void guard_deps(const Guard& g, std::vector<Symbol>& self_syms, std::vector<Label>& child_labels) {
  switch (g.kind) {
    case Guard::Kind::HasSymbol: self_syms.push_back(g.symbol); break;
    case Guard::Kind::SlotEmpty:
    case Guard::Kind::SlotNonempty: child_labels.push_back(g.label); break;
    case Guard::Kind::Not: guard_deps(*g.inner, self_syms, child_labels); break;
    default: break;
  }
}

}  // namespace

Configuration::Configuration(std::unique_ptr<MembraneNode> root, std::vector<Rule> rules,
                             std::uint64_t seed)
    : root_(std::move(root)), rules_(std::move(rules)), rng_(seed), seed_(seed) {
  if (!root_) throw EngineError("configuration requires a root membrane");
  deps_.resize(rules_.size());
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const Rule& r = rules_[i];
    if (!rules_by_name_.emplace(r.name, i).second)
      throw EngineError("duplicate rule name: " + r.name);
    rules_by_scope_[r.scope.tag].push_back(i);
    RuleDeps& d = deps_[i];
    guard_deps(r.guard, d.self_symbols, d.child_labels);
    const Multiset& consumed = r.is_rewrite() ? r.rewrite().lhs : r.clone().trigger;
    for (const auto& [sym, n] : consumed.entries()) {
      d.self_symbols.push_back(sym);
      d.consumed.emplace_back(sym, n);
    }
  }
  for (const auto& [scope, slots] : rules_by_scope_) {
    ScopeDeps& sd = scope_deps_[scope];
    for (std::uint32_t slot = 0; slot < slots.size(); ++slot) {
      const RuleDeps& d = deps_[slots[slot]];
      for (const Symbol& s : d.self_symbols) {
        auto& v = sd.by_symbol[s.name];
        if (v.empty() || v.back() != slot) v.push_back(slot);
      }
      for (const Label& l : d.child_labels) {
        auto& v = sd.by_child_label[l.tag];
        if (v.empty() || v.back() != slot) v.push_back(slot);
      }
    }
  }
  root_->for_each([&](MembraneNode& n) {
    if (n.id == kNoNode) n.id = ids_.next();
    ids_.advance_to(n.id);
    attach_rules(n);
  });
  std::string problem = validate_tree(*root_);
  if (!problem.empty()) throw EngineError("malformed membrane tree: " + problem);
  rebuild_index();
}

void Configuration::reseed(std::uint64_t seed) {
  seed_ = seed;
  rng_.set_state(seed);
}

MembraneNode* Configuration::find(NodeId id) {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? nullptr : it->second;
}

void Configuration::attach_rules(MembraneNode& node) {
  auto it = rules_by_scope_.find(node.label.tag);
  node.rules = it == rules_by_scope_.end() ? std::vector<std::size_t>{} : it->second;
}

// Structure-dependent applicability: target resolvability and clone parent
// preconditions. Contents changes never affect it, so it is refreshed only
// on full rebuilds (construction and after structural steps).
static bool structurally_applicable(const Rule& rule, MembraneNode& node) {
  if (rule.is_rewrite()) {
    for (const Production& p : rule.rewrite().rhs)
      if (!resolve_target(p.target, node)) return false;
    return true;
  }
  CloneKind k = rule.clone().kind;
  if ((k == CloneKind::CloneOut || k == CloneKind::CloneSide) && !node.parent) return false;
  return true;
}

Multiset::Count Configuration::cached_instances(MembraneNode& node, std::size_t slot) {
  if (!node.rule_ok[slot]) return 0;
  const Rule& rule = rules_[node.rules[slot]];
  if (!eval_guard(rule.guard, node, rule)) return 0;
  const auto& consumed = deps_[node.rules[slot]].consumed;
  if (rule.is_rewrite()) {
    Multiset::Count k = Multiset::kMaxMultiplicity;
    for (const auto& [sym, need] : consumed) {
      Multiset::Count c = node.contents.count(sym) / need;
      if (c < k) k = c;
      if (k == 0) return 0;
    }
    return k;
  }
  for (const auto& [sym, need] : consumed)
    if (node.contents.count(sym) < need) return 0;
  return 1;
}

void Configuration::rebuild_index() {
  nodes_.clear();
  active_.clear();
  global_total_ = 0;
  std::uint32_t order = 0;
  root_->for_each([&](MembraneNode& n) {
    n.preorder = ++order;
    nodes_[n.id] = &n;
    n.rule_counts.assign(n.rules.size(), 0);
    n.rule_ok.assign(n.rules.size(), 0);
    n.rule_total = 0;
    for (std::size_t i = 0; i < n.rules.size(); ++i) {
      n.rule_ok[i] = structurally_applicable(rules_[n.rules[i]], n) ? 1 : 0;
      n.rule_counts[i] = cached_instances(n, i);
      n.rule_total += n.rule_counts[i];
    }
    if (n.rule_total > 0) active_.insert({n.preorder, &n});
    global_total_ += n.rule_total;
  });
  index_valid_ = true;
}

void Configuration::update_active(MembraneNode& node, Multiset::Count old_total) {
  global_total_ += node.rule_total - old_total;
  if (old_total == 0 && node.rule_total > 0) active_.insert({node.preorder, &node});
  else if (old_total > 0 && node.rule_total == 0) active_.erase({node.preorder, &node});
}

void Configuration::refresh_node(MembraneNode& node) {
  Multiset::Count old_total = node.rule_total;
  node.rule_counts.assign(node.rules.size(), 0);
  node.rule_total = 0;
  for (std::size_t i = 0; i < node.rules.size(); ++i) {
    node.rule_counts[i] = cached_instances(node, i);
    node.rule_total += node.rule_counts[i];
  }
  update_active(node, old_total);
}

void Configuration::refresh_node_for_symbols(MembraneNode& node, const Symbol* syms,
                                             std::size_t n_syms) {
  if (node.rules.empty()) return;
  auto sd_it = scope_deps_.find(node.label.tag);
  if (sd_it == scope_deps_.end()) return;
  Multiset::Count old_total = node.rule_total;
  std::uint64_t done = 0;  // slot dedupe; scopes with > 64 rules fall back below
  const bool small = node.rules.size() <= 64;
  for (std::size_t j = 0; j < n_syms; ++j) {
    auto it = sd_it->second.by_symbol.find(syms[j].name);
    if (it == sd_it->second.by_symbol.end()) continue;
    for (std::uint32_t slot : it->second) {
      if (small) {
        std::uint64_t bit = 1ULL << slot;
        if (done & bit) continue;
        done |= bit;
      }
      Multiset::Count fresh = cached_instances(node, slot);
      node.rule_total += fresh - node.rule_counts[slot];
      node.rule_counts[slot] = fresh;
    }
  }
  update_active(node, old_total);
}

void Configuration::refresh_parent_for_child(MembraneNode& child) {
  MembraneNode* p = child.parent;
  if (!p || p->rules.empty()) return;
  auto sd_it = scope_deps_.find(p->label.tag);
  if (sd_it == scope_deps_.end()) return;
  auto it = sd_it->second.by_child_label.find(child.label.tag);
  if (it == sd_it->second.by_child_label.end()) return;
  Multiset::Count old_total = p->rule_total;
  for (std::uint32_t slot : it->second) {
    Multiset::Count fresh = cached_instances(*p, slot);
    p->rule_total += fresh - p->rule_counts[slot];
    p->rule_counts[slot] = fresh;
  }
  update_active(*p, old_total);
}

void Configuration::note_change(MembraneNode& node, const Symbol* syms, std::size_t n_syms) {
  if (!index_valid_) return;  // a structural change forces a full rebuild anyway
  refresh_node_for_symbols(node, syms, n_syms);
  refresh_parent_for_child(node);
}

std::vector<Configuration::Option>& Configuration::collect_options() {
  if (!index_valid_) rebuild_index();
  std::vector<Option>& out = options_scratch_;
  out.clear();
  for (const auto& [order, node] : active_) {
    for (std::size_t i = 0; i < node->rules.size(); ++i) {
      if (node->rule_counts[i] > 0)
        out.push_back(Option{node, node->rules[i], node->rule_counts[i],
                             (static_cast<std::size_t>(order) << 16) | i});
    }
  }
  return out;
}

Multiset::Count Configuration::total_applicable() {
  if (!index_valid_) rebuild_index();
  return global_total_;
}

bool Configuration::is_halted() { return total_applicable() == 0; }

namespace {

struct SelectionState {
  std::unordered_map<MembraneNode*, Multiset> avail;
  std::unordered_set<MembraneNode*> clone_locked;
  std::unordered_set<MembraneNode*> touched;

  Multiset& available(MembraneNode* n) {
    auto it = avail.find(n);
    if (it == avail.end()) it = avail.emplace(n, n->contents).first;
    return it->second;
  }
};

}  // namespace

// Sequential fast path: one uniformly chosen instance straight from the
// active index, no option vector. Returns false when halted.
bool Configuration::select_sequential(std::vector<Selected>& out) {
  out.clear();
  if (!index_valid_) rebuild_index();
  if (global_total_ == 0) return false;
  std::uint64_t pick = rng_.below(static_cast<std::uint64_t>(global_total_));
  for (const auto& [order, node] : active_) {
    if (pick >= static_cast<std::uint64_t>(node->rule_total)) {
      pick -= node->rule_total;
      continue;
    }
    for (std::size_t i = 0; i < node->rules.size(); ++i) {
      if (pick >= static_cast<std::uint64_t>(node->rule_counts[i])) {
        pick -= node->rule_counts[i];
        continue;
      }
      Selected sel{node, node->rules[i],
                   1, (static_cast<std::size_t>(node->preorder) << 16) | i, {}};
      const Rule& rule = rules_[node->rules[i]];
      if (rule.is_rewrite()) {
        for (const Production& p : rule.rewrite().rhs) {
          MembraneNode* t = resolve_target(p.target, *node);
          if (!t) throw EngineError("target resolution changed during selection");
          sel.targets.push_back(t);
        }
      }
      out.push_back(std::move(sel));
      return true;
    }
    throw EngineError("active index out of sync");
  }
  throw EngineError("active index out of sync");
}

std::vector<Configuration::Selected>& Configuration::select(Mode mode,
                                                            std::vector<Option>& options) {
  SelectionState st;
  std::vector<Selected>& chosen = chosen_scratch_;
  chosen.clear();

  auto resolve_all = [&](const Rule& rule, MembraneNode* host,
                         std::vector<MembraneNode*>& targets) -> bool {
    targets.clear();
    for (const Production& p : rule.rewrite().rhs) {
      MembraneNode* t = resolve_target(p.target, *host);
      if (!t) return false;
      targets.push_back(t);
    }
    return true;
  };

  auto rewrite_capacity = [&](const Option& o) -> Multiset::Count {
    const Multiset& lhs = rules_[o.rule_idx].rewrite().lhs;
    const Multiset& av = st.available(o.node);
    Multiset::Count k = o.max_count;
    for (const auto& [sym, need] : lhs.entries()) k = std::min(k, av.count(sym) / need);
    return k;
  };

  // Greedy saturation in seeded-shuffled slot order; per slot take every
  // available instance (clones take their single instance). `budget` < 0
  // means unbounded.
  auto greedy = [&](Multiset::Count budget) {
    std::vector<std::size_t> idx(options.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[rng_.below(i)]);

    for (std::size_t ii : idx) {
      if (budget == 0) break;
      const Option& o = options[ii];
      const Rule& rule = rules_[o.rule_idx];
      if (rule.is_rewrite()) {
        if (st.clone_locked.count(o.node)) continue;
        std::vector<MembraneNode*> targets;
        if (!resolve_all(rule, o.node, targets)) continue;
        bool conflict = false;
        for (MembraneNode* t : targets)
          if (st.clone_locked.count(t)) { conflict = true; break; }
        if (conflict) continue;
        Multiset::Count k = rewrite_capacity(o);
        if (budget > 0) k = std::min(k, budget);
        if (k <= 0) continue;
        st.available(o.node).remove_all(scaled(rule.rewrite().lhs, k));
        st.touched.insert(o.node);
        for (MembraneNode* t : targets) st.touched.insert(t);
        if (budget > 0) budget -= k;
        chosen.push_back(Selected{o.node, o.rule_idx, k, o.order, std::move(targets)});
      } else {
        if (st.touched.count(o.node) || st.clone_locked.count(o.node)) continue;
        const Multiset& trigger = rule.clone().trigger;
        if (!st.available(o.node).contains(trigger)) continue;
        st.available(o.node).remove_all(trigger);
        st.clone_locked.insert(o.node);
        st.touched.insert(o.node);
        if (budget > 0) budget -= 1;
        chosen.push_back(Selected{o.node, o.rule_idx, 1, o.order, {}});
      }
    }
  };

  switch (mode.kind) {
    case Mode::Kind::Sequential: {
      select_sequential(chosen);
      break;
    }
    case Mode::Kind::MaximalParallel: {
      greedy(-1);
      if (verify_) verify_nonextendable(options, chosen);
      break;
    }
    case Mode::Kind::BoundedParallel: {
      greedy(mode.limit);
      break;
    }
    case Mode::Kind::MinimalParallel: {
      greedy(-1);
      // Keep a random nonempty sub-multiset of the maximal set: a uniform
      // sub-count per entry, with one instance forced when all draw zero.
      std::vector<Selected> thinned;
      Multiset::Count kept_total = 0;
      for (auto& sel : chosen) {
        Multiset::Count keep = static_cast<Multiset::Count>(
            rng_.below(static_cast<std::uint64_t>(sel.count) + 1));
        if (keep > 0) {
          Selected s = sel;
          s.count = keep;
          kept_total += keep;
          thinned.push_back(std::move(s));
        }
      }
      if (kept_total == 0 && !chosen.empty()) {
        Multiset::Count total = 0;
        for (const auto& sel : chosen) total += sel.count;
        std::uint64_t pick = rng_.below(static_cast<std::uint64_t>(total));
        for (const auto& sel : chosen) {
          if (pick >= static_cast<std::uint64_t>(sel.count)) {
            pick -= sel.count;
            continue;
          }
          Selected s = sel;
          s.count = 1;
          thinned.push_back(std::move(s));
          break;
        }
      }
      chosen = std::move(thinned);
      break;
    }
  }

  std::sort(chosen.begin(), chosen.end(),
            [](const Selected& a, const Selected& b) { return a.order < b.order; });
  return chosen;
}

void Configuration::verify_nonextendable(const std::vector<Option>& options,
                                         const std::vector<Selected>& chosen) {
  SelectionState st;
  for (const auto& sel : chosen) {
    const Rule& rule = rules_[sel.rule_idx];
    if (rule.is_rewrite()) {
      st.available(sel.node).remove_all(scaled(rule.rewrite().lhs, sel.count));
      st.touched.insert(sel.node);
      for (MembraneNode* t : sel.targets) st.touched.insert(t);
    } else {
      st.available(sel.node).remove_all(rule.clone().trigger);
      st.clone_locked.insert(sel.node);
      st.touched.insert(sel.node);
    }
  }
  for (const auto& o : options) {
    const Rule& rule = rules_[o.rule_idx];
    if (rule.is_rewrite()) {
      if (st.clone_locked.count(o.node)) continue;
      bool conflict = false;
      for (const Production& p : rule.rewrite().rhs) {
        MembraneNode* t = resolve_target(p.target, *o.node);
        if (!t || st.clone_locked.count(t)) { conflict = true; break; }
      }
      if (conflict) continue;
      const Multiset& av = st.available(o.node);
      Multiset::Count k = o.max_count;
      for (const auto& [sym, need] : rule.rewrite().lhs.entries())
        k = std::min(k, av.count(sym) / need);
      if (k > 0)
        throw EngineError("maximality violation: rule " + rule.name + " still has " +
                          std::to_string(k) + " instances at node " +
                          std::to_string(o.node->id));
    } else {
      if (st.touched.count(o.node) || st.clone_locked.count(o.node)) continue;
      if (st.available(o.node).contains(rule.clone().trigger))
        throw EngineError("maximality violation: clone rule " + rule.name +
                          " still applicable at node " + std::to_string(o.node->id));
    }
  }
}

const StepReport& Configuration::apply(std::vector<Selected>& chosen) {
  StepReport& report = report_scratch_;
  report.step = ++step_counter_;
  report.firings.clear();
  report.moves.clear();
  report.membranes.clear();
  report.firings.reserve(chosen.size());

  // Contents changes are collected and folded into the applicability index
  // only after every mutation of the step has landed.
  std::vector<std::pair<MembraneNode*, Symbol>>& changes = changes_scratch_;
  changes.clear();
  bool structural = false;

  // Phase 1: consume (all lhs and clone triggers come from the snapshot).
  for (const auto& sel : chosen) {
    const Rule& rule = rules_[sel.rule_idx];
    report.firings.push_back(Firing{rule.name, sel.node->id, sel.count});
    const Multiset& taken = rule.is_rewrite() ? rule.rewrite().lhs : rule.clone().trigger;
    if (!taken.empty()) {
      sel.node->contents.remove_all(scaled(taken, sel.count));
      for (const auto& [sym, n] : taken.entries()) changes.emplace_back(sel.node, sym);
    }
  }

  // Phase 2: deposit products (visible only now, end of the step).
  for (const auto& sel : chosen) {
    const Rule& rule = rules_[sel.rule_idx];
    if (!rule.is_rewrite()) continue;
    const auto& rhs = rule.rewrite().rhs;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
      MembraneNode* target = sel.targets[i];
      target->contents.add(rhs[i].symbol, sel.count);
      changes.emplace_back(target, rhs[i].symbol);
      report.moves.push_back(
          ObjectMove{rhs[i].symbol.name, sel.node->id, target->id, sel.count});
    }
  }

  // Phase 3: structural clone operations, in canonical host order.
  for (const auto& sel : chosen) {
    const Rule& rule = rules_[sel.rule_idx];
    if (rule.is_rewrite()) continue;
    apply_clone_structural(rule, *sel.node, report);
    structural = true;
  }

  if (structural) {
    index_valid_ = false;
  } else {
    // Group the change list by node and refresh each once.
    std::sort(changes.begin(), changes.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t i = 0;
    std::vector<Symbol> syms;
    while (i < changes.size()) {
      MembraneNode* node = changes[i].first;
      syms.clear();
      while (i < changes.size() && changes[i].first == node) {
        syms.push_back(changes[i].second);
        ++i;
      }
      note_change(*node, syms.data(), syms.size());
    }
  }

  if (verify_) {
    std::string problem = validate_tree(*root_);
    if (!problem.empty()) throw EngineError("tree invariant violated: " + problem);
  }
  return report;
}

void Configuration::apply_clone_structural(const Rule& rule, MembraneNode& host,
                                           StepReport& report) {
  const CloneSpec& c = rule.clone();

  auto register_new = [&](MembraneNode& n, const char* op) {
    nodes_[n.id] = &n;
    report.membranes.push_back(
        MembraneEvent{op, n.id, n.label.tag, n.parent ? n.parent->id : kNoNode});
  };
  auto register_copy = [&](MembraneNode& n) {
    n.for_each([&](MembraneNode& m) {
      nodes_[m.id] = &m;
      report.membranes.push_back(
          MembraneEvent{"create", m.id, m.label.tag, m.parent ? m.parent->id : kNoNode});
    });
  };
  auto index_of = [](MembraneNode* parent, MembraneNode* child) -> std::size_t {
    for (std::size_t i = 0; i < parent->children.size(); ++i)
      if (parent->children[i].get() == child) return i;
    throw EngineError("child not found under its parent");
  };

  switch (c.kind) {
    case CloneKind::CloneOut: {
      MembraneNode* par = host.parent;
      std::size_t idx = index_of(par, &host);
      auto shell = std::make_unique<MembraneNode>(ids_.next(), c.new_label);
      attach_rules(*shell);
      std::vector<std::unique_ptr<MembraneNode>> copies;
      for (auto& ch : host.children) copies.push_back(deep_copy(*ch, ids_));
      auto host_ptr = std::move(par->children[idx]);
      shell->add_child(std::move(host_ptr));
      for (auto& cp : copies) shell->add_child(std::move(cp));
      shell->parent = par;
      MembraneNode* shell_raw = shell.get();
      par->children[idx] = std::move(shell);
      register_new(*shell_raw, "create");
      for (std::size_t i = 1; i < shell_raw->children.size(); ++i)
        register_copy(*shell_raw->children[i]);
      break;
    }
    case CloneKind::CloneSide: {
      MembraneNode* par = host.parent;
      std::size_t idx = index_of(par, &host);
      auto copy = deep_copy(host, ids_);
      copy->label = c.new_label;
      attach_rules(*copy);
      copy->parent = par;
      MembraneNode* copy_raw = copy.get();
      par->children.insert(par->children.begin() + idx + 1, std::move(copy));
      register_copy(*copy_raw);
      break;
    }
    case CloneKind::CloneIn: {
      auto inner = std::make_unique<MembraneNode>(ids_.next(), c.new_label);
      attach_rules(*inner);
      for (auto& ch : host.children) inner->add_child(deep_copy(*ch, ids_));
      inner->parent = &host;
      MembraneNode* inner_raw = inner.get();
      host.children.insert(host.children.begin(), std::move(inner));
      register_new(*inner_raw, "create");
      for (auto& ch : inner_raw->children) register_copy(*ch);
      break;
    }
    case CloneKind::Wrap: {
      MembraneNode* par = host.parent;
      auto outer = std::make_unique<MembraneNode>(ids_.next(), c.outer_label);
      auto slot = std::make_unique<MembraneNode>(ids_.next(), c.slot_label);
      attach_rules(*outer);
      attach_rules(*slot);
      MembraneNode* outer_raw = outer.get();
      MembraneNode* slot_raw = slot.get();
      std::unique_ptr<MembraneNode> host_ptr;
      std::size_t idx = 0;
      if (par) {
        idx = index_of(par, &host);
        host_ptr = std::move(par->children[idx]);
      } else {
        host_ptr = std::move(root_);
      }
      outer->add_child(std::move(slot));
      outer->add_child(std::move(host_ptr));
      if (par) {
        outer->parent = par;
        par->children[idx] = std::move(outer);
      } else {
        outer->parent = nullptr;
        root_ = std::move(outer);
      }
      register_new(*outer_raw, "wrap");
      register_new(*slot_raw, "wrap");
      break;
    }
  }
}

StepReport Configuration::step(Mode mode) {
  if (mode.kind == Mode::Kind::Sequential) {
    if (!select_sequential(chosen_scratch_))
      throw EngineError("step() called on a halted configuration");
    return apply(chosen_scratch_);
  }
  auto& options = collect_options();
  if (options.empty()) throw EngineError("step() called on a halted configuration");
  auto& chosen = select(mode, options);
  return apply(chosen);
}

RunResult Configuration::run_to_halt(Mode mode, std::uint64_t max_steps,
                                     const std::function<void(const StepReport&)>* on_step) {
  std::uint64_t n = 0;
  const bool sequential = mode.kind == Mode::Kind::Sequential;
  while (n < max_steps) {
    if (sequential) {
      if (!select_sequential(chosen_scratch_)) return {true, n};
    } else {
      auto& options = collect_options();
      if (options.empty()) return {true, n};
      select(mode, options);
    }
    const StepReport& report = apply(chosen_scratch_);
    if (on_step && *on_step) (*on_step)(report);
    ++n;
  }
  return {is_halted(), n};
}

void Configuration::inject(NodeId node, const Multiset& objects) {
  MembraneNode* n = find(node);
  if (!n) throw EngineError("inject: unknown node id " + std::to_string(node));
  n->contents.add_all(objects);
  if (index_valid_) {
    std::vector<Symbol> syms;
    for (const auto& [sym, cnt] : objects.entries()) syms.push_back(sym);
    note_change(*n, syms.data(), syms.size());
  }
}

MembraneNode* Configuration::node_for_recorded(NodeId id) {
  MembraneNode* n = find(id);
  if (!n) throw EngineError("replay: unknown host id " + std::to_string(id));
  return n;
}

StepReport Configuration::apply_recorded(const std::vector<RecordedFiring>& firings) {
  if (!index_valid_) rebuild_index();
  SelectionState st;
  std::vector<Selected> chosen;
  chosen.reserve(firings.size());
  std::size_t order = 0;
  for (const auto& f : firings) {
    auto it = rules_by_name_.find(f.rule);
    if (it == rules_by_name_.end()) throw EngineError("replay: unknown rule " + f.rule);
    const Rule& rule = rules_[it->second];
    MembraneNode* host = node_for_recorded(f.host);
    if (!(host->label == rule.scope))
      throw EngineError("replay: rule " + f.rule + " scope mismatch at node " +
                        std::to_string(f.host));
    if (!eval_guard(rule.guard, *host, rule))
      throw EngineError("replay: guard false for " + f.rule + " at node " +
                        std::to_string(f.host));
    Selected sel{host, it->second, f.count, ++order, {}};
    if (rule.is_rewrite()) {
      if (f.count < 1) throw EngineError("replay: firing count must be >= 1");
      if (st.clone_locked.count(host))
        throw EngineError("replay: clone exclusivity violated at node " +
                          std::to_string(f.host));
      for (const Production& p : rule.rewrite().rhs) {
        MembraneNode* t = resolve_target(p.target, *host);
        if (!t || st.clone_locked.count(t))
          throw EngineError("replay: unresolvable or locked target for " + f.rule);
        sel.targets.push_back(t);
      }
      Multiset need = scaled(rule.rewrite().lhs, f.count);
      if (!st.available(host).contains(need))
        throw EngineError("replay: insufficient objects for " + f.rule + " x" +
                          std::to_string(f.count));
      st.available(host).remove_all(need);
      st.touched.insert(host);
      for (MembraneNode* t : sel.targets) st.touched.insert(t);
    } else {
      if (f.count != 1) throw EngineError("replay: clone count must be 1");
      if (st.touched.count(host) || st.clone_locked.count(host))
        throw EngineError("replay: clone exclusivity violated at node " +
                          std::to_string(f.host));
      if ((rule.clone().kind == CloneKind::CloneOut ||
           rule.clone().kind == CloneKind::CloneSide) &&
          !host->parent)
        throw EngineError("replay: clone at the configuration root");
      if (!st.available(host).contains(rule.clone().trigger))
        throw EngineError("replay: missing clone trigger for " + f.rule);
      st.available(host).remove_all(rule.clone().trigger);
      st.clone_locked.insert(host);
      st.touched.insert(host);
    }
    chosen.push_back(std::move(sel));
  }
  return apply(chosen);
}

std::uint64_t Configuration::structural_hash() const {
  std::uint64_t h = 1469598103934665603ULL;  // FNV offset basis
  auto mix = [&h](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
    h ^= 0xFF;
    h *= 1099511628211ULL;
  };
  const std::function<void(const MembraneNode&)> walk = [&](const MembraneNode& n) {
    mix("[");
    mix(n.label.tag);
    mix(n.contents.to_string());
    for (const auto& c : n.children) walk(*c);
    mix("]");
  };
  walk(*root_);
  return h;
}

}  // namespace membrana
