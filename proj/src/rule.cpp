#include "membrana/rule.hpp"

#include <algorithm>
#include <sstream>

namespace membrana {

std::string Target::to_string() const {
  switch (kind) {
    case Kind::Here: return "@here";
    case Kind::Out: return "@out";
    case Kind::InUnique: return "@in";
    case Kind::InChild: return "@" + child_label.tag;
  }
  return "?";
}

bool Guard::operator==(const Guard& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
    case Kind::Always: return true;
    case Kind::NotWrapped:
      return has_explicit_label == other.has_explicit_label &&
             (!has_explicit_label || label == other.label);
    case Kind::SlotEmpty:
    case Kind::SlotNonempty: return label == other.label;
    case Kind::HasSymbol: return symbol == other.symbol;
    case Kind::Not: return *inner == *other.inner;
  }
  return false;
}

std::string Guard::to_string() const {
  switch (kind) {
    case Kind::Always: return "always";
    case Kind::NotWrapped:
      return has_explicit_label ? "not-wrapped " + label.tag : "not-wrapped";
    case Kind::SlotEmpty: return "slot-empty " + label.tag;
    case Kind::SlotNonempty: return "slot-nonempty " + label.tag;
    case Kind::HasSymbol: return "has " + symbol.name;
    case Kind::Not: return "not (" + inner->to_string() + ")";
  }
  return "?";
}

bool Rule::operator==(const Rule& other) const {
  return name == other.name && scope == other.scope && guard == other.guard &&
         body == other.body;
}

Rule make_rewrite(std::string name, Label scope, Multiset lhs,
                  std::vector<Production> rhs, Guard guard) {
  if (lhs.empty()) throw std::invalid_argument("rewrite rule lhs must be nonempty: " + name);
  Rule r;
  r.name = std::move(name);
  r.scope = std::move(scope);
  r.guard = std::move(guard);
  r.body = RewriteSpec{std::move(lhs), std::move(rhs)};
  return r;
}

Rule make_clone(std::string name, Label scope, CloneKind kind, Label new_label, Guard guard) {
  Rule r;
  r.name = std::move(name);
  r.scope = std::move(scope);
  r.guard = std::move(guard);
  CloneSpec c;
  c.kind = kind;
  c.new_label = std::move(new_label);
  r.body = std::move(c);
  return r;
}

Rule make_wrap(std::string name, Label scope, Label outer, Label slot, Guard guard,
               Multiset trigger) {
  Rule r;
  r.name = std::move(name);
  r.scope = std::move(scope);
  r.guard = std::move(guard);
  CloneSpec c;
  c.kind = CloneKind::Wrap;
  c.outer_label = std::move(outer);
  c.slot_label = std::move(slot);
  c.trigger = std::move(trigger);
  r.body = std::move(c);
  return r;
}

static const Label* wrapper_label_for(const Guard& guard, const Rule& rule) {
  if (guard.has_explicit_label) return &guard.label;
  if (!rule.is_rewrite() && rule.clone().kind == CloneKind::Wrap)
    return &rule.clone().outer_label;
  return nullptr;
}

bool eval_guard(const Guard& guard, const MembraneNode& host, const Rule& rule) {
  switch (guard.kind) {
    case Guard::Kind::Always:
      return true;
    case Guard::Kind::NotWrapped: {
      const Label* wrapper = wrapper_label_for(guard, rule);
      if (!wrapper) return true;  // no designated wrapper: never wrapped
      return host.parent == nullptr || !(host.parent->label == *wrapper);
    }
    case Guard::Kind::SlotEmpty: {
      if (host.child_count(guard.label) != 1) return false;
      return host.unique_child(guard.label)->contents.empty();
    }
    case Guard::Kind::SlotNonempty: {
      if (host.child_count(guard.label) != 1) return false;
      return !host.unique_child(guard.label)->contents.empty();
    }
    case Guard::Kind::HasSymbol:
      return host.contents.contains_symbol(guard.symbol);
    case Guard::Kind::Not:
      return !eval_guard(*guard.inner, host, rule);
  }
  return false;
}

MembraneNode* resolve_target(const Target& target, MembraneNode& host, std::string* diagnostic) {
  switch (target.kind) {
    case Target::Kind::Here:
      return &host;
    case Target::Kind::Out:
      if (!host.parent && diagnostic) *diagnostic = "no parent for @out at the configuration root";
      return host.parent;
    case Target::Kind::InChild: {
      std::size_t n = host.child_count(target.child_label);
      if (n == 1) return host.unique_child(target.child_label);
      if (diagnostic) {
        *diagnostic = n == 0
            ? "no child labeled " + target.child_label.tag
            : std::to_string(n) + " children share label " + target.child_label.tag;
      }
      return nullptr;
    }
    case Target::Kind::InUnique:
      if (host.children.size() == 1) return host.children.front().get();
      if (diagnostic)
        *diagnostic = "@in requires exactly one child, host has " +
                      std::to_string(host.children.size());
      return nullptr;
  }
  return nullptr;
}

Multiset::Count instances(const Rule& rule, MembraneNode& host) {
  if (!(host.label == rule.scope)) return 0;
  if (!eval_guard(rule.guard, host, rule)) return 0;

  if (rule.is_rewrite()) {
    const RewriteSpec& rw = rule.rewrite();
    for (const Production& p : rw.rhs)
      if (!resolve_target(p.target, host)) return 0;
    Multiset::Count k = Multiset::kMaxMultiplicity;
    for (const auto& [sym, need] : rw.lhs.entries())
      k = std::min(k, host.contents.count(sym) / need);
    return k == Multiset::kMaxMultiplicity ? 0 : k;
  }

  const CloneSpec& c = rule.clone();
  if ((c.kind == CloneKind::CloneOut || c.kind == CloneKind::CloneSide) && !host.parent)
    return 0;
  if (!host.contents.contains(c.trigger)) return 0;
  return 1;
}

}  // namespace membrana
