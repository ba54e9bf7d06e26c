#ifndef MEMBRANA_RULE_HPP
#define MEMBRANA_RULE_HPP

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "membrana/membrane.hpp"
#include "membrana/multiset.hpp"

namespace membrana {

/// Where a production lands relative to the host membrane.
struct Target {
  enum class Kind { Here, Out, InChild, InUnique };
  Kind kind = Kind::Here;
  Label child_label;  // meaningful for InChild only

  static Target here() { return {Kind::Here, Label()}; }
  static Target out() { return {Kind::Out, Label()}; }
  static Target in_child(Label l) { return {Kind::InChild, std::move(l)}; }
  static Target in_unique() { return {Kind::InUnique, Label()}; }

  bool operator==(const Target&) const = default;
  std::string to_string() const;
};

/// Guard algebra: a single (possibly negated) atom evaluated on the
/// start-of-step snapshot. SlotEmpty/SlotNonempty look at the unique direct
/// child with the given label (missing or duplicated label: both false).
/// NotWrapped is true when the host has no parent or the parent's label
/// differs from the wrapper label; when no explicit label is given the
/// rule's wrap outer label is used.
struct Guard {
  enum class Kind { Always, NotWrapped, SlotEmpty, SlotNonempty, HasSymbol, Not };
  Kind kind = Kind::Always;
  Label label;                    // SlotEmpty/SlotNonempty/NotWrapped(explicit)
  Symbol symbol;                  // HasSymbol
  bool has_explicit_label = false;  // NotWrapped only
  std::shared_ptr<const Guard> inner;  // Not

  static Guard always() { return {}; }
  static Guard not_wrapped() {
    Guard g; g.kind = Kind::NotWrapped; return g;
  }
  static Guard not_wrapped(Label wrapper) {
    Guard g; g.kind = Kind::NotWrapped; g.label = std::move(wrapper);
    g.has_explicit_label = true; return g;
  }
  static Guard slot_empty(Label l) {
    Guard g; g.kind = Kind::SlotEmpty; g.label = std::move(l); return g;
  }
  static Guard slot_nonempty(Label l) {
    Guard g; g.kind = Kind::SlotNonempty; g.label = std::move(l); return g;
  }
  static Guard has_symbol(Symbol s) {
    Guard g; g.kind = Kind::HasSymbol; g.symbol = std::move(s); return g;
  }
  static Guard negate(Guard g) {
    Guard out; out.kind = Kind::Not;
    out.inner = std::make_shared<Guard>(std::move(g));
    return out;
  }

  bool operator==(const Guard& other) const;
  std::string to_string() const;
};

struct Production {
  Symbol symbol;
  Target target;
  bool operator==(const Production&) const = default;
};

struct RewriteSpec {
  Multiset lhs;                     // nonempty
  std::vector<Production> rhs;      // may be empty (erasing rule)
  bool operator==(const RewriteSpec&) const = default;
};

enum class CloneKind { CloneOut, CloneSide, CloneIn, Wrap };

struct CloneSpec {
  CloneKind kind = CloneKind::CloneOut;
  Label new_label;     // CloneOut/CloneSide/CloneIn
  Label outer_label;   // Wrap
  Label slot_label;    // Wrap
  /// Optional licence consumed from the host when the clone applies;
  /// with a trigger present the rule has one instance only while the
  /// host contains it, so a single deposit arms exactly one application.
  Multiset trigger;
  bool operator==(const CloneSpec&) const = default;
};

/// A named rule scoped to a membrane label: either a guarded rewrite
/// (transmutation/translocation) or a guarded structural clone.
struct Rule {
  std::string name;   // unique within a system
  Label scope;
  Guard guard;
  std::variant<RewriteSpec, CloneSpec> body;

  bool is_rewrite() const { return std::holds_alternative<RewriteSpec>(body); }
  const RewriteSpec& rewrite() const { return std::get<RewriteSpec>(body); }
  const CloneSpec& clone() const { return std::get<CloneSpec>(body); }

  bool operator==(const Rule& other) const;
};

Rule make_rewrite(std::string name, Label scope, Multiset lhs,
                  std::vector<Production> rhs, Guard guard = Guard::always());
Rule make_clone(std::string name, Label scope, CloneKind kind, Label new_label,
                Guard guard = Guard::always());
Rule make_wrap(std::string name, Label scope, Label outer, Label slot,
               Guard guard = Guard::always(), Multiset trigger = {});

/// Evaluates a guard for `host` under `rule` (the rule supplies the default
/// wrapper label for a bare NotWrapped).
bool eval_guard(const Guard& guard, const MembraneNode& host, const Rule& rule);

/// Resolves a target from `host`. Returns null when unresolvable (no parent
/// for Out, missing/ambiguous child for InChild, child count != 1 for
/// InUnique); `diagnostic` (optional) receives the reason.
MembraneNode* resolve_target(const Target& target, MembraneNode& host,
                             std::string* diagnostic = nullptr);

/// Number of simultaneously applicable instances of `rule` on `host`
/// against the current snapshot: for rewrites the floor over lhs symbols
/// of available/required (0 when the guard is false or any rhs target is
/// unresolvable); for clones 1 when guard and trigger hold, else 0.
/// Structural preconditions: CloneOut/CloneSide need a parent.
Multiset::Count instances(const Rule& rule, MembraneNode& host);

}  // namespace membrana

#endif  // MEMBRANA_RULE_HPP
