#include "membrana/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace membrana {

namespace {

std::string render(int line, int col, const std::string& message, const std::string& hint) {
  std::ostringstream os;
  os << "line " << line << ", col " << col << ": " << message;
  if (!hint.empty()) os << " (" << hint << ")";
  return os.str();
}

// Keywords may carry dashes (clone-out, slot-empty); symbol and label names
// may not, so "a->b" tokenizes as a name followed by an arrow.
bool is_keyword_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '\'';
}
bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

/// Single-line scanner with column tracking (columns are 1-based).
class Cursor {
 public:
  Cursor(const std::string& text, int line) : text_(text), line_(line) {}

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }
  int col() const { return static_cast<int>(pos_) + 1; }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  void expect(char c, const std::string& hint) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c)
      fail(std::string("expected '") + c + "'", hint);
    ++pos_;
  }
  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  std::string word(const std::string& what, const std::string& hint) {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_keyword_char(text_[pos_])) ++pos_;
    if (pos_ == start) fail("expected " + what, hint);
    return text_.substr(start, pos_ - start);
  }
  std::optional<std::string> maybe_word() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_keyword_char(text_[pos_])) ++pos_;
    if (pos_ == start) return std::nullopt;
    std::string w = text_.substr(start, pos_ - start);
    pos_ = start;  // non-consuming
    return w;
  }
  std::string take_word() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_keyword_char(text_[pos_])) ++pos_;
    return text_.substr(start, pos_ - start);
  }
  std::string name_word(const std::string& what, const std::string& hint) {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
    if (pos_ == start) fail("expected " + what, hint);
    return text_.substr(start, pos_ - start);
  }
  std::string take_name() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
    return text_.substr(start, pos_ - start);
  }
  long long integer(const std::string& what) {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) fail("expected " + what, "a decimal integer");
    long long v = 0;
    try {
      v = std::stoll(text_.substr(start, pos_ - start));
    } catch (const std::exception&) {
      fail("integer out of range", "use a smaller value");
    }
    return v;
  }
  [[noreturn]] void fail(const std::string& message, const std::string& hint) {
    throw ParseError(line_, col(), message, hint);
  }
  std::string rest() {
    skip_ws();
    return text_.substr(pos_);
  }

 private:
  const std::string& text_;
  int line_;
  std::size_t pos_ = 0;
};

Multiset parse_multiset_tokens(Cursor& cur, bool at_least_one, const char* what) {
  Multiset out;
  bool any = false;
  while (true) {
    std::string token = cur.take_name();
    if (token.empty()) break;
    if (cur.consume('^')) {
      long long n = cur.integer("exponent");
      if (n <= 0)
        cur.fail("multiplicity must be positive", "omit the symbol instead of writing ^0");
      if (n > Multiset::kMaxMultiplicity) cur.fail("multiplicity above 2^31-1", "cap exceeded");
      out.add(Symbol(token), n);
    } else if (token.size() == 1) {
      out.add(Symbol(token), 1);
    } else {
      // A bare multi-character token is a run of single-character symbols.
      for (char c : token) {
        if (!std::isalnum(static_cast<unsigned char>(c)))
          cur.fail(std::string("invalid symbol character '") + c + "'",
                   "single-character symbols only in bare runs; use sym^n for long names");
        out.add(Symbol(std::string(1, c)), 1);
      }
    }
    any = true;
  }
  if (at_least_one && !any) cur.fail(std::string("expected ") + what, "at least one symbol");
  return out;
}

Guard parse_guard(Cursor& cur) {
  std::string head = cur.word(
      "guard", "not-wrapped | slot-empty <l> | slot-nonempty <l> | has <sym> | not (<guard>)");
  if (head == "not-wrapped") {
    std::string l = cur.take_name();
    if (!l.empty()) return Guard::not_wrapped(Label(l));
    return Guard::not_wrapped();
  }
  if (head == "slot-empty")
    return Guard::slot_empty(Label(cur.name_word("label", "slot-empty <label>")));
  if (head == "slot-nonempty")
    return Guard::slot_nonempty(Label(cur.name_word("label", "slot-nonempty <label>")));
  if (head == "has") return Guard::has_symbol(Symbol(cur.name_word("symbol", "has <sym>")));
  if (head == "not") {
    cur.expect('(', "not (<guard>)");
    Guard inner = parse_guard(cur);
    cur.expect(')', "not (<guard>)");
    return Guard::negate(std::move(inner));
  }
  cur.fail("guard outside the closed set: " + head,
           "allowed: not-wrapped, slot-empty, slot-nonempty, has, not");
}

SystemSpec::StructureNode parse_structure_node(Cursor& cur) {
  cur.expect('[', "structure [<label> <child>*]");
  SystemSpec::StructureNode node;
  node.label = Label(cur.name_word("label", "every bracket opens with a label"));
  while (true) {
    if (cur.consume(']')) break;
    if (cur.peek() == '[') {
      node.children.push_back(parse_structure_node(cur));
    } else if (cur.at_end()) {
      cur.fail("unclosed bracket", "add ']'");
    } else {
      cur.fail("expected '[' or ']' in structure", "children are bracketed");
    }
  }
  return node;
}

Target parse_target_suffix(Cursor& cur) {
  if (!cur.consume('@')) return Target::here();
  std::string t = cur.name_word("target", "@here | @out | @in | @<label>");
  if (t == "here") return Target::here();
  if (t == "out") return Target::out();
  if (t == "in") return Target::in_unique();
  return Target::in_child(Label(t));
}

Rule parse_rule_line(Cursor& cur) {
  std::string id = cur.name_word("rule id", "rule <id> @<label> [if <guard>]: ...");
  cur.expect('@', "rule <id> @<label> ...");
  Label scope(cur.name_word("scope label", "rule <id> @<label> ..."));
  Guard guard = Guard::always();
  {
    auto w = cur.maybe_word();
    if (w && *w == "if") {
      cur.take_word();
      guard = parse_guard(cur);
    }
  }
  cur.expect(':', "rule header ends with ':'");

  auto first = cur.maybe_word();
  if (first && (*first == "clone-out" || *first == "clone-side" || *first == "clone-in" ||
                *first == "wrap")) {
    std::string kw = cur.take_word();
    Multiset trigger;
    auto parse_trigger = [&]() {
      auto nw = cur.maybe_word();
      if (nw && *nw == "consuming") {
        cur.take_word();
        trigger = parse_multiset_tokens(cur, true, "trigger symbols");
      }
    };
    if (kw == "wrap") {
      Label outer(cur.name_word("outer label", "wrap <outer> <slot>"));
      Label slot(cur.name_word("slot label", "wrap <outer> <slot>"));
      parse_trigger();
      if (!cur.at_end()) cur.fail("trailing text after wrap rule", "remove it");
      return make_wrap(id, scope, outer, slot, guard, trigger);
    }
    CloneKind kind = kw == "clone-out"    ? CloneKind::CloneOut
                     : kw == "clone-side" ? CloneKind::CloneSide
                                          : CloneKind::CloneIn;
    Label new_label(cur.name_word("new label", kw + " <newlabel>"));
    parse_trigger();
    if (!cur.at_end()) cur.fail("trailing text after clone rule", "remove it");
    Rule r = make_clone(id, scope, kind, new_label, guard);
    std::get<CloneSpec>(r.body).trigger = trigger;
    return r;
  }

  // Rewrite: <sym>+ -> (<sym>[@target])*
  Multiset lhs;
  while (true) {
    if (cur.peek() == '-') break;  // arrow ahead
    std::string w = cur.take_name();
    if (w.empty()) break;
    lhs.add(Symbol(w), 1);
  }
  if (lhs.empty())
    cur.fail("rewrite rule needs a nonempty left-hand side", "list symbols before ->");
  if (!(cur.consume('-') && cur.consume('>')))
    cur.fail("malformed arrow", "write '->' between lhs and rhs");
  std::vector<Production> rhs;
  while (!cur.at_end()) {
    std::string w = cur.take_name();
    if (w.empty()) cur.fail("expected production symbol", "productions are sym[@target]");
    Target t = parse_target_suffix(cur);
    rhs.push_back(Production{Symbol(w), t});
  }
  return make_rewrite(id, scope, lhs, rhs, guard);
}

void collect_labels(const SystemSpec::StructureNode& node, std::set<std::string>& out,
                    bool& duplicate, std::string& dup_label) {
  if (!out.insert(node.label.tag).second) {
    duplicate = true;
    dup_label = node.label.tag;
  }
  for (const auto& c : node.children) collect_labels(c, out, duplicate, dup_label);
}

void serialize_structure(const SystemSpec::StructureNode& node, std::ostringstream& os) {
  os << '[' << node.label.tag;
  for (const auto& c : node.children) {
    os << ' ';
    serialize_structure(c, os);
  }
  os << ']';
}

std::string serialize_rule_body(const Rule& r) {
  std::ostringstream os;
  if (r.is_rewrite()) {
    const RewriteSpec& rw = r.rewrite();
    bool first = true;
    for (const auto& [sym, n] : rw.lhs.entries())
      for (Multiset::Count i = 0; i < n; ++i) {
        if (!first) os << ' ';
        first = false;
        os << sym.name;
      }
    os << " ->";
    for (const Production& p : rw.rhs) {
      os << ' ' << p.symbol.name;
      if (p.target.kind != Target::Kind::Here) os << p.target.to_string();
    }
  } else {
    const CloneSpec& c = r.clone();
    switch (c.kind) {
      case CloneKind::CloneOut: os << "clone-out " << c.new_label.tag; break;
      case CloneKind::CloneSide: os << "clone-side " << c.new_label.tag; break;
      case CloneKind::CloneIn: os << "clone-in " << c.new_label.tag; break;
      case CloneKind::Wrap: os << "wrap " << c.outer_label.tag << ' ' << c.slot_label.tag; break;
    }
    if (!c.trigger.empty()) os << " consuming " << c.trigger.to_string();
  }
  return os.str();
}

std::unique_ptr<MembraneNode> build_structure(const SystemSpec::StructureNode& node,
                                              const std::map<std::string, Multiset>& contents,
                                              NodeIdAllocator& ids) {
  std::vector<std::unique_ptr<MembraneNode>> kids;
  kids.reserve(node.children.size());
  for (const auto& c : node.children) kids.push_back(build_structure(c, contents, ids));
  Multiset m;
  auto it = contents.find(node.label.tag);
  if (it != contents.end()) m = it->second;
  return build_membrane(ids, node.label, std::move(m), std::move(kids));
}

}  // namespace

ParseError::ParseError(int line, int col, const std::string& message, const std::string& hint)
    : std::runtime_error(render(line, col, message, hint)), line_(line), col_(col) {}

Multiset parse_multiset(const std::string& text) {
  Cursor cur(text, 1);
  Multiset m = parse_multiset_tokens(cur, false, "symbols");
  if (!cur.at_end()) cur.fail("unexpected character in multiset", "symbols are alphanumeric");
  return m;
}

SystemSpec parse_system(const std::string& text) {
  SystemSpec spec;
  bool saw_system = false, saw_structure = false;
  std::set<std::string> structure_labels;
  std::set<std::string> rule_ids;
  std::set<std::string> contents_labels;

  std::istringstream stream(text);
  std::string raw;
  int line_no = 0;
  int last_line = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    last_line = line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    Cursor cur(raw, line_no);
    if (cur.at_end()) continue;

    std::string head = cur.word("directive", "system | mode | seed | structure | contents | rule");
    if (head == "system") {
      if (saw_system) cur.fail("duplicate system line", "one system per file");
      spec.name = cur.name_word("system name", "system <name>");
      if (!cur.at_end()) cur.fail("trailing text after system name", "remove it");
      saw_system = true;
    } else if (head == "mode") {
      std::string rest = cur.rest();
      auto mode = Mode::parse(rest);
      if (!mode) cur.fail("unknown mode: " + rest, "sequential | minimal | bounded <k> | maximal");
      spec.mode = *mode;
    } else if (head == "seed") {
      long long s = cur.integer("seed");
      if (!cur.at_end()) cur.fail("trailing text after seed", "remove it");
      spec.seed = static_cast<std::uint64_t>(s);
    } else if (head == "structure") {
      if (saw_structure) cur.fail("duplicate structure line", "one structure per file");
      spec.structure = parse_structure_node(cur);
      if (!cur.at_end()) cur.fail("trailing text after structure", "remove it");
      bool dup = false;
      std::string dup_label;
      collect_labels(spec.structure, structure_labels, dup, dup_label);
      if (dup)
        cur.fail("label '" + dup_label + "' declared twice in structure",
                 "structure labels must be unique at parse time");
      saw_structure = true;
    } else if (head == "contents") {
      std::string label = cur.name_word("label", "contents <label>: <sym>^<n> ...");
      cur.expect(':', "contents <label>: ...");
      Multiset m = parse_multiset_tokens(cur, true, "contents symbols");
      if (!cur.at_end()) cur.fail("unexpected character in contents", "symbols are alphanumeric");
      if (!contents_labels.insert(label).second)
        cur.fail("duplicate contents line for label " + label, "merge the lines");
      spec.contents[label] = std::move(m);
    } else if (head == "rule") {
      Rule r = parse_rule_line(cur);
      if (!rule_ids.insert(r.name).second)
        cur.fail("duplicate rule id " + r.name, "rule ids must be unique");
      if (r.guard.kind == Guard::Kind::NotWrapped && !r.guard.has_explicit_label &&
          (r.is_rewrite() || r.clone().kind != CloneKind::Wrap))
        cur.fail("bare not-wrapped needs a wrap rule", "write not-wrapped <label> here");
      spec.rules.push_back(std::move(r));
    } else {
      cur.fail("unknown directive: " + head, "system | mode | seed | structure | contents | rule");
    }
  }

  auto fail_global = [&](const std::string& msg, const std::string& hint) {
    throw ParseError(last_line == 0 ? 1 : last_line, 1, msg, hint);
  };
  if (!saw_system) fail_global("missing system line", "start with: system <name>");
  if (!saw_structure) fail_global("missing structure line", "add: structure [<label> ...]");

  for (const auto& [label, m] : spec.contents)
    if (!structure_labels.count(label))
      fail_global("contents for unknown label " + label, "declare it in the structure");
  // Rule scopes may also name labels that only come into existence through
  // cloning (clone new-labels and wrap shells), as in self-reproducing
  // systems whose rules address membranes created at run time.
  std::set<std::string> known = structure_labels;
  for (const Rule& r : spec.rules) {
    if (r.is_rewrite()) continue;
    const CloneSpec& c = r.clone();
    if (c.kind == CloneKind::Wrap) {
      known.insert(c.outer_label.tag);
      known.insert(c.slot_label.tag);
    } else {
      known.insert(c.new_label.tag);
    }
  }
  for (const Rule& r : spec.rules)
    if (!known.count(r.scope.tag))
      fail_global("rule " + r.name + " scoped to unknown label " + r.scope.tag,
                  "declare the label in the structure or introduce it with a clone rule");
  return spec;
}

std::string serialize_system(const SystemSpec& spec) {
  std::ostringstream os;
  os << "system " << spec.name << '\n';
  os << "mode " << spec.mode.to_string() << '\n';
  if (spec.seed) os << "seed " << *spec.seed << '\n';
  os << "structure ";
  serialize_structure(spec.structure, os);
  os << '\n';
  for (const auto& [label, m] : spec.contents) {
    if (m.empty()) continue;
    os << "contents " << label << ": " << m.to_string() << '\n';
  }
  for (const Rule& r : spec.rules) {
    os << "rule " << r.name << " @" << r.scope.tag;
    if (!(r.guard == Guard::always())) os << " if " << r.guard.to_string();
    os << ": " << serialize_rule_body(r) << '\n';
  }
  return os.str();
}

Configuration build_configuration(const SystemSpec& spec,
                                  std::optional<std::uint64_t> seed_override) {
  NodeIdAllocator ids;
  auto root = build_structure(spec.structure, spec.contents, ids);
  std::uint64_t seed = seed_override ? *seed_override : spec.seed.value_or(1);
  return Configuration(std::move(root), spec.rules, seed);
}

}  // namespace membrana
