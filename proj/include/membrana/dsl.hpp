#ifndef MEMBRANA_DSL_HPP
#define MEMBRANA_DSL_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "membrana/engine.hpp"

namespace membrana {

/// Parse failure with position information. `what()` renders
/// "line L, col C: message (hint)".
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int col, const std::string& message, const std::string& hint = "");
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

/// A parsed .psys file: name, mode, structure skeleton, per-label contents,
/// and the ruleset. Rule scopes and contents labels must occur in the
/// structure; structure labels are unique at parse time (cloning may
/// duplicate them later).
struct SystemSpec {
  struct StructureNode {
    Label label;
    std::vector<StructureNode> children;
    bool operator==(const StructureNode&) const = default;
  };

  std::string name;
  Mode mode = Mode::maximal();
  std::optional<std::uint64_t> seed;
  StructureNode structure;
  std::map<std::string, Multiset> contents;  // label tag -> objects
  std::vector<Rule> rules;

  bool operator==(const SystemSpec&) const = default;
};

/// Parses the .psys grammar:
///   system <name>
///   mode sequential|minimal|bounded <k>|maximal
///   seed <n>                                   (optional)
///   structure [<label> <child>*]
///   contents <label>: <sym>^<n> ...            (^1 may be omitted)
///   rule <id> @<label> [if <guard>]: <sym>+ -> (<sym>[@here|@out|@in|@<label>])*
///   rule <id> @<label> [if <guard>]: clone-out|clone-side|clone-in <newlabel>
///   rule <id> @<label> [if <guard>]: wrap <outer> <slot> [consuming <sym>+]
/// Guards: not-wrapped [<label>] | slot-empty <l> | slot-nonempty <l> |
///         has <sym> | not (<guard>).
/// Comments run from '#' to end of line. CRLF and LF are both accepted.
SystemSpec parse_system(const std::string& text);

/// Canonical rendering: sorted contents labels and symbols, rules in
/// declaration order. parse(serialize(spec)) == spec for valid specs.
std::string serialize_system(const SystemSpec& spec);

/// Parses "a^2 b^3" (exponent form, multi-character symbols allowed) or a
/// bare run of single-character symbols ("abbbac"). Tokens merge additively.
/// Zero or negative exponents are errors.
Multiset parse_multiset(const std::string& text);

/// Instantiates a runnable configuration from a spec. `seed_override`
/// (when set) wins over the spec's seed line; the default seed is 1.
Configuration build_configuration(const SystemSpec& spec,
                                  std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace membrana

#endif  // MEMBRANA_DSL_HPP
