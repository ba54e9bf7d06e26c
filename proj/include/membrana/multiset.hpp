#ifndef MEMBRANA_MULTISET_HPP
#define MEMBRANA_MULTISET_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

namespace membrana {

/// Raised when a multiplicity would exceed the documented cap (2^31-1)
/// or an operation would drive a count below zero.
class MultisetError : public std::runtime_error {
 public:
  explicit MultisetError(const std::string& what) : std::runtime_error(what) {}
};

/// An object symbol. Symbols compare by name only.
struct Symbol {
  std::string name;

  Symbol() = default;
  explicit Symbol(std::string n) : name(std::move(n)) {
    if (name.empty()) throw MultisetError("symbol name must be nonempty");
  }

  auto operator<=>(const Symbol&) const = default;
};

/// Unordered collection of symbols with nonnegative multiplicities.
/// No zero-count entry is ever stored; equality is pure count equality.
/// Multiplicities are capped at 2^31-1; exceeding the cap is an error.
class Multiset {
 public:
  using Count = std::int64_t;
  static constexpr Count kMaxMultiplicity = 2147483647;  // 2^31-1

  Multiset() = default;

  /// Parses a plain symbol string, e.g. "abbbac" -> {a:2, b:3, c:1}.
  /// Every character must be alphanumeric; each character is one symbol.
  static Multiset from_string(const std::string& s);

  Count count(const Symbol& s) const {
    auto it = counts_.find(s);
    return it == counts_.end() ? 0 : it->second;
  }
  bool contains_symbol(const Symbol& s) const { return count(s) > 0; }
  bool empty() const { return counts_.empty(); }

  /// Total number of objects (sum of multiplicities).
  Count size() const;

  /// Number of distinct symbols.
  std::size_t distinct() const { return counts_.size(); }

  void add(const Symbol& s, Count n);
  /// Removes n copies of s; underflow is an error.
  void remove(const Symbol& s, Count n);

  /// Pointwise sum.
  Multiset plus(const Multiset& other) const;
  /// Saturation-free subtraction: other must be contained in *this.
  Multiset minus(const Multiset& other) const;
  /// True iff other is pointwise <= *this.
  bool contains(const Multiset& other) const;

  void add_all(const Multiset& other);
  /// Removes other from *this; underflow is an error.
  void remove_all(const Multiset& other);

  bool operator==(const Multiset& other) const { return counts_ == other.counts_; }

  /// Canonical rendering: symbols in name order, "a^2 b^3" style,
  /// exponent omitted when 1. Empty multiset renders as "".
  std::string to_string() const;

  const std::map<Symbol, Count>& entries() const { return counts_; }

 private:
  std::map<Symbol, Count> counts_;
};

}  // namespace membrana

#endif  // MEMBRANA_MULTISET_HPP
