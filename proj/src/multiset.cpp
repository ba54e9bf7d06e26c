#include "membrana/multiset.hpp"

#include <cctype>
#include <sstream>

namespace membrana {

Multiset Multiset::from_string(const std::string& s) {
  Multiset m;
  for (std::size_t i = 0; i < s.size(); ++i) {
    unsigned char ch = static_cast<unsigned char>(s[i]);
    if (!std::isalnum(ch)) {
      std::ostringstream os;
      os << "invalid symbol character '" << s[i] << "' at position " << i;
      throw MultisetError(os.str());
    }
    m.add(Symbol(std::string(1, s[i])), 1);
  }
  return m;
}

Multiset::Count Multiset::size() const {
  Count total = 0;
  for (const auto& [sym, n] : counts_) total += n;
  return total;
}

void Multiset::add(const Symbol& s, Count n) {
  if (n < 0) throw MultisetError("cannot add a negative count");
  if (n == 0) return;
  Count& slot = counts_[s];
  if (slot > kMaxMultiplicity - n) {
    counts_.erase(s);
    throw MultisetError("multiplicity overflow for symbol '" + s.name + "' (cap 2^31-1)");
  }
  slot += n;
}

void Multiset::remove(const Symbol& s, Count n) {
  if (n < 0) throw MultisetError("cannot remove a negative count");
  if (n == 0) return;
  auto it = counts_.find(s);
  if (it == counts_.end() || it->second < n)
    throw MultisetError("multiset underflow removing " + std::to_string(n) + " of '" + s.name + "'");
  it->second -= n;
  if (it->second == 0) counts_.erase(it);
}

Multiset Multiset::plus(const Multiset& other) const {
  Multiset out = *this;
  out.add_all(other);
  return out;
}

Multiset Multiset::minus(const Multiset& other) const {
  Multiset out = *this;
  out.remove_all(other);
  return out;
}

bool Multiset::contains(const Multiset& other) const {
  for (const auto& [sym, n] : other.counts_)
    if (count(sym) < n) return false;
  return true;
}

void Multiset::add_all(const Multiset& other) {
  for (const auto& [sym, n] : other.counts_) add(sym, n);
}

void Multiset::remove_all(const Multiset& other) {
  if (!contains(other)) throw MultisetError("multiset subtraction without containment");
  for (const auto& [sym, n] : other.counts_) remove(sym, n);
}

std::string Multiset::to_string() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [sym, n] : counts_) {
    if (!first) os << ' ';
    first = false;
    os << sym.name;
    // Multi-character names always carry an exponent so that a bare token
    // is unambiguously a run of single-character symbols when re-parsed.
    if (n != 1 || sym.name.size() > 1) os << '^' << n;
  }
  return os.str();
}

}  // namespace membrana
