#ifndef MEMBRANA_SORTER_HPP
#define MEMBRANA_SORTER_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "membrana/engine.hpp"

namespace membrana {

class SorterError : public std::runtime_error {
 public:
  explicit SorterError(const std::string& what) : std::runtime_error(what) {}
};

/// One insertion's observable behavior.
struct InsertionTrace {
  Multiset::Count value = 0;
  /// Comparisons in cascade order: (cell index from the outside, incoming
  /// value, mobilized partner value).
  struct Comparison {
    int cell = 0;
    Multiset::Count incoming = 0;
    Multiset::Count partner = 0;
  };
  std::vector<Comparison> comparisons;
  bool reproduced = false;
  std::uint64_t steps = 0;
};

struct SorterStats {
  std::uint64_t insertions = 0;
  std::uint64_t settlements = 0;     // comparator sub-runs (cells that paired)
  std::uint64_t reproductions = 0;   // wrap firings
  std::uint64_t total_steps = 0;     // synchronized engine steps
};

/// The self-reproducing comparator-chain sorter. The configuration is a
/// strictly nested chain of comparator cells inside the environment [e]:
///
///   [e [h0 [h1 slot] [c0 [c1 slot] ... [c0 [c1 slot] [h2 terminal]] ...]]]
///
/// Slots hold the settled residents (ascending outside-in, as a's); the
/// innermost terminal h2 holds the running maximum (as b's). Each insertion
/// injects the value into the outermost cell and runs the engine to
/// quiescence: the value cascades inward, each visited cell mobilizes its
/// resident (slot rule a -> b@out) or the terminal occupant (h2 rule
/// b -> b@out), compares by pairing, keeps the minimum in its slot and
/// forwards the maximum. When the maximum comes to rest in the terminal
/// after a comparison, the cell deposits a wrap licence and the terminal
/// is promoted into a fresh innermost cell [c0 [c1] [h2]] for the next
/// insertion. Everything runs through ordinary guarded rewrites plus one
/// wrap rule; no tree surgery happens outside the engine.
class SorterState {
 public:
  explicit SorterState(Mode mode = Mode::maximal(), std::uint64_t seed = 1);

  /// Inserts a value (>= 1; zero is indistinguishable from absence).
  /// Runs to quiescence before returning. Throws SorterError on a
  /// non-positive value or when the previous insertion failed to settle.
  InsertionTrace insert(Multiset::Count value);

  /// Residents outside-in followed by the terminal occupant: a
  /// non-decreasing permutation of everything inserted. Requires a
  /// settled state.
  std::vector<Multiset::Count> read_sorted() const;

  /// Number of comparator cells in the chain: max(1, insertions).
  int depth() const;

  bool settled() const { return settled_; }
  const SorterStats& stats() const { return stats_; }
  Mode mode() const { return mode_; }
  Configuration& config() { return config_; }
  const Configuration& config() const { return config_; }

  /// Observers for trace recording: called for every injection and every
  /// synchronized step performed by insert().
  using StepObserver = std::function<void(const StepReport&)>;
  using InjectObserver = std::function<void(NodeId, const Multiset&)>;
  void set_observers(StepObserver on_step, InjectObserver on_inject) {
    on_step_ = std::move(on_step);
    on_inject_ = std::move(on_inject);
  }

  /// The engine ruleset realizing the sorter (shared by every cell).
  static std::vector<Rule> ruleset();

 private:
  MembraneNode* outermost_body();
  const MembraneNode* outermost_body() const;

  Configuration config_;
  Mode mode_;
  SorterStats stats_;
  bool settled_ = true;
  std::uint64_t max_steps_ = 1000000;
  StepObserver on_step_;
  InjectObserver on_inject_;
};

/// Sorts a whole stream: a fresh sorter, one insertion per value.
/// Returns the sorted list and the accumulated counters.
std::pair<std::vector<Multiset::Count>, SorterStats> sort_stream(
    const std::vector<Multiset::Count>& values, Mode mode = Mode::maximal(),
    std::uint64_t seed = 1);

}  // namespace membrana

#endif  // MEMBRANA_SORTER_HPP
