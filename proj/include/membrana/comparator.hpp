#ifndef MEMBRANA_COMPARATOR_HPP
#define MEMBRANA_COMPARATOR_HPP

#include <cstdint>

#include "membrana/engine.hpp"

namespace membrana {

/// Result of running a two-integer comparator to quiescence.
struct ComparatorResult {
  Multiset::Count min_value = 0;  // multiplicity found in h1
  Multiset::Count max_value = 0;  // multiplicity found in h2
  std::uint64_t steps = 0;        // synchronized steps to halt
};

/// Builds the maximizing comparator: structure [h0 [h1] [h2]] with
/// h0 = {a^x, b^y}. On halt (any mode, any seed) h1 holds a^min(x,y),
/// h2 holds b^max(x,y) and h0 is empty.
///
/// Ruleset (pairing plus guarded drains; the b's paired into h1 return
/// through h0 as the auxiliary symbol c so they can never pair twice):
///   R1@h0:               a b -> a@h1 b@h1
///   R2@h0 if not(has b): a -> b@h2
///   R3@h0 if not(has a): b -> b@h2
///   R4@h1:               b -> c@out
///   R5@h0:               c -> b@h2
Configuration build_max_comparator(Multiset::Count x, Multiset::Count y,
                                   std::uint64_t seed = 1);

/// Minimizing variant: on halt h1 holds a^max(x,y) and h2 holds b^min(x,y).
///   R1@h0:                a b -> a@h1 b@h1
///   R2'@h0 if not(has b): a -> a@h1
///   R3'@h0 if not(has a): b -> a@h1
///   R4'@h1:               b -> c@out
///   R5'@h0:               c -> b@h2
Configuration build_min_comparator(Multiset::Count x, Multiset::Count y,
                                   std::uint64_t seed = 1);

/// Runs a comparator configuration to halt and reads h1/h2 multiplicities.
/// Throws EngineError if the run does not halt within max_steps.
ComparatorResult run_comparator(Configuration& config, Mode mode,
                                std::uint64_t max_steps = 1000000);

/// Steps-to-halt for the maximizing comparator on (x, y) under `mode`.
std::uint64_t settle_steps(Multiset::Count x, Multiset::Count y, Mode mode,
                           std::uint64_t seed = 1);

}  // namespace membrana

#endif  // MEMBRANA_COMPARATOR_HPP
