#include "membrana/comparator.hpp"

namespace membrana {

namespace {

const Symbol kA{"a"};
const Symbol kB{"b"};
const Symbol kC{"c"};
const Label kH0{"h0"};
const Label kH1{"h1"};
const Label kH2{"h2"};

Configuration build_comparator(Multiset::Count x, Multiset::Count y, bool maximizing,
                               std::uint64_t seed) {
  if (x < 0 || y < 0) throw EngineError("comparator inputs must be nonnegative");
  Multiset start;
  start.add(kA, x);  // throws on overflow past the multiplicity cap
  start.add(kB, y);

  NodeIdAllocator ids;
  std::vector<std::unique_ptr<MembraneNode>> kids;
  kids.push_back(build_membrane(ids, kH1, {}));
  kids.push_back(build_membrane(ids, kH2, {}));
  auto root = build_membrane(ids, kH0, std::move(start), std::move(kids));

  std::vector<Rule> rules;
  Multiset pair_lhs;
  pair_lhs.add(kA, 1);
  pair_lhs.add(kB, 1);
  rules.push_back(make_rewrite("R1", kH0, pair_lhs,
                               {{kA, Target::in_child(kH1)}, {kB, Target::in_child(kH1)}}));
  if (maximizing) {
    rules.push_back(make_rewrite("R2", kH0, Multiset::from_string("a"),
                                 {{kB, Target::in_child(kH2)}},
                                 Guard::negate(Guard::has_symbol(kB))));
    rules.push_back(make_rewrite("R3", kH0, Multiset::from_string("b"),
                                 {{kB, Target::in_child(kH2)}},
                                 Guard::negate(Guard::has_symbol(kA))));
  } else {
    rules.push_back(make_rewrite("R2", kH0, Multiset::from_string("a"),
                                 {{kA, Target::in_child(kH1)}},
                                 Guard::negate(Guard::has_symbol(kB))));
    rules.push_back(make_rewrite("R3", kH0, Multiset::from_string("b"),
                                 {{kA, Target::in_child(kH1)}},
                                 Guard::negate(Guard::has_symbol(kA))));
  }
  rules.push_back(make_rewrite("R4", kH1, Multiset::from_string("b"), {{kC, Target::out()}}));
  rules.push_back(make_rewrite("R5", kH0, Multiset::from_string("c"),
                               {{kB, Target::in_child(kH2)}}));

  return Configuration(std::move(root), std::move(rules), seed);
}

}  // namespace

Configuration build_max_comparator(Multiset::Count x, Multiset::Count y, std::uint64_t seed) {
  return build_comparator(x, y, true, seed);
}

Configuration build_min_comparator(Multiset::Count x, Multiset::Count y, std::uint64_t seed) {
  return build_comparator(x, y, false, seed);
}

ComparatorResult run_comparator(Configuration& config, Mode mode, std::uint64_t max_steps) {
  RunResult run = config.run_to_halt(mode, max_steps);
  if (!run.halted)
    throw EngineError("comparator did not halt within " + std::to_string(max_steps) + " steps");
  ComparatorResult result;
  result.steps = run.steps;
  MembraneNode& h0 = config.root();
  MembraneNode* h1 = h0.unique_child(kH1);
  MembraneNode* h2 = h0.unique_child(kH2);
  if (!h1 || !h2) throw EngineError("comparator structure is not [h0 [h1] [h2]]");
  result.min_value = h1->contents.size();
  result.max_value = h2->contents.size();
  return result;
}

std::uint64_t settle_steps(Multiset::Count x, Multiset::Count y, Mode mode, std::uint64_t seed) {
  Configuration config = build_max_comparator(x, y, seed);
  return run_comparator(config, mode).steps;
}

}  // namespace membrana
