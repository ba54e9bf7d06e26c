#include <doctest.h>

#include <thread>

#include "membrana/comparator.hpp"
#include "membrana/engine.hpp"

using namespace membrana;

namespace {

Production prod(const char* sym, Target t) { return Production{Symbol(sym), t}; }

Configuration self_loop(std::uint64_t seed) {
  NodeIdAllocator ids;
  auto root = build_membrane(ids, Label("m"), Multiset::from_string("a"));
  std::vector<Rule> rules;
  rules.push_back(make_rewrite("loop", Label("m"), Multiset::from_string("a"),
                               {prod("a", Target::here())}));
  return Configuration(std::move(root), std::move(rules), seed);
}

}  // namespace

TEST_CASE("mode parsing and rendering") {
  CHECK(Mode::parse("sequential")->kind == Mode::Kind::Sequential);
  CHECK(Mode::parse("minimal")->kind == Mode::Kind::MinimalParallel);
  CHECK(Mode::parse("maximal")->kind == Mode::Kind::MaximalParallel);
  CHECK(Mode::parse("bounded 2")->limit == 2);
  CHECK(Mode::parse("bounded(3)")->limit == 3);
  CHECK_FALSE(Mode::parse("bounded 0").has_value());
  CHECK_FALSE(Mode::parse("nonsense").has_value());
  CHECK(Mode::bounded(2).to_string() == "bounded 2");
}

TEST_CASE("empty configuration with no rules halts in 0 steps") {
  NodeIdAllocator ids;
  auto root = build_membrane(ids, Label("m"), {});
  Configuration config(std::move(root), {}, 1);
  CHECK(config.is_halted());
  RunResult r = config.run_to_halt(Mode::maximal());
  CHECK(r.halted);
  CHECK(r.steps == 0);
}

TEST_CASE("step on a halted configuration throws") {
  NodeIdAllocator ids;
  auto root = build_membrane(ids, Label("m"), {});
  Configuration config(std::move(root), {}, 1);
  CHECK_THROWS_AS(config.step(Mode::maximal()), EngineError);
}

TEST_CASE("rules with nonempty lhs on empty contents leave the system halted") {
  NodeIdAllocator ids;
  auto root = build_membrane(ids, Label("m"), {});
  std::vector<Rule> rules;
  rules.push_back(make_rewrite("R", Label("m"), Multiset::from_string("a"), {}));
  Configuration config(std::move(root), std::move(rules), 1);
  CHECK(config.is_halted());
}

TEST_CASE("self-loop a->a never halts; max_steps reported") {
  Configuration config = self_loop(9);
  RunResult r = config.run_to_halt(Mode::maximal(), 100);
  CHECK_FALSE(r.halted);
  CHECK(r.steps == 100);
}

TEST_CASE("sequential fires exactly one instance per step") {
  Configuration config = build_max_comparator(5, 3, 1);
  StepReport report = config.step(Mode::sequential());
  REQUIRE(report.firings.size() == 1);
  CHECK(report.firings[0].rule == "R1");
  CHECK(report.firings[0].count == 1);
  // After one R1, h0 = {a:4, b:2}.
  CHECK(config.root().contents == Multiset::from_string("aaaabb"));
}

TEST_CASE("maximal step fires R1 three times on the (5,3) comparator") {
  Configuration config = build_max_comparator(5, 3, 7);
  StepReport report = config.step(Mode::maximal());
  REQUIRE(report.firings.size() == 1);
  CHECK(report.firings[0].rule == "R1");
  CHECK(report.firings[0].count == 3);
}

TEST_CASE("bounded(k) fires at most k instances") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Configuration config = build_max_comparator(10, 10, seed);
    StepReport report = config.step(Mode::bounded(2));
    Multiset::Count total = 0;
    for (const auto& f : report.firings) total += f.count;
    CHECK(total >= 1);
    CHECK(total <= 2);
  }
}

TEST_CASE("minimal step fires a nonempty subset of a maximal set") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Configuration config = build_max_comparator(6, 4, seed);
    StepReport report = config.step(Mode::minimal());
    Multiset::Count total = 0;
    for (const auto& f : report.firings) total += f.count;
    CHECK(total >= 1);
    CHECK(total <= 4);  // the only applicable rule is R1 with 4 instances
    for (const auto& f : report.firings) CHECK(f.rule == "R1");
  }
}

TEST_CASE("determinism: identical (config, mode, seed) gives identical traces") {
  auto trace_of = [](Mode mode, std::uint64_t seed) {
    Configuration config = build_max_comparator(9, 4, seed);
    std::string out;
    std::function<void(const StepReport&)> sink = [&](const StepReport& r) {
      out += std::to_string(r.step) + ":";
      for (const auto& f : r.firings)
        out += f.rule + "@" + std::to_string(f.host) + "x" + std::to_string(f.count) + ";";
      out += "\n";
    };
    config.run_to_halt(mode, 1000, &sink);
    return out;
  };
  for (Mode mode : {Mode::sequential(), Mode::minimal(), Mode::bounded(2), Mode::maximal()}) {
    CHECK(trace_of(mode, 42) == trace_of(mode, 42));
    CHECK(trace_of(mode, 42) == trace_of(mode, 42));
  }
}

TEST_CASE("different seeds can give different sequential traces") {
  auto first_rule = [](std::uint64_t seed) {
    Configuration config = build_max_comparator(20, 20, seed);
    config.step(Mode::sequential());
    StepReport r = config.step(Mode::sequential());
    return r.firings[0].rule;
  };
  // Not asserting inequality for specific seeds (both choices are legal);
  // just exercise several seeds to confirm stability per seed.
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
    CHECK(first_rule(seed) == first_rule(seed));
}

TEST_CASE("maximality verification accepts engine-produced steps") {
  Configuration config = build_max_comparator(17, 8, 3);
  config.set_verify(true);
  RunResult r = config.run_to_halt(Mode::maximal());
  CHECK(r.halted);
}

TEST_CASE("sequential trace is a valid bounded(1) trace") {
  Configuration config = build_max_comparator(4, 2, 5);
  std::vector<std::vector<RecordedFiring>> steps;
  std::function<void(const StepReport&)> sink = [&](const StepReport& r) {
    std::vector<RecordedFiring> fs;
    for (const auto& f : r.firings) fs.push_back({f.rule, f.host, f.count});
    steps.push_back(std::move(fs));
  };
  config.run_to_halt(Mode::sequential(), 1000, &sink);
  for (const auto& s : steps) {
    Multiset::Count total = 0;
    for (const auto& f : s) total += f.count;
    CHECK(total == 1);  // every sequential step is a legal bounded(1) step
  }
  // Replaying the sequential trace step by step must be accepted.
  Configuration replay = build_max_comparator(4, 2, 5);
  for (const auto& s : steps) replay.apply_recorded(s);
  CHECK(replay.is_halted());
}

TEST_CASE("trace replay reproduces the final configuration hash") {
  Configuration config = build_max_comparator(7, 7, 11);
  std::vector<std::vector<RecordedFiring>> steps;
  std::function<void(const StepReport&)> sink = [&](const StepReport& r) {
    std::vector<RecordedFiring> fs;
    for (const auto& f : r.firings) fs.push_back({f.rule, f.host, f.count});
    steps.push_back(std::move(fs));
  };
  config.run_to_halt(Mode::maximal(), 1000, &sink);
  std::uint64_t want = config.structural_hash();

  Configuration replay = build_max_comparator(7, 7, 999);  // seed is irrelevant to replay
  for (const auto& s : steps) replay.apply_recorded(s);
  CHECK(replay.structural_hash() == want);
}

TEST_CASE("node ids stay unique across steps and clones") {
  NodeIdAllocator ids;
  std::vector<std::unique_ptr<MembraneNode>> kids;
  kids.push_back(build_membrane(ids, Label("z"), Multiset::from_string("a")));
  std::vector<std::unique_ptr<MembraneNode>> one;
  one.push_back(build_membrane(ids, Label("1"), Multiset::from_string("ppp"), std::move(kids)));
  auto root = build_membrane(ids, Label("top"), {}, std::move(one));
  std::vector<Rule> rules;
  Multiset trig = Multiset::from_string("p");
  Rule side = make_clone("C", Label("1"), CloneKind::CloneSide, Label("1"));
  std::get<CloneSpec>(side.body).trigger = trig;
  rules.push_back(side);
  Configuration config(std::move(root), std::move(rules), 2);
  config.set_verify(true);  // validates the tree after every step
  RunResult r = config.run_to_halt(Mode::maximal(), 10);
  CHECK(r.halted);  // three triggers on the original; copies carry fewer each round
  CHECK(validate_tree(config.root()).empty());
}

TEST_CASE("a configuration can move across threads") {
  Configuration config = build_max_comparator(5, 3, 1);
  Configuration moved = std::move(config);
  ComparatorResult result;
  std::thread t([&] { result = run_comparator(moved, Mode::maximal()); });
  t.join();
  CHECK(result.min_value == 3);
  CHECK(result.max_value == 5);
}
