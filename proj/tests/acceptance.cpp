// Acceptance suite: every release criterion, one PASS/FAIL line each.
// All expectations are exact; there are no tolerances to tune.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "membrana/comparator.hpp"
#include "membrana/dsl.hpp"
#include "membrana/sorter.hpp"
#include "membrana/trace.hpp"

using namespace membrana;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
  std::printf("%s  %d. %-28s %s(%.1fs)\n", pass ? "PASS" : "FAIL", index, name.c_str(),
              detail.empty() ? "" : (detail + " ").c_str(), seconds);
  if (!pass) ++g_failures;
}

template <typename Fn>
void criterion(int index, const std::string& name, Fn&& body) {
  auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(index, name, pass, detail, secs);
}

const Mode kAllModes[] = {Mode::sequential(), Mode::minimal(), Mode::bounded(2),
                          Mode::maximal()};

std::uint64_t g_maximality_checked_steps = 0;

// ---------------------------------------------------------------------------
// 1 & 2 & 8 (comparator side): exhaustive grid over [0,50]^2, four modes,
// five seeds; exact h1/h2/h0 contents; maximal step bound; maximality
// verification enabled on every maximal run.
bool comparator_grid(std::string& detail, bool check_steps) {
  long runs = 0;
  for (Multiset::Count x = 0; x <= 50; ++x) {
    for (Multiset::Count y = 0; y <= 50; ++y) {
      for (const Mode& mode : kAllModes) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
          Configuration config = build_max_comparator(x, y, seed);
          bool maximal = mode.kind == Mode::Kind::MaximalParallel;
          if (maximal) config.set_verify(true);
          ComparatorResult r = run_comparator(config, mode);
          if (maximal) g_maximality_checked_steps += r.steps;
          ++runs;
          const Multiset& h0 = config.root().contents;
          const Multiset& h1 = config.root().unique_child(Label("h1"))->contents;
          const Multiset& h2 = config.root().unique_child(Label("h2"))->contents;
          bool ok = h0.empty() && h1.count(Symbol("a")) == std::min(x, y) &&
                    h1.size() == std::min(x, y) && h2.count(Symbol("b")) == std::max(x, y) &&
                    h2.size() == std::max(x, y);
          if (check_steps && maximal) {
            if (x >= 1 && y >= 1) ok = ok && r.steps == 3;
            ok = ok && r.steps <= 3;
          }
          if (!ok) {
            std::ostringstream os;
            os << "x=" << x << " y=" << y << " mode=" << mode.to_string() << " seed=" << seed
               << " steps=" << r.steps;
            detail = os.str();
            return false;
          }
        }
      }
    }
  }
  detail = std::to_string(runs) + " runs";
  return true;
}

// ---------------------------------------------------------------------------
// 3. Worked micro-examples.
bool micro_examples(std::string& detail) {
  // Multiset identity M1 = M2 = M3.
  if (!(Multiset::from_string("abbbac") == Multiset::from_string("bacabb") &&
        Multiset::from_string("abbbac") == Multiset::from_string("cbbaab"))) {
    detail = "multiset identity";
    return false;
  }

  // Transmutation: aabbbc --ca->d--> abbbd.
  {
    SystemSpec spec = parse_system(
        "system t\nstructure [m]\ncontents m: aabbbc\nrule T @m: c a -> d\n");
    Configuration config = build_configuration(spec);
    config.run_to_halt(Mode::maximal());
    if (!(config.root().contents == Multiset::from_string("abbbd"))) {
      detail = "transmutation";
      return false;
    }
  }

  // Translocation: focus=abbbd with a->e@in and d->f@out g.
  {
    SystemSpec spec = parse_system(
        "system t\nstructure [out [focus [in]]]\ncontents focus: abbbd\n"
        "rule R2 @focus: a -> e@in\nrule R3 @focus: d -> f@out g\n");
    Configuration config = build_configuration(spec);
    config.run_to_halt(Mode::maximal());
    MembraneNode* focus = config.root().unique_child(Label("focus"));
    bool ok = focus && focus->contents == Multiset::from_string("bbbg") &&
              focus->unique_child(Label("in"))->contents == Multiset::from_string("e") &&
              config.root().contents == Multiset::from_string("f");
    if (!ok) {
      detail = "translocation";
      return false;
    }
  }

  // Clone shapes.
  {
    SystemSpec spec = parse_system(
        "system t\nstructure [top [m [z]]]\ncontents m: p\ncontents z: ab\n"
        "rule C @m if has p: clone-out n consuming p\n");
    Configuration config = build_configuration(spec);
    config.run_to_halt(Mode::maximal());
    if (structure_to_string(config.root()) != "[top [n [m [z]] [z]]]") {
      detail = "clone-out shape: " + structure_to_string(config.root());
      return false;
    }
  }
  {
    SystemSpec spec = parse_system(
        "system t\nstructure [top [m [z]]]\ncontents m: p\n"
        "rule C @m if has p: clone-side n consuming p\n");
    Configuration config = build_configuration(spec);
    config.run_to_halt(Mode::maximal());
    if (structure_to_string(config.root()) != "[top [m [z]] [n [z]]]") {
      detail = "clone-side shape: " + structure_to_string(config.root());
      return false;
    }
  }
  {
    SystemSpec spec = parse_system(
        "system t\nstructure [m [z]]\ncontents m: p\n"
        "rule C @m if has p: clone-in n consuming p\n");
    Configuration config = build_configuration(spec);
    config.run_to_halt(Mode::maximal());
    if (structure_to_string(config.root()) != "[m [n [z]] [z]]") {
      detail = "clone-in shape: " + structure_to_string(config.root());
      return false;
    }
  }
  detail = "6 examples";
  return true;
}

// ---------------------------------------------------------------------------
// 4 & 8 (sorter side): 1000 seeded random lists (n <= 64, values in
// [1,100]), modes assigned round-robin (250 per mode), read_sorted checked
// against the reference sort after every prefix; maximality verification
// enabled on every maximal-mode run.
bool sorter_oracle(std::string& detail) {
  SplitMix64 gen(20260809);
  long prefix_checks = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    int n = 1 + static_cast<int>(gen.below(64));
    std::vector<Multiset::Count> values;
    values.reserve(n);
    for (int i = 0; i < n; ++i) values.push_back(1 + (Multiset::Count)gen.below(100));
    const Mode& mode = kAllModes[trial % 4];
    SorterState sorter(mode, gen.next());
    if (mode.kind == Mode::Kind::MaximalParallel) sorter.config().set_verify(true);
    std::vector<Multiset::Count> reference;
    for (int i = 0; i < n; ++i) {
      sorter.insert(values[i]);
      reference.push_back(values[i]);
      std::sort(reference.begin(), reference.end());
      ++prefix_checks;
      if (sorter.read_sorted() != reference) {
        std::ostringstream os;
        os << "trial=" << trial << " mode=" << mode.to_string() << " prefix=" << i + 1;
        detail = os.str();
        return false;
      }
    }
    if (mode.kind == Mode::Kind::MaximalParallel)
      g_maximality_checked_steps += sorter.stats().total_steps;
  }
  detail = "1000 lists, " + std::to_string(prefix_checks) + " prefixes";
  return true;
}

// ---------------------------------------------------------------------------
// 5. settlements == n(n-1)/2 on random and sorted inputs, n in 1..32.
bool quadratic_count(std::string& detail) {
  SplitMix64 gen(7);
  for (int n = 1; n <= 32; ++n) {
    std::vector<std::vector<Multiset::Count>> inputs;
    std::vector<Multiset::Count> random_list, ascending, descending;
    for (int i = 0; i < n; ++i) {
      random_list.push_back(1 + (Multiset::Count)gen.below(100));
      ascending.push_back(i + 1);
      descending.push_back(n - i);
    }
    inputs.push_back(random_list);
    inputs.push_back(ascending);
    inputs.push_back(descending);
    for (const auto& input : inputs) {
      auto [sorted, stats] = sort_stream(input, Mode::maximal(), gen.next());
      std::vector<Multiset::Count> want = input;
      std::sort(want.begin(), want.end());
      if (sorted != want ||
          stats.settlements != static_cast<std::uint64_t>(n) * (n - 1) / 2) {
        detail = "n=" + std::to_string(n) + " settlements=" + std::to_string(stats.settlements);
        return false;
      }
    }
  }
  detail = "n=1..32, random+sorted+reversed";
  return true;
}

// ---------------------------------------------------------------------------
// 6. reproductions == n-1 and depth == max(1,n) after n insertions, n in 0..32.
bool reproduction_count(std::string& detail) {
  SplitMix64 gen(21);
  for (int n = 0; n <= 32; ++n) {
    SorterState sorter(Mode::maximal(), gen.next());
    for (int i = 0; i < n; ++i) sorter.insert(1 + (Multiset::Count)gen.below(50));
    std::uint64_t want_repro = n == 0 ? 0 : static_cast<std::uint64_t>(n) - 1;
    if (sorter.stats().reproductions != want_repro || sorter.depth() != std::max(1, n)) {
      detail = "n=" + std::to_string(n) + " repro=" + std::to_string(sorter.stats().reproductions) +
               " depth=" + std::to_string(sorter.depth());
      return false;
    }
  }
  detail = "n=0..32";
  return true;
}

// ---------------------------------------------------------------------------
// Randomized system specs for criteria 7 and 9.
SystemSpec random_spec(SplitMix64& gen) {
  SystemSpec spec;
  spec.name = "rand" + std::to_string(gen.below(100000));
  spec.mode = kAllModes[gen.below(4)];
  if (gen.below(2)) spec.seed = gen.below(1 << 20);

  int n_labels = 2 + static_cast<int>(gen.below(4));
  std::vector<std::string> labels;
  for (int i = 0; i < n_labels; ++i) labels.push_back("m" + std::to_string(i));

  // A random tree: node i's parent is a random node j < i.
  std::vector<SystemSpec::StructureNode> nodes(n_labels);
  for (int i = 0; i < n_labels; ++i) nodes[i].label = Label(labels[i]);
  for (int i = n_labels - 1; i >= 1; --i) {
    int parent = static_cast<int>(gen.below(i));
    nodes[parent].children.insert(nodes[parent].children.begin(), nodes[i]);
  }
  spec.structure = nodes[0];

  const char* symbols[] = {"a", "b", "c", "d"};
  for (const std::string& label : labels) {
    if (gen.below(3) == 0) continue;
    Multiset m;
    for (const char* s : symbols)
      if (gen.below(2)) m.add(Symbol(s), 1 + gen.below(5));
    if (!m.empty()) spec.contents[label] = m;
  }

  int n_rules = 1 + static_cast<int>(gen.below(4));
  for (int i = 0; i < n_rules; ++i) {
    std::string scope = labels[gen.below(labels.size())];
    Multiset lhs;
    lhs.add(Symbol(symbols[gen.below(4)]), 1 + gen.below(2));
    std::vector<Production> rhs;
    int n_prod = static_cast<int>(gen.below(3));
    for (int p = 0; p < n_prod; ++p) {
      Target t = Target::here();
      switch (gen.below(3)) {
        case 0: t = Target::here(); break;
        case 1: t = Target::out(); break;
        case 2: t = Target::in_child(Label(labels[gen.below(labels.size())])); break;
      }
      rhs.push_back(Production{Symbol(symbols[gen.below(4)]), t});
    }
    Guard guard = Guard::always();
    switch (gen.below(4)) {
      case 0: guard = Guard::has_symbol(Symbol(symbols[gen.below(4)])); break;
      case 1: guard = Guard::negate(Guard::has_symbol(Symbol(symbols[gen.below(4)]))); break;
      case 2: guard = Guard::slot_empty(Label(labels[gen.below(labels.size())])); break;
      default: break;
    }
    spec.rules.push_back(
        make_rewrite("R" + std::to_string(i), Label(scope), lhs, rhs, guard));
  }
  if (gen.below(3) == 0) {
    // A clone rule with a consumed trigger so runs stay finite.
    std::string scope = labels[gen.below(labels.size())];
    CloneKind kind = static_cast<CloneKind>(gen.below(3));
    Rule r = make_clone("C", Label(scope), kind, Label("k" + std::to_string(gen.below(10))));
    std::get<CloneSpec>(r.body).trigger = Multiset::from_string("a");
    spec.rules.push_back(std::move(r));
  }
  return spec;
}

// 7. Determinism and replay over 100 randomized specs.
bool determinism_replay(std::string& detail) {
  SplitMix64 gen(501);
  for (int trial = 0; trial < 100; ++trial) {
    SystemSpec spec = random_spec(gen);
    std::uint64_t seed = gen.below(1u << 30);
    Mode mode = kAllModes[trial % 4];

    auto record = [&]() {
      std::ostringstream out;
      TraceWriter writer(out);
      writer.meta(spec, mode, seed);
      Configuration config = build_configuration(spec, seed);
      std::function<void(const StepReport&)> sink =
          [&](const StepReport& r) { writer.step(r); };
      RunResult run = config.run_to_halt(mode, 60, &sink);
      writer.final(config, run.halted, run.steps);
      return out.str();
    };

    std::string first = record();
    std::string second = record();
    if (first != second) {
      detail = "trace not byte-identical, trial " + std::to_string(trial);
      return false;
    }
    std::istringstream in(first);
    ReplayResult r = replay_trace(in);
    if (!r.verified) {
      detail = "replay failed, trial " + std::to_string(trial) + ": " + r.message;
      return false;
    }
  }
  detail = "100 specs";
  return true;
}

// 8. Maximality: re-checked against the reserved snapshot on every maximal
// step of criteria 1 and 4 (the engine throws on any violation).
bool maximality(std::string& detail) {
  detail = std::to_string(g_maximality_checked_steps) + " maximal steps checked";
  return g_maximality_checked_steps > 0;
}

// 9. DSL round-trip identity and fuzz safety.
bool dsl_roundtrip_fuzz(std::string& detail) {
  SplitMix64 gen(901);
  for (int trial = 0; trial < 200; ++trial) {
    SystemSpec spec = random_spec(gen);
    std::string text = serialize_system(spec);
    SystemSpec back = parse_system(text);
    if (!(back == spec)) {
      detail = "round-trip mismatch, trial " + std::to_string(trial);
      return false;
    }
    if (serialize_system(back) != text) {
      detail = "canonical form unstable, trial " + std::to_string(trial);
      return false;
    }
  }

  // Fuzz: mutated inputs must produce errors, never crashes.
  long parsed = 0, rejected = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    SystemSpec spec = random_spec(gen);
    std::string text = serialize_system(spec);
    int edits = 1 + static_cast<int>(gen.below(8));
    for (int e = 0; e < edits && !text.empty(); ++e) {
      std::size_t pos = gen.below(text.size());
      switch (gen.below(3)) {
        case 0: text[pos] = static_cast<char>(32 + gen.below(95)); break;
        case 1: text.erase(pos, 1); break;
        case 2: text.insert(pos, 1, static_cast<char>(32 + gen.below(95))); break;
      }
    }
    try {
      parse_system(text);
      ++parsed;
    } catch (const ParseError&) {
      ++rejected;
    } catch (const std::exception&) {
      // Any typed error is acceptable; crashes are not (we would not be here).
      ++rejected;
    }
  }
  detail = "200 round-trips; fuzz: " + std::to_string(parsed) + " accepted / " +
           std::to_string(rejected) + " rejected";
  return true;
}

}  // namespace

int main() {
  std::printf("membrana acceptance suite\n");
  criterion(1, "comparator-exhaustive", [](std::string& d) { return comparator_grid(d, false); });
  criterion(2, "comparator-step-bound", [](std::string& d) { return comparator_grid(d, true); });
  criterion(3, "worked-micro-examples", micro_examples);
  criterion(4, "sorter-oracle-online", sorter_oracle);
  criterion(5, "quadratic-settlements", quadratic_count);
  criterion(6, "reproduction-and-depth", reproduction_count);
  criterion(7, "determinism-and-replay", determinism_replay);
  criterion(8, "maximality-property", maximality);
  criterion(9, "dsl-roundtrip-fuzz", dsl_roundtrip_fuzz);
  if (g_failures == 0) {
    std::printf("all criteria passed\n");
    return 0;
  }
  std::printf("%d criteria FAILED\n", g_failures);
  return 1;
}
