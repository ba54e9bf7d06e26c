#include "membrana/sorter.hpp"

#include <algorithm>
#include <map>

namespace membrana {

namespace {

// Object roles inside a cell body: x value in transit, a incoming value,
// b mobilized partner, c paired count returning to the max side, s settled
// resident precursor (immune to mobilization), u insertion pulse, m/t
// mobilization triggers, w wrap licence, g* pulse stage gates.
const Symbol kX{"x"};
const Symbol kA{"a"};
const Symbol kB{"b"};
const Symbol kC{"c"};
const Symbol kS{"s"};
const Symbol kU{"u"};
const Symbol kM{"m"};
const Symbol kT{"t"};
const Symbol kW{"w"};
const Symbol kG0{"g0"};
const Symbol kGX{"gx"};
const Symbol kG1{"g1"};
const Symbol kG2{"g2"};
const Symbol kG3{"g3"};
const Symbol kG4{"g4"};

const Label kEnv{"e"};
const Label kH0{"h0"};
const Label kH1{"h1"};
const Label kC0{"c0"};
const Label kC1{"c1"};
const Label kH2{"h2"};

Multiset one(const Symbol& s) {
  Multiset m;
  m.add(s, 1);
  return m;
}

Multiset two(const Symbol& s1, const Symbol& s2) {
  Multiset m;
  m.add(s1, 1);
  m.add(s2, 1);
  return m;
}

void body_rules(std::vector<Rule>& rules, const Label& body, const Label& slot) {
  const std::string sfx = "_" + body.tag;
  auto in_slot = Target::in_child(slot);
  auto in_next = Target::in_child(kC0);
  auto in_term = Target::in_child(kH2);

  // Arrival: transit objects become comparator-side a's.
  rules.push_back(make_rewrite("arrive" + sfx, body, one(kX), {{kA, Target::here()}}));
  // Pulse routing: a resident slot is mobilized through m; an empty slot
  // means the partner (if any) is the terminal occupant, reached through t.
  rules.push_back(make_rewrite("route_slot" + sfx, body, one(kU), {{kM, in_slot}},
                               Guard::slot_nonempty(slot)));
  rules.push_back(make_rewrite("route_term" + sfx, body, one(kU), {{kT, in_term}},
                               Guard::slot_empty(slot)));
  // The comparison: matched pairs settle toward the slot; the pair count
  // rejoins the maximum through c.
  rules.push_back(make_rewrite("pair" + sfx, body, two(kA, kB),
                               {{kS, in_slot}, {kC, Target::here()}}));
  // Pulse stages. The single gate token advances only when the previous
  // phase has fully drained, which serializes arrival, pairing and the
  // three drains without any rule priorities.
  rules.push_back(make_rewrite("sync_arrival" + sfx, body, one(kG0), {{kGX, Target::here()}},
                               Guard::negate(Guard::has_symbol(kX))));
  rules.push_back(make_rewrite("sync_pair_a" + sfx, body, one(kGX), {{kG1, Target::here()}},
                               Guard::negate(Guard::has_symbol(kB))));
  rules.push_back(make_rewrite("sync_pair_b" + sfx, body, one(kGX), {{kG1, Target::here()}},
                               Guard::negate(Guard::has_symbol(kA))));
  rules.push_back(make_rewrite("drain_a_in" + sfx, body, one(kA), {{kX, in_next}},
                               Guard::has_symbol(kG1)));
  rules.push_back(make_rewrite("drain_a_rest" + sfx, body, one(kA), {{kB, in_term}},
                               Guard::has_symbol(kG1)));
  rules.push_back(make_rewrite("sync_a" + sfx, body, one(kG1), {{kG2, Target::here()}},
                               Guard::negate(Guard::has_symbol(kA))));
  rules.push_back(make_rewrite("drain_b_in" + sfx, body, one(kB), {{kX, in_next}},
                               Guard::has_symbol(kG2)));
  rules.push_back(make_rewrite("drain_b_rest" + sfx, body, one(kB), {{kB, in_term}},
                               Guard::has_symbol(kG2)));
  rules.push_back(make_rewrite("sync_b" + sfx, body, one(kG2), {{kG3, Target::here()}},
                               Guard::negate(Guard::has_symbol(kB))));
  rules.push_back(make_rewrite("drain_c_in" + sfx, body, one(kC), {{kX, in_next}},
                               Guard::has_symbol(kG3)));
  rules.push_back(make_rewrite("drain_c_rest" + sfx, body, one(kC), {{kB, in_term}},
                               Guard::has_symbol(kG3)));
  rules.push_back(make_rewrite("sync_c" + sfx, body, one(kG3), {{kG4, Target::here()}},
                               Guard::negate(Guard::has_symbol(kC))));
  // End of settlement: forward the pulse into the next cell, or arm the
  // reproduction when a comparison just settled here against the terminal,
  // or retire the pulse after a virgin rest.
  rules.push_back(make_rewrite("forward" + sfx, body, one(kG4), {{kU, in_next}}));
  rules.push_back(make_rewrite("arm" + sfx, body, one(kG4), {{kW, in_term}},
                               Guard::slot_nonempty(slot)));
  rules.push_back(make_rewrite("retire" + sfx, body, one(kG4), {},
                               Guard::slot_empty(slot)));
}

void slot_rules(std::vector<Rule>& rules, const Label& slot) {
  const std::string sfx = "_" + slot.tag;
  // The resident re-enters the comparison as the partner side.
  rules.push_back(make_rewrite("mobilize" + sfx, slot, one(kA), {{kB, Target::out()}},
                               Guard::has_symbol(kM)));
  rules.push_back(make_rewrite("slot_ack" + sfx, slot, one(kM), {{kG0, Target::out()}},
                               Guard::negate(Guard::has_symbol(kA))));
  // Settled pairs become the new resident once mobilization is over.
  rules.push_back(make_rewrite("settle" + sfx, slot, one(kS), {{kA, Target::here()}},
                               Guard::negate(Guard::has_symbol(kM))));
}

void terminal_rules(std::vector<Rule>& rules) {
  // The terminal occupant re-enters the comparison.
  rules.push_back(make_rewrite("mobilize_term", kH2, one(kB), {{kB, Target::out()}},
                               Guard::has_symbol(kT)));
  rules.push_back(make_rewrite("term_ack", kH2, one(kT), {{kG0, Target::out()}},
                               Guard::negate(Guard::has_symbol(kB))));
  // Reproduction: the terminal is promoted into a fresh innermost cell
  // [c0 [c1] [h2]]; the licence is consumed, so one deposit arms exactly
  // one promotion and the licence never lingers at quiescence.
  rules.push_back(make_wrap("reproduce", kH2, kC0, kC1, Guard::always(), one(kW)));
}

bool is_body(const MembraneNode& n) { return n.label == kH0 || n.label == kC0; }

Configuration bootstrap(std::uint64_t seed) {
  NodeIdAllocator ids;
  std::vector<std::unique_ptr<MembraneNode>> cell_kids;
  cell_kids.push_back(build_membrane(ids, kH1, {}));
  cell_kids.push_back(build_membrane(ids, kH2, {}));
  std::vector<std::unique_ptr<MembraneNode>> env_kids;
  env_kids.push_back(build_membrane(ids, kH0, {}, std::move(cell_kids)));
  auto env = build_membrane(ids, kEnv, {}, std::move(env_kids));
  return Configuration(std::move(env), SorterState::ruleset(), seed);
}

}  // namespace

std::vector<Rule> SorterState::ruleset() {
  std::vector<Rule> rules;
  body_rules(rules, kH0, kH1);
  body_rules(rules, kC0, kC1);
  slot_rules(rules, kH1);
  slot_rules(rules, kC1);
  terminal_rules(rules);
  return rules;
}

SorterState::SorterState(Mode mode, std::uint64_t seed)
    : config_(bootstrap(seed)), mode_(mode) {}

MembraneNode* SorterState::outermost_body() { return config_.root().unique_child(kH0); }

const MembraneNode* SorterState::outermost_body() const {
  return config_.root().unique_child(kH0);
}

InsertionTrace SorterState::insert(Multiset::Count value) {
  if (value < 1)
    throw SorterError("value must be >= 1; an empty multiset is indistinguishable from absence");
  if (!settled_) throw SorterError("previous insertion did not settle; sorter state is stale");

  MembraneNode* outer = outermost_body();
  if (!outer) throw SorterError("sorter chain lost its outermost cell");

  // Cell order before the cascade: all comparisons of this insertion happen
  // in cells that already exist (the wrap only fires after the innermost
  // comparison has settled).
  std::map<NodeId, int> cell_index;
  {
    int idx = 0;
    config_.root().for_each([&](const MembraneNode& n) {
      if (is_body(n)) cell_index[n.id] = ++idx;
    });
  }

  Multiset payload;
  payload.add(kX, value);
  payload.add(kU, 1);
  config_.inject(outer->id, payload);
  if (on_inject_) on_inject_(outer->id, payload);

  InsertionTrace trace;
  trace.value = value;

  // Per-body tallies reconstructed from the firing stream.
  struct CellTally {
    Multiset::Count arrived = 0;
    Multiset::Count mobilized = 0;
    bool paired = false;
  };
  std::map<NodeId, CellTally> tally;
  std::uint64_t wraps = 0;

  std::function<void(const StepReport&)> sink = [&](const StepReport& report) {
    if (on_step_) on_step_(report);
    for (const auto& f : report.firings) {
      const std::string& r = f.rule;
      if (r.rfind("arrive", 0) == 0) {
        tally[f.host].arrived += f.count;
      } else if (r.rfind("mobilize", 0) == 0) {
        MembraneNode* host = config_.find(f.host);
        if (host && host->parent) tally[host->parent->id].mobilized += f.count;
      } else if (r.rfind("pair", 0) == 0) {
        tally[f.host].paired = true;
      } else if (r == "reproduce") {
        ++wraps;
      }
    }
  };

  RunResult run = config_.run_to_halt(mode_, max_steps_, &sink);
  stats_.total_steps += run.steps;
  trace.steps = run.steps;
  if (!run.halted) {
    settled_ = false;
    throw SorterError("insertion did not settle within " + std::to_string(max_steps_) +
                      " steps");
  }

  for (const auto& [node, t] : tally) {
    if (!t.paired) continue;
    InsertionTrace::Comparison cmp;
    auto it = cell_index.find(node);
    cmp.cell = it == cell_index.end() ? -1 : it->second;
    cmp.incoming = t.arrived;
    cmp.partner = t.mobilized;
    trace.comparisons.push_back(cmp);
  }
  std::sort(trace.comparisons.begin(), trace.comparisons.end(),
            [](const auto& a, const auto& b) { return a.cell < b.cell; });
  trace.reproduced = wraps > 0;

  stats_.insertions += 1;
  stats_.settlements += trace.comparisons.size();
  stats_.reproductions += wraps;
  return trace;
}

std::vector<Multiset::Count> SorterState::read_sorted() const {
  if (!settled_) throw SorterError("sorter state is unsettled");
  std::vector<Multiset::Count> out;
  const MembraneNode* body = outermost_body();
  while (body) {
    const Label& slot_label = body->label == kH0 ? kH1 : kC1;
    const MembraneNode* slot = body->unique_child(slot_label);
    if (slot && !slot->contents.empty()) out.push_back(slot->contents.size());
    const MembraneNode* next = body->unique_child(kC0);
    if (next) {
      body = next;
      continue;
    }
    const MembraneNode* terminal = body->unique_child(kH2);
    if (terminal && !terminal->contents.empty()) out.push_back(terminal->contents.size());
    break;
  }
  return out;
}

int SorterState::depth() const {
  int cells = 0;
  config_.root().for_each([&](const MembraneNode& n) {
    if (is_body(n)) ++cells;
  });
  return cells;
}

std::pair<std::vector<Multiset::Count>, SorterStats> sort_stream(
    const std::vector<Multiset::Count>& values, Mode mode, std::uint64_t seed) {
  SorterState state(mode, seed);
  for (Multiset::Count v : values) state.insert(v);
  return {state.read_sorted(), state.stats()};
}

}  // namespace membrana
