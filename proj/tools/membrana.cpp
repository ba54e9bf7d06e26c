// membrana: membrane-system simulator CLI.
//   run      execute a .psys file to quiescence
//   compare  two-integer comparator (min/max into h1/h2)
//   sort     online insertion sort through a self-reproducing membrane chain
//   trace    replay and verify a recorded trace

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "membrana/comparator.hpp"
#include "membrana/dsl.hpp"
#include "membrana/sorter.hpp"
#include "membrana/trace.hpp"

using namespace membrana;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kUsageError = 2;

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("MEMBRANA_SEED");
  if (!raw || !*raw) return std::nullopt;
  try {
    return std::stoull(raw);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

struct CommonFlags {
  std::string mode_text;
  std::optional<std::uint64_t> seed;
  std::uint64_t max_steps = 1000000;
  std::string trace_path;
  std::string format = "text";

  void attach(CLI::App* cmd, bool with_mode = true) {
    if (with_mode)
      cmd->add_option("--mode", mode_text,
                      "execution mode: sequential | minimal | bounded <k> | maximal");
    cmd->add_option("--seed", seed, "64-bit PRNG seed (fallback: MEMBRANA_SEED)");
    cmd->add_option("--max-steps", max_steps, "step budget before giving up");
    cmd->add_option("--trace", trace_path, "write a JSONL trace to this path");
    cmd->add_option("--format", format, "output format: text | json")
        ->check(CLI::IsMember({"text", "json"}));
  }

  std::uint64_t resolve_seed(std::optional<std::uint64_t> spec_seed = std::nullopt) const {
    if (seed) return *seed;
    if (auto env = env_seed()) return *env;
    if (spec_seed) return *spec_seed;
    return 1;
  }

  std::optional<Mode> resolve_mode(Mode fallback) const {
    if (mode_text.empty()) return fallback;
    return Mode::parse(mode_text);
  }
};

void print_configuration(std::ostream& out, Configuration& config, bool halted,
                         std::uint64_t steps, const std::string& format) {
  if (format == "json") {
    ordered_json j;
    j["v"] = 1;
    j["halted"] = halted;
    j["steps"] = steps;
    j["structure"] = structure_to_string(config.root());
    ordered_json contents = ordered_json::array();
    config.root().for_each([&](const MembraneNode& n) {
      if (n.contents.empty()) return;
      contents.push_back(
          {{"id", n.id}, {"label", n.label.tag}, {"contents", n.contents.to_string()}});
    });
    j["contents"] = std::move(contents);
    out << j.dump() << '\n';
    return;
  }
  out << "halted=" << (halted ? "true" : "false") << " steps=" << steps << '\n';
  out << structure_to_string(config.root()) << '\n';
  config.root().for_each([&](const MembraneNode& n) {
    if (n.contents.empty()) return;
    out << "  " << n.label.tag << "#" << n.id << ": " << n.contents.to_string() << '\n';
  });
}

int cmd_run(const std::string& path, const CommonFlags& flags) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open " << path << '\n';
    return kDomainError;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();

  SystemSpec spec;
  try {
    spec = parse_system(buffer.str());
  } catch (const ParseError& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return kDomainError;
  }

  auto mode = flags.resolve_mode(spec.mode);
  if (!mode) {
    std::cerr << "error: unknown mode '" << flags.mode_text << "'\n";
    return kUsageError;
  }
  std::uint64_t seed = flags.resolve_seed(spec.seed);

  Configuration config = build_configuration(spec, seed);

  std::ofstream trace_file;
  std::optional<TraceWriter> writer;
  std::function<void(const StepReport&)> sink;
  const std::function<void(const StepReport&)>* sink_ptr = nullptr;
  if (!flags.trace_path.empty()) {
    trace_file.open(flags.trace_path);
    if (!trace_file) {
      std::cerr << "error: cannot write trace to " << flags.trace_path << '\n';
      return kDomainError;
    }
    writer.emplace(trace_file);
    writer->meta(spec, *mode, seed);
    sink = [&](const StepReport& r) { writer->step(r); };
    sink_ptr = &sink;
  }

  RunResult run = config.run_to_halt(*mode, flags.max_steps, sink_ptr);
  if (writer) writer->final(config, run.halted, run.steps);
  print_configuration(std::cout, config, run.halted, run.steps, flags.format);
  return kOk;
}

int cmd_compare(long long x, long long y, bool minimizing, const CommonFlags& flags) {
  auto mode = flags.resolve_mode(Mode::maximal());
  if (!mode) {
    std::cerr << "error: unknown mode '" << flags.mode_text << "'\n";
    return kUsageError;
  }
  try {
    Configuration config = minimizing ? build_min_comparator(x, y, flags.resolve_seed())
                                      : build_max_comparator(x, y, flags.resolve_seed());
    ComparatorResult r = run_comparator(config, *mode, flags.max_steps);
    if (flags.format == "json") {
      ordered_json j;
      j["v"] = 1;
      if (minimizing) {
        // Minimizing variant: h1 carries the larger value, h2 the smaller.
        j["h1_side"] = r.min_value;
        j["h2_side"] = r.max_value;
      } else {
        j["min"] = r.min_value;
        j["max"] = r.max_value;
      }
      j["steps"] = r.steps;
      std::cout << j.dump() << '\n';
    } else if (minimizing) {
      // For the minimizing comparator h1 carries the larger value.
      std::cout << "h1-side=" << r.min_value << " h2-side=" << r.max_value
                << " steps=" << r.steps << '\n';
    } else {
      std::cout << "min=" << r.min_value << " max=" << r.max_value << " steps=" << r.steps
                << '\n';
    }
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDomainError;
  }
}

void print_sorted(std::ostream& out, const std::vector<Multiset::Count>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ' ';
    out << values[i];
  }
  out << '\n';
}

int cmd_sort(const std::vector<std::string>& tokens, const std::string& file, bool online,
             bool with_stats, const CommonFlags& flags) {
  auto mode = flags.resolve_mode(Mode::maximal());
  if (!mode) {
    std::cerr << "error: unknown mode '" << flags.mode_text << "'\n";
    return kUsageError;
  }
  std::uint64_t seed = flags.resolve_seed();
  SorterState sorter(*mode, seed);

  std::ofstream trace_file;
  std::optional<TraceWriter> writer;
  if (!flags.trace_path.empty()) {
    trace_file.open(flags.trace_path);
    if (!trace_file) {
      std::cerr << "error: cannot write trace to " << flags.trace_path << '\n';
      return kDomainError;
    }
    writer.emplace(trace_file);
    // The sorter is an ordinary system; its trace embeds the ruleset and
    // bootstrap structure so `membrana trace` can replay it.
    SystemSpec spec;
    spec.name = "sorter";
    spec.mode = *mode;
    SystemSpec::StructureNode h1{Label("h1"), {}}, h2{Label("h2"), {}};
    SystemSpec::StructureNode h0{Label("h0"), {h1, h2}};
    spec.structure = SystemSpec::StructureNode{Label("e"), {h0}};
    spec.rules = SorterState::ruleset();
    writer->meta(spec, *mode, seed);
    sorter.set_observers([&](const StepReport& r) { writer->step(r); },
                         [&](NodeId host, const Multiset& add) { writer->inject(host, add); });
  }

  auto feed = [&](const std::string& token) -> int {
    long long value = 0;
    try {
      std::size_t used = 0;
      value = std::stoll(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      std::cerr << "error: not an integer: '" << token << "'\n";
      return kDomainError;
    }
    if (value < 1) {
      std::cerr << "error: value must be >= 1: '" << token
                << "' (an empty multiset is indistinguishable from absence)\n";
      return kDomainError;
    }
    try {
      sorter.insert(value);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kDomainError;
    }
    if (online) print_sorted(std::cout, sorter.read_sorted());
    return kOk;
  };

  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) {
      std::cerr << "error: cannot open " << file << '\n';
      return kDomainError;
    }
    std::string token;
    while (in >> token) {
      int rc = feed(token);
      if (rc != kOk) return rc;
    }
  } else if (tokens.empty()) {
    // Online by construction: each whitespace-separated token settles
    // before the next one is read.
    std::string token;
    while (std::cin >> token) {
      int rc = feed(token);
      if (rc != kOk) return rc;
    }
  } else {
    for (const std::string& token : tokens) {
      int rc = feed(token);
      if (rc != kOk) return rc;
    }
  }

  const SorterStats& stats = sorter.stats();
  if (flags.format == "json") {
    ordered_json j;
    j["v"] = 1;
    j["sorted"] = sorter.read_sorted();
    j["stats"] = {{"insertions", stats.insertions},
                  {"settlements", stats.settlements},
                  {"reproductions", stats.reproductions},
                  {"steps", stats.total_steps}};
    std::cout << j.dump() << '\n';
  } else {
    if (!online) print_sorted(std::cout, sorter.read_sorted());
    if (with_stats)
      std::cout << "settlements=" << stats.settlements
                << " reproductions=" << stats.reproductions << " steps=" << stats.total_steps
                << '\n';
  }
  if (writer) writer->final(sorter.config(), sorter.settled(), stats.total_steps);
  return kOk;
}

int cmd_trace(const std::string& path, bool seed_given) {
  if (seed_given)
    std::cerr << "warning: --seed is ignored when replaying; the trace is authoritative\n";
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open " << path << '\n';
    return kDomainError;
  }
  ReplayResult r = replay_trace(in);
  if (!r.verified) {
    std::cerr << "error: " << r.message << '\n';
    return kDomainError;
  }
  std::cout << "verified\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"membrana: cell-like membrane system simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run a .psys system to quiescence");
  std::string run_file;
  run->add_option("file", run_file, "system file (.psys)")->required();
  CommonFlags run_flags;
  run_flags.attach(run);

  // compare
  auto* compare = app.add_subcommand("compare", "compare two nonnegative integers");
  long long cmp_x = 0, cmp_y = 0;
  bool minimizing = false;
  compare->add_option("x", cmp_x, "first value")->required()->check(CLI::NonNegativeNumber);
  compare->add_option("y", cmp_y, "second value")->required()->check(CLI::NonNegativeNumber);
  compare->add_flag("--minimizing", minimizing, "use the minimizing comparator");
  CommonFlags cmp_flags;
  cmp_flags.attach(compare);

  // sort
  auto* sort_cmd = app.add_subcommand("sort", "sort positive integers (stdin when no args)");
  std::vector<std::string> sort_values;
  std::string sort_file;
  bool online = false, with_stats = false;
  sort_cmd->add_option("values", sort_values, "values to sort (>= 1)");
  sort_cmd->add_option("--file", sort_file, "read whitespace-separated values from this file");
  sort_cmd->add_flag("--online", online, "print the sorted prefix after each insertion");
  sort_cmd->add_flag("--stats", with_stats, "print settlement and reproduction counters");
  CommonFlags sort_flags;
  sort_flags.attach(sort_cmd);

  // trace
  auto* trace_cmd = app.add_subcommand("trace", "replay and verify a recorded trace");
  std::string trace_file;
  trace_cmd->add_option("file", trace_file, "trace file (JSONL)")->required();
  CommonFlags trace_flags;
  trace_flags.attach(trace_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsageError;
  }

  try {
    if (run->parsed()) return cmd_run(run_file, run_flags);
    if (compare->parsed()) return cmd_compare(cmp_x, cmp_y, minimizing, cmp_flags);
    if (sort_cmd->parsed()) return cmd_sort(sort_values, sort_file, online, with_stats, sort_flags);
    if (trace_cmd->parsed()) return cmd_trace(trace_file, trace_flags.seed.has_value());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDomainError;
  }
  return kUsageError;
}
