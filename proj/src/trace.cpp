#include "membrana/trace.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace membrana {

using json = nlohmann::ordered_json;

std::string hash_hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void TraceWriter::meta(const SystemSpec& spec, Mode mode, std::uint64_t seed) {
  json j;
  j["v"] = 1;
  j["kind"] = "membrana-trace";
  j["system"] = serialize_system(spec);
  j["mode"] = mode.to_string();
  j["seed"] = seed;
  out_ << j.dump() << '\n';
}

void TraceWriter::step(const StepReport& report) {
  json j;
  j["step"] = report.step;
  json firings = json::array();
  for (const auto& f : report.firings)
    firings.push_back({{"rule", f.rule}, {"host_id", f.host}, {"count", f.count}});
  j["firings"] = std::move(firings);
  json moves = json::array();
  for (const auto& m : report.moves)
    moves.push_back({{"sym", m.sym}, {"from", m.from}, {"to", m.to}, {"n", m.n}});
  j["moves"] = std::move(moves);
  json membranes = json::array();
  for (const auto& e : report.membranes)
    membranes.push_back({{"op", e.op}, {"id", e.id}, {"label", e.label}, {"parent", e.parent}});
  j["membranes"] = std::move(membranes);
  out_ << j.dump() << '\n';
}

void TraceWriter::inject(NodeId host, const Multiset& added) {
  json j;
  j["inject"] = {{"host", host}, {"add", added.to_string()}};
  out_ << j.dump() << '\n';
}

void TraceWriter::final(const Configuration& config, bool halted, std::uint64_t steps) {
  json j;
  j["final_hash"] = hash_hex(config.structural_hash());
  j["halted"] = halted;
  j["steps"] = steps;
  out_ << j.dump() << '\n';
}

ReplayResult replay_trace(std::istream& in) {
  ReplayResult result;
  std::string line;

  auto fail = [&](const std::string& msg) {
    result.verified = false;
    result.message = msg;
    return result;
  };

  if (!std::getline(in, line)) return fail("unexpected end of trace: missing meta record");
  json meta = json::parse(line, nullptr, false);
  if (meta.is_discarded() || !meta.is_object() || meta.value("kind", "") != "membrana-trace")
    return fail("not a membrana trace (bad meta record)");
  if (meta.value("v", 0) != 1) return fail("unsupported trace version");

  SystemSpec spec;
  try {
    spec = parse_system(meta.at("system").get<std::string>());
  } catch (const std::exception& e) {
    return fail(std::string("embedded system does not parse: ") + e.what());
  }
  Configuration config = build_configuration(spec, meta.value("seed", 1ULL));

  bool saw_final = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return fail("malformed trace record");
    if (j.contains("final_hash")) {
      saw_final = true;
      std::string want = j.at("final_hash").get<std::string>();
      std::string got = hash_hex(config.structural_hash());
      result.steps = config.step_count();
      result.final_hash = got;
      if (want != got)
        return fail("final configuration hash mismatch: trace says " + want + ", replay got " + got);
      result.verified = true;
      result.message = "verified";
      return result;
    }
    try {
      if (j.contains("inject")) {
        const json& inj = j.at("inject");
        config.inject(inj.at("host").get<NodeId>(),
                      parse_multiset(inj.at("add").get<std::string>()));
        continue;
      }
      if (j.contains("step")) {
        std::vector<RecordedFiring> firings;
        for (const auto& f : j.at("firings")) {
          firings.push_back(RecordedFiring{f.at("rule").get<std::string>(),
                                           f.at("host_id").get<NodeId>(),
                                           f.at("count").get<Multiset::Count>()});
        }
        config.apply_recorded(firings);
        continue;
      }
    } catch (const json::exception& e) {
      return fail(std::string("malformed trace record: ") + e.what());
    } catch (const std::exception& e) {
      return fail(std::string("replay diverged: ") + e.what());
    }
    return fail("unrecognized trace record");
  }
  if (!saw_final) return fail("unexpected end of trace: missing final record");
  return result;
}

}  // namespace membrana
