#ifndef MEMBRANA_TRACE_HPP
#define MEMBRANA_TRACE_HPP

#include <iosfwd>
#include <string>

#include "membrana/dsl.hpp"
#include "membrana/engine.hpp"

namespace membrana {

/// Line-delimited JSON trace ("v":1). One meta record first, then one
/// record per synchronized step (or external injection), then a final
/// record carrying the structural hash:
///   {"v":1,"kind":"membrana-trace","system":"...","mode":"maximal","seed":1}
///   {"step":1,"firings":[{"rule":"R1","host_id":1,"count":3}],
///    "moves":[{"sym":"a","from":1,"to":2,"n":3}],"membranes":[]}
///   {"inject":{"host":1,"add":"x^5 u^1"}}
///   {"final_hash":"0123456789abcdef","halted":true,"steps":3}
class TraceWriter {
 public:
  explicit TraceWriter(std::ostream& out) : out_(out) {}

  void meta(const SystemSpec& spec, Mode mode, std::uint64_t seed);
  void step(const StepReport& report);
  void inject(NodeId host, const Multiset& added);
  void final(const Configuration& config, bool halted, std::uint64_t steps);

 private:
  std::ostream& out_;
};

struct ReplayResult {
  bool verified = false;
  std::string message;
  std::uint64_t steps = 0;
  std::string final_hash;
};

/// Rebuilds the system embedded in the trace meta, re-applies every record,
/// and checks the final structural hash. The trace is authoritative; no
/// seeded choices are made during replay.
ReplayResult replay_trace(std::istream& in);

std::string hash_hex(std::uint64_t h);

}  // namespace membrana

#endif  // MEMBRANA_TRACE_HPP
