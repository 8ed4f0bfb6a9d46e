#include "gfam/simcore.hpp"

#include <algorithm>
#include <limits>

#include "gfam/error.hpp"

namespace gfam {

namespace {

LatencyProfile preset(std::string name, SimTime c2m, SimTime c2c, SimTime link_rt, SimTime dram,
                      SimTime ep_logic) {
  LatencyProfile p;
  p.name = std::move(name);
  p.c2m_ns = c2m;
  p.c2c_ns = c2c;
  p.link_rt_ns = link_rt;
  p.dram_ns = dram;
  p.local_mem_ns = 92;
  p.ep_logic_ns = ep_logic;
  p.bus_bytes_per_ns = 64.0;
  return p;
}

}  // namespace

LatencyProfile make_profile(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::CxlProto:
      // 3 x 420 = 1260ns for an SF eviction, ~400ns above a remote signal.
      return preset("cxl-proto", 456, 847, 420, 30, 6);
    case ProfileKind::CxlIdeal:
      return preset("cxl-ideal", 170, 246, 110, 50, 10);
    case ProfileKind::Numa:
      return preset("numa", 145, 133, 60, 75, 10);
    case ProfileKind::Socket:
      return preset("socket", 92, 49, 20, 62, 10);
  }
  throw ConfigError("unknown latency profile kind");
}

LatencyProfile make_profile(std::string_view name) {
  if (name == "cxl-proto") return make_profile(ProfileKind::CxlProto);
  if (name == "cxl-ideal") return make_profile(ProfileKind::CxlIdeal);
  if (name == "numa") return make_profile(ProfileKind::Numa);
  if (name == "socket") return make_profile(ProfileKind::Socket);
  throw ConfigError("profile: unknown preset '" + std::string(name) + "'");
}

LatencyProfile make_profile(const CustomProfileParams& params) {
  auto check = [](const char* field, std::int64_t v) {
    if (v < 0) throw ConfigError(std::string("profile.") + field + ": must be >= 0");
    return static_cast<SimTime>(v);
  };
  LatencyProfile p;
  p.name = "custom";
  p.c2m_ns = check("c2m_ns", params.c2m_ns);
  p.c2c_ns = check("c2c_ns", params.c2c_ns);
  p.link_rt_ns = check("link_rt_ns", params.link_rt_ns);
  p.dram_ns = check("dram_ns", params.dram_ns);
  p.local_mem_ns = check("local_mem_ns", params.local_mem_ns);
  p.ep_logic_ns = check("ep_logic_ns", params.ep_logic_ns);
  if (!(params.bus_bytes_per_ns > 0.0))
    throw ConfigError("profile.bus_bytes_per_ns: must be > 0");
  p.bus_bytes_per_ns = params.bus_bytes_per_ns;
  return p;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream * 0xd1b54a32d192ed03ULL + 1))) {}

std::uint64_t Rng::below(std::uint64_t bound) {
  // Lemire's multiply-and-reject; exact and portable across standard libraries.
  std::uint64_t x = engine_();
  unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = engine_();
      m = static_cast<unsigned __int128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

SimTime SimClock::charge(std::size_t worker, SimTime cost_ns) {
  ++events_;
  return clocks_.at(worker) += cost_ns;
}

SimTime SimClock::advance_to(std::size_t worker, SimTime t) {
  SimTime& c = clocks_.at(worker);
  if (t > c) c = t;
  return c;
}

SimTime SimClock::max_time() const {
  return clocks_.empty() ? 0 : *std::max_element(clocks_.begin(), clocks_.end());
}

SimTime SimClock::min_time() const {
  return clocks_.empty() ? 0 : *std::min_element(clocks_.begin(), clocks_.end());
}

std::vector<EndpointRequest> arbitrate(std::vector<EndpointRequest> pending) {
  std::stable_sort(pending.begin(), pending.end(),
                   [](const EndpointRequest& a, const EndpointRequest& b) {
                     if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                     if (a.node != b.node) return a.node < b.node;
                     return a.worker < b.worker;
                   });
  return pending;
}

}  // namespace gfam
