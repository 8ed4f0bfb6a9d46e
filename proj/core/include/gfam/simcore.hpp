#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace gfam {

using SimTime = std::uint64_t;  // virtual nanoseconds
using NodeId = std::uint32_t;
using Addr = std::uint64_t;

inline constexpr std::size_t kLineSize = 64;
inline constexpr std::uint32_t kMaxNodes = 16;

inline constexpr Addr line_of(Addr a) { return a & ~static_cast<Addr>(kLineSize - 1); }
inline constexpr bool is_line_aligned(Addr a) { return (a & (kLineSize - 1)) == 0; }

struct WorkerId {
  NodeId node = 0;
  std::uint32_t index = 0;  // worker index within the node
  auto operator<=>(const WorkerId&) const = default;
};

// ---------------------------------------------------------------------------
// Latency profiles

struct LatencyProfile {
  std::string name;
  SimTime c2m_ns = 0;        // host -> endpoint -> DRAM roundtrip
  SimTime c2c_ns = 0;        // host -> endpoint -> peer cache roundtrip
  SimTime link_rt_ns = 0;    // one link request/response roundtrip
  SimTime dram_ns = 0;       // endpoint DRAM access
  SimTime local_mem_ns = 0;  // node-private DRAM access
  SimTime ep_logic_ns = 0;   // endpoint pipeline cost per request
  double bus_bytes_per_ns = 64.0;  // inter-agent snoop bus bandwidth

  bool operator==(const LatencyProfile&) const = default;
};

enum class ProfileKind { CxlIdeal, CxlProto, Numa, Socket };

// Signed so that negative inputs are representable and can be rejected.
struct CustomProfileParams {
  std::int64_t c2m_ns = 0;
  std::int64_t c2c_ns = 0;
  std::int64_t link_rt_ns = 0;
  std::int64_t dram_ns = 0;
  std::int64_t local_mem_ns = 0;
  std::int64_t ep_logic_ns = 0;
  double bus_bytes_per_ns = 64.0;
};

LatencyProfile make_profile(ProfileKind kind);
LatencyProfile make_profile(std::string_view name);  // throws ConfigError
LatencyProfile make_profile(const CustomProfileParams& params);

// ---------------------------------------------------------------------------
// Cost accounting shared by every datapath

struct Breakdown {
  SimTime dram = 0;           // endpoint + DRAM service (incl. link for plain fills)
  SimTime remote_signal = 0;  // peer cache fetch/invalidate roundtrips
  SimTime sf_bi = 0;          // snoop filter evictions and back-invalidations
  SimTime ep_logic = 0;       // endpoint pipeline, filters, bus, stalls

  SimTime total() const { return dram + remote_signal + sf_bi + ep_logic; }
  Breakdown& operator+=(const Breakdown& o) {
    dram += o.dram;
    remote_signal += o.remote_signal;
    sf_bi += o.sf_bi;
    ep_logic += o.ep_logic;
    return *this;
  }
  bool operator==(const Breakdown&) const = default;
};

// ---------------------------------------------------------------------------
// Randomness

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  // Uniform in [0, 1).
  double uniform();
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

// ---------------------------------------------------------------------------
// Virtual clocks

class SimClock {
 public:
  explicit SimClock(std::size_t workers = 0) : clocks_(workers, 0) {}

  std::size_t workers() const { return clocks_.size(); }
  SimTime now(std::size_t worker) const { return clocks_.at(worker); }
  SimTime charge(std::size_t worker, SimTime cost_ns);
  // Moves a worker forward to `t` if it is behind; never backwards.
  SimTime advance_to(std::size_t worker, SimTime t);
  std::uint64_t events() const { return events_; }
  SimTime max_time() const;
  SimTime min_time() const;

 private:
  std::vector<SimTime> clocks_;
  std::uint64_t events_ = 0;
};

// ---------------------------------------------------------------------------
// Endpoint serialization

struct EndpointRequest {
  SimTime timestamp = 0;
  NodeId node = 0;
  std::uint32_t worker = 0;
  Addr line = 0;
  std::uint64_t tag = 0;  // caller payload, opaque here
};

// Orders requests by (timestamp, node, worker); the sort is stable so
// duplicates keep their submission order.
std::vector<EndpointRequest> arbitrate(std::vector<EndpointRequest> pending);

}  // namespace gfam
