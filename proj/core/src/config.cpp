#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "gfam/error.hpp"
#include "gfam/harness.hpp"

namespace gfam {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad(std::string_view key, std::string_view want, std::string_view got) {
  throw ConfigError(std::string(key) + ": expected " + std::string(want) + ", got '" + std::string(got) + "'");
}

template <typename T>
T parse_uint(std::string_view key, std::string_view v) {
  std::uint64_t x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) bad(key, "an unsigned integer", v);
  if (x > std::numeric_limits<T>::max()) bad(key, "a smaller integer", v);
  return static_cast<T>(x);
}

std::int64_t parse_int(std::string_view key, std::string_view v) {
  std::int64_t x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) bad(key, "an integer", v);
  return x;
}

double parse_double(std::string_view key, std::string_view v) {
  std::string s(v);
  char* end = nullptr;
  double x = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(x)) bad(key, "a number", v);
  return x;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad(key, "true or false", v);
}

std::string fmt(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

template <typename T>
std::string fmt(T x) {
  return std::to_string(x);
}

struct Field {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

#define GFAM_UINT(k, m)                                                        \
  Field {                                                                      \
    k, [](const RunConfig& c) { return fmt(c.m); },                            \
        [](RunConfig& c, std::string_view v) { c.m = parse_uint<decltype(c.m)>(k, v); } \
  }
#define GFAM_INT(k, m)                                              \
  Field {                                                           \
    k, [](const RunConfig& c) { return fmt(c.m); },                 \
        [](RunConfig& c, std::string_view v) { c.m = parse_int(k, v); } \
  }
#define GFAM_DOUBLE(k, m)                                              \
  Field {                                                              \
    k, [](const RunConfig& c) { return fmt(c.m); },                    \
        [](RunConfig& c, std::string_view v) { c.m = parse_double(k, v); } \
  }
#define GFAM_BOOL(k, m)                                                         \
  Field {                                                                       \
    k, [](const RunConfig& c) { return std::string(c.m ? "true" : "false"); }, \
        [](RunConfig& c, std::string_view v) { c.m = parse_bool(k, v); }          \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      GFAM_UINT("nodes", nodes),
      GFAM_UINT("workers_per_node", workers_per_node),
      Field{"mode", [](const RunConfig& c) { return std::string(to_string(c.mode)); },
            [](RunConfig& c, std::string_view v) { c.mode = parse_mode(std::string(v)); }},
      Field{"txn.algorithm", [](const RunConfig& c) { return std::string(to_string(c.algorithm)); },
            [](RunConfig& c, std::string_view v) { c.algorithm = parse_algorithm(std::string(v)); }},
      Field{"profile", [](const RunConfig& c) { return c.profile; },
            [](RunConfig& c, std::string_view v) {
              if (v != "custom") make_profile(v);
              c.profile = std::string(v);
            }},
      GFAM_INT("profile.c2m_ns", custom.c2m_ns),
      GFAM_INT("profile.c2c_ns", custom.c2c_ns),
      GFAM_INT("profile.link_rt_ns", custom.link_rt_ns),
      GFAM_INT("profile.dram_ns", custom.dram_ns),
      GFAM_INT("profile.local_mem_ns", custom.local_mem_ns),
      GFAM_INT("profile.ep_logic_ns", custom.ep_logic_ns),
      GFAM_DOUBLE("profile.bus_bytes_per_ns", custom.bus_bytes_per_ns),
      GFAM_UINT("cache.capacity", cache.capacity_bytes),
      GFAM_UINT("cache.assoc", cache.associativity),
      Field{"cache.policy",
            [](const RunConfig& c) { return std::string(c.cache.policy == EvictionPolicy::Lru ? "lru" : "random"); },
            [](RunConfig& c, std::string_view v) {
              if (v == "lru")
                c.cache.policy = EvictionPolicy::Lru;
              else if (v == "random")
                c.cache.policy = EvictionPolicy::Random;
              else
                bad("cache.policy", "lru or random", v);
            }},
      GFAM_UINT("sf.entries", sf.entries),
      GFAM_UINT("sf.ways", sf.ways),
      GFAM_UINT("vat.tables", shim.vat.tables),
      GFAM_UINT("vat.entries_per_table", shim.vat.entries_per_table),
      GFAM_UINT("vat.ways", shim.vat.ways),
      GFAM_UINT("vat.max_retries", shim.vat.max_retries),
      GFAM_UINT("vat.lut_bits", shim.vat.lut_bits),
      GFAM_UINT("vat.hash_bits", shim.vat.hash_bits),
      GFAM_UINT("vf.bytes", shim.vf.bytes),
      GFAM_UINT("vf.hashes", shim.vf.hashes),
      GFAM_UINT("vbf.bytes", shim.vbf.bytes),
      GFAM_UINT("vbf.hashes", shim.vbf.hashes),
      Field{"resize.interval_ms",
            [](const RunConfig& c) { return fmt(static_cast<double>(c.resize.interval_ns) / 1e6); },
            [](RunConfig& c, std::string_view v) {
              double ms = parse_double("resize.interval_ms", v);
              if (ms <= 0) bad("resize.interval_ms", "a positive number", v);
              c.resize.interval_ns = static_cast<SimTime>(std::llround(ms * 1e6));
            }},
      GFAM_DOUBLE("resize.expand", resize.expand),
      GFAM_DOUBLE("resize.shrink", resize.shrink),
      GFAM_UINT("resize.k", resize.k),
      GFAM_UINT("hw.chunk_bytes", chunk_bytes),
      GFAM_UINT("gfam.capacity", capacity),
      GFAM_UINT("queue.depth", queue_depth),
      Field{"workload.kind",
            [](const RunConfig& c) { return std::string(c.workload == WorkloadKind::Ycsb ? "ycsb" : "tpcc"); },
            [](RunConfig& c, std::string_view v) {
              if (v == "ycsb")
                c.workload = WorkloadKind::Ycsb;
              else if (v == "tpcc")
                c.workload = WorkloadKind::Tpcc;
              else
                bad("workload.kind", "ycsb or tpcc", v);
            }},
      GFAM_UINT("ycsb.records", ycsb.records),
      GFAM_UINT("ycsb.ops_per_txn", ycsb.ops_per_txn),
      GFAM_DOUBLE("ycsb.write_ratio", ycsb.write_ratio),
      GFAM_DOUBLE("ycsb.theta", ycsb.theta),
      GFAM_UINT("ycsb.record_size", ycsb.record_size),
      GFAM_UINT("tpcc.warehouses_per_node", tpcc.warehouses_per_node),
      Field{"tpcc.mix", [](const RunConfig& c) { return std::string(c.tpcc.mix == TpccMix::DM ? "DM" : "NO"); },
            [](RunConfig& c, std::string_view v) {
              if (v == "DM" || v == "dm")
                c.tpcc.mix = TpccMix::DM;
              else if (v == "NO" || v == "no")
                c.tpcc.mix = TpccMix::NO;
              else
                bad("tpcc.mix", "DM or NO", v);
            }},
      GFAM_DOUBLE("tpcc.payment_fraction", tpcc.payment_fraction),
      GFAM_DOUBLE("tpcc.remote_prob", tpcc.remote_prob),
      GFAM_UINT("txn.count", txns),
      GFAM_UINT("txn.cpu_op_ns", cpu_op_ns),
      GFAM_UINT("txn.backoff_ns", backoff_ns),
      GFAM_BOOL("txn.history", history),
      GFAM_BOOL("txn.check", check),
      GFAM_UINT("seed", seed),
  };
  return f;
}

#undef GFAM_UINT
#undef GFAM_INT
#undef GFAM_DOUBLE
#undef GFAM_BOOL

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  for (const Field& f : fields()) {
    if (key == f.key) {
      f.set(*this, trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Field& f : fields()) out.emplace_back(f.key, f.get(*this));
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const Field& f : fields()) out.emplace_back(f.key);
  return out;
}

LatencyProfile RunConfig::latency_profile() const {
  if (profile == "custom") return make_profile(custom);
  return make_profile(profile);
}

TpccLiteParams RunConfig::tpcc_params() const {
  TpccLiteParams p = tpcc;
  p.nodes = nodes;
  return p;
}

FabricConfig RunConfig::fabric_config() const {
  FabricConfig f;
  f.nodes = nodes;
  f.profile = latency_profile();
  f.cache = cache;
  f.sf = sf;
  f.shim = shim;
  f.queue_depth = queue_depth;
  f.resize = resize;
  f.capacity = capacity;
  f.chunk_bytes = chunk_bytes;
  f.seed = seed;
  return f;
}

DbConfig RunConfig::db_config() const {
  DbConfig d;
  d.mode = mode;
  d.algorithm = algorithm;
  d.record_size = ycsb.record_size;
  d.cpu_op_ns = cpu_op_ns;
  d.backoff_ns = backoff_ns;
  d.record_history = history;
  return d;
}

void RunConfig::validate() const {
  if (nodes == 0 || nodes > kMaxNodes) throw ConfigError("nodes: must be in [1, 16]");
  if (workers_per_node == 0) throw ConfigError("workers_per_node: must be > 0");
  if (txns == 0) throw ConfigError("txn.count: must be > 0");
  fabric_config().validate();
  db_config().validate();
  if (workload == WorkloadKind::Ycsb)
    ycsb.validate();
  else
    tpcc_params().validate();
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (std::size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    cfg.set(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace gfam
