#include "gfam/workloads.hpp"

#include <cmath>

#include "gfam/error.hpp"

namespace gfam {

namespace {

// log1p(x)/x and expm1(x)/x, accurate near zero.
double helper1(double x) {
  if (std::abs(x) > 1e-8) return std::log1p(x) / x;
  return 1 - x * (0.5 - x * (1.0 / 3.0 - 0.25 * x));
}

double helper2(double x) {
  if (std::abs(x) > 1e-8) return std::expm1(x) / x;
  return 1 + x * 0.5 * (1 + x * (1.0 / 3.0) * (1 + 0.25 * x));
}

}  // namespace

ZipfGenerator::ZipfGenerator(std::uint64_t n, double theta) : n_(n), theta_(theta) {
  if (n == 0) throw ConfigError("ycsb.records: must be > 0");
  if (!(theta >= 0 && theta < 1)) throw ConfigError("ycsb.theta: must be in [0, 1)");
  if (theta_ == 0) return;
  h_x1_ = h_integral(1.5) - 1;
  h_n_ = h_integral(static_cast<double>(n_) + 0.5);
  s_ = 2 - h_integral_inverse(h_integral(2.5) - h(2));
}

double ZipfGenerator::h(double x) const { return std::exp(-theta_ * std::log(x)); }

double ZipfGenerator::h_integral(double x) const {
  double lx = std::log(x);
  return helper2((1 - theta_) * lx) * lx;
}

double ZipfGenerator::h_integral_inverse(double x) const {
  double t = x * (1 - theta_);
  if (t < -1) t = -1;
  return std::exp(helper1(t) * x);
}

std::uint64_t ZipfGenerator::sample(Rng& rng) const {
  if (theta_ == 0) return rng.below(n_) + 1;
  for (;;) {
    double u = h_n_ + rng.uniform() * (h_x1_ - h_n_);
    double x = h_integral_inverse(u);
    double kf = std::floor(x + 0.5);
    std::uint64_t k;
    if (kf < 1)
      k = 1;
    else if (kf > static_cast<double>(n_))
      k = n_;
    else
      k = static_cast<std::uint64_t>(kf);
    double kd = static_cast<double>(k);
    if (kd - x <= s_ || u >= h_integral(kd + 0.5) - h(kd)) return k;
  }
}

void YcsbParams::validate() const {
  if (records == 0) throw ConfigError("ycsb.records: must be > 0");
  if (ops_per_txn == 0) throw ConfigError("ycsb.ops_per_txn: must be > 0");
  if (!(write_ratio >= 0 && write_ratio <= 1)) throw ConfigError("ycsb.write_ratio: must be in [0, 1]");
  if (!(theta >= 0 && theta < 1)) throw ConfigError("ycsb.theta: must be in [0, 1)");
  if (record_size == 0) throw ConfigError("ycsb.record_size: must be > 0");
}

YcsbGenerator::YcsbGenerator(const YcsbParams& p, std::uint64_t seed, std::uint64_t stream)
    : p_(p), zipf_(p.records, p.theta), rng_(seed, stream) {
  p_.validate();
}

Txn YcsbGenerator::next() {
  Txn t;
  t.kind = static_cast<std::uint8_t>(TxnKind::Ycsb);
  t.ops.reserve(p_.ops_per_txn);
  for (std::uint32_t i = 0; i < p_.ops_per_txn; ++i) {
    std::uint64_t key = zipf_.sample(rng_) - 1;
    t.ops.push_back({key, rng_.bernoulli(p_.write_ratio)});
  }
  return t;
}

void TpccLiteParams::validate() const {
  if (nodes == 0 || nodes > kMaxNodes) throw ConfigError("tpcc.nodes: must be in [1, 16]");
  if (warehouses_per_node == 0) throw ConfigError("tpcc.warehouses_per_node: must be > 0");
  if (!(payment_fraction >= 0 && payment_fraction <= 1))
    throw ConfigError("tpcc.payment_fraction: must be in [0, 1]");
  if (!(remote_prob >= 0 && remote_prob <= 1)) throw ConfigError("tpcc.remote_prob: must be in [0, 1]");
  if (districts == 0 || customers_per_district == 0 || items == 0 || order_slots == 0)
    throw ConfigError("tpcc: table sizes must be > 0");
}

namespace {

std::uint64_t district_id(const TpccLiteParams& p, std::uint64_t w, std::uint64_t d) { return w * p.districts + d; }

}  // namespace

NodeId tpcc_home_node(const TpccLiteParams& p, std::uint64_t k) {
  std::uint64_t id = k & ((std::uint64_t{1} << 56) - 1);
  std::uint64_t w = 0;
  switch (tpcc::table_of(k)) {
    case tpcc::Warehouse: w = id; break;
    case tpcc::District: w = id / p.districts; break;
    case tpcc::Customer: w = id / (p.districts * std::uint64_t{p.customers_per_district}); break;
    case tpcc::Item: return static_cast<NodeId>(id % p.nodes);
    case tpcc::Stock: w = id / p.items; break;
    case tpcc::Order: w = id / (p.districts * std::uint64_t{p.order_slots}); break;
  }
  return static_cast<NodeId>(w / p.warehouses_per_node);
}

TpccKeys tpcc_keys(const TpccLiteParams& p) {
  p.validate();
  TpccKeys out;
  auto add = [&](std::uint64_t k) {
    out.keys.push_back(k);
    out.placement.push_back(tpcc_home_node(p, k));
  };
  const std::uint64_t wh = p.warehouses();
  for (std::uint64_t w = 0; w < wh; ++w) {
    add(tpcc::key(tpcc::Warehouse, w));
    for (std::uint64_t d = 0; d < p.districts; ++d) {
      std::uint64_t did = district_id(p, w, d);
      add(tpcc::key(tpcc::District, did));
      for (std::uint64_t c = 0; c < p.customers_per_district; ++c)
        add(tpcc::key(tpcc::Customer, did * p.customers_per_district + c));
      for (std::uint64_t o = 0; o < p.order_slots; ++o) add(tpcc::key(tpcc::Order, did * p.order_slots + o));
    }
    for (std::uint64_t i = 0; i < p.items; ++i) add(tpcc::key(tpcc::Stock, w * p.items + i));
  }
  for (std::uint64_t i = 0; i < p.items; ++i) add(tpcc::key(tpcc::Item, i));
  return out;
}

TpccGenerator::TpccGenerator(const TpccLiteParams& p, NodeId home, std::uint64_t seed, std::uint64_t stream)
    : p_(p), home_(home), rng_(seed, stream) {
  p_.validate();
  if (home >= p_.nodes) throw ConfigError("tpcc: home node out of range");
}

std::uint32_t TpccGenerator::local_warehouse() {
  return home_ * p_.warehouses_per_node + static_cast<std::uint32_t>(rng_.below(p_.warehouses_per_node));
}

std::uint32_t TpccGenerator::remote_warehouse(std::uint32_t home_wh) {
  if (p_.nodes < 2) return home_wh;
  std::uint32_t others = (p_.nodes - 1) * p_.warehouses_per_node;
  std::uint32_t pick = static_cast<std::uint32_t>(rng_.below(others));
  std::uint32_t first_local = home_ * p_.warehouses_per_node;
  return pick < first_local ? pick : pick + p_.warehouses_per_node;
}

Txn TpccGenerator::new_order() {
  Txn t;
  t.kind = static_cast<std::uint8_t>(TxnKind::NewOrder);
  std::uint32_t w = local_warehouse();
  std::uint64_t d = rng_.below(p_.districts);
  std::uint64_t did = district_id(p_, w, d);
  std::uint64_t c = rng_.below(p_.customers_per_district);
  t.ops.push_back({tpcc::key(tpcc::Warehouse, w), false});
  t.ops.push_back({tpcc::key(tpcc::District, did), true});
  t.ops.push_back({tpcc::key(tpcc::Customer, did * p_.customers_per_district + c), false});
  t.ops.push_back({tpcc::key(tpcc::Order, did * p_.order_slots + rng_.below(p_.order_slots)), true});
  std::uint64_t lines = 5 + rng_.below(11);
  for (std::uint64_t l = 0; l < lines; ++l) {
    std::uint64_t item = rng_.below(p_.items);
    std::uint32_t supply = rng_.bernoulli(p_.remote_prob) ? remote_warehouse(w) : w;
    t.ops.push_back({tpcc::key(tpcc::Item, item), false});
    t.ops.push_back({tpcc::key(tpcc::Stock, std::uint64_t{supply} * p_.items + item), true});
  }
  return t;
}

Txn TpccGenerator::payment() {
  Txn t;
  t.kind = static_cast<std::uint8_t>(TxnKind::Payment);
  std::uint32_t w = local_warehouse();
  std::uint64_t d = rng_.below(p_.districts);
  t.ops.push_back({tpcc::key(tpcc::Warehouse, w), true});
  t.ops.push_back({tpcc::key(tpcc::District, district_id(p_, w, d)), true});
  std::uint32_t cw = rng_.bernoulli(p_.remote_prob) ? remote_warehouse(w) : w;
  std::uint64_t cdid = district_id(p_, cw, rng_.below(p_.districts));
  std::uint64_t c = rng_.below(p_.customers_per_district);
  t.ops.push_back({tpcc::key(tpcc::Customer, cdid * p_.customers_per_district + c), true});
  return t;
}

Txn TpccGenerator::next() {
  if (p_.mix == TpccMix::NO) return new_order();
  return rng_.bernoulli(p_.payment_fraction) ? payment() : new_order();
}

}  // namespace gfam
