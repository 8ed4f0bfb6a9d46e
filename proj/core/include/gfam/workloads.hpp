#pragma once

#include <cstdint>
#include <vector>

#include "gfam/simcore.hpp"
#include "gfam/txkv.hpp"

namespace gfam {

// Zipf over ranks 1..n with P(r) proportional to 1/r^theta, sampled by
// rejection-inversion (Hörmann and Derflinger). theta = 0 is uniform.
class ZipfGenerator {
 public:
  ZipfGenerator(std::uint64_t n, double theta);

  std::uint64_t n() const { return n_; }
  double theta() const { return theta_; }
  std::uint64_t sample(Rng& rng) const;

 private:
  double h(double x) const;
  double h_integral(double x) const;
  double h_integral_inverse(double x) const;

  std::uint64_t n_;
  double theta_;
  double h_x1_ = 0;
  double h_n_ = 0;
  double s_ = 0;
};

enum class TxnKind : std::uint8_t { Ycsb = 0, NewOrder = 1, Payment = 2 };

struct YcsbParams {
  std::uint64_t records = 1'000'000;
  std::uint32_t ops_per_txn = 16;
  double write_ratio = 0.5;
  double theta = 0.9;
  std::uint32_t record_size = 200;

  void validate() const;
};

class YcsbGenerator {
 public:
  YcsbGenerator(const YcsbParams& p, std::uint64_t seed, std::uint64_t stream);
  Txn next();

 private:
  YcsbParams p_;
  ZipfGenerator zipf_;
  Rng rng_;
};

enum class TpccMix : std::uint8_t { DM, NO };

struct TpccLiteParams {
  std::uint32_t nodes = 8;
  std::uint32_t warehouses_per_node = 1;
  TpccMix mix = TpccMix::DM;
  double payment_fraction = 0.5;  // DM only
  double remote_prob = 0.01;
  std::uint32_t districts = 10;
  std::uint32_t customers_per_district = 300;
  std::uint32_t items = 10'000;
  std::uint32_t order_slots = 64;  // order rows per district, reused round-robin

  void validate() const;
  std::uint32_t warehouses() const { return nodes * warehouses_per_node; }
};

// Key encoding: table id in the top byte.
namespace tpcc {
enum Table : std::uint64_t { Warehouse = 1, District = 2, Customer = 3, Item = 4, Stock = 5, Order = 6 };
inline std::uint64_t key(Table t, std::uint64_t id) { return (static_cast<std::uint64_t>(t) << 56) | id; }
inline Table table_of(std::uint64_t k) { return static_cast<Table>(k >> 56); }
}  // namespace tpcc

struct TpccKeys {
  std::vector<std::uint64_t> keys;
  std::vector<NodeId> placement;
};

// Every row the generator can touch, with each warehouse's rows on its home node.
TpccKeys tpcc_keys(const TpccLiteParams& p);
NodeId tpcc_home_node(const TpccLiteParams& p, std::uint64_t key);

class TpccGenerator {
 public:
  TpccGenerator(const TpccLiteParams& p, NodeId home, std::uint64_t seed, std::uint64_t stream);
  Txn next();

 private:
  std::uint32_t local_warehouse();
  std::uint32_t remote_warehouse(std::uint32_t home_wh);
  Txn new_order();
  Txn payment();

  TpccLiteParams p_;
  NodeId home_;
  Rng rng_;
};

}  // namespace gfam
