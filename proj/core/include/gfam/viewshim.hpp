#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gfam/dram.hpp"
#include "gfam/simcore.hpp"
#include "gfam/stats.hpp"

namespace gfam {

// ---------------------------------------------------------------------------
// Filters

class BloomFilter {
 public:
  BloomFilter(std::uint64_t bytes, std::uint32_t hashes, std::uint64_t seed);

  void insert(std::uint64_t key);
  bool query(std::uint64_t key) const;
  void clear();

  std::uint64_t bits() const { return bits_.size() * 64; }
  std::uint64_t set_bits() const { return set_; }
  // (fraction of set bits)^k
  double estimated_fp() const;

 private:
  std::uint64_t cell(std::uint64_t key, std::uint32_t i) const;

  std::vector<std::uint64_t> bits_;
  std::uint32_t hashes_;
  std::vector<std::uint64_t> seeds_;
  std::uint64_t set_ = 0;
};

// Counting bloom filter: `bytes * 8` cells, each a 4-bit saturating counter.
// A cell answers positive while its counter is non-zero.
class CountingBloomFilter {
 public:
  static constexpr std::uint8_t kSaturated = 15;

  CountingBloomFilter(std::uint64_t bytes, std::uint32_t hashes, std::uint64_t seed);

  void insert(std::uint64_t key);
  void remove(std::uint64_t key);
  bool query(std::uint64_t key) const;

  std::uint64_t cells() const { return counters_.size(); }
  std::uint64_t nonzero_cells() const { return nonzero_; }
  std::uint64_t saturated_cells() const { return saturated_; }

 private:
  std::uint64_t cell(std::uint64_t key, std::uint32_t i) const;

  std::vector<std::uint8_t> counters_;
  std::uint32_t hashes_;
  std::vector<std::uint64_t> seeds_;
  std::uint64_t nonzero_ = 0;
  std::uint64_t saturated_ = 0;
};

// Expected false-positive rate of a k-hash bloom filter over m cells holding n keys.
double bloom_fp_rate(std::uint64_t cells, std::uint32_t hashes, std::uint64_t items);

// ---------------------------------------------------------------------------
// View address table

struct VatConfig {
  std::uint32_t tables = 1;
  std::uint64_t entries_per_table = 1u << 20;
  std::uint32_t ways = 2;  // slots per bucket; two hash functions pick two buckets
  std::uint32_t max_retries = 64;
  std::uint32_t lut_bits = 16;
  std::uint32_t hash_bits = 40;

  void validate() const;
};

inline constexpr std::uint32_t kNoTable = 0xffffffffu;

class CuckooTable {
 public:
  struct Hash {
    std::uint64_t mul1, add1, mul2, add2;
  };

  CuckooTable(std::uint64_t entries, std::uint32_t ways, const Hash& hash);

  std::uint64_t entries() const { return slots_.size(); }
  std::uint64_t buckets() const { return buckets_; }
  std::uint32_t ways() const { return ways_; }
  std::uint64_t occupancy() const { return occupancy_; }
  double load() const { return static_cast<double>(occupancy_) / static_cast<double>(entries()); }

  std::uint64_t bucket1(std::uint64_t key) const;
  std::uint64_t bucket2(std::uint64_t key) const;

  bool valid(std::uint64_t slot) const { return slots_[slot] != kEmpty; }
  std::uint64_t indicator(std::uint64_t slot) const { return slots_[slot]; }
  const std::uint8_t* data(std::uint64_t slot) const { return data_.get() + slot * kLineSize; }
  std::uint8_t* data(std::uint64_t slot) { return data_.get() + slot * kLineSize; }

  void place(std::uint64_t slot, std::uint64_t indicator, const std::uint8_t* bytes);
  void clear(std::uint64_t slot);

 private:
  static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};
  struct FreeDeleter {
    void operator()(std::uint8_t* p) const;
  };

  std::uint64_t buckets_;
  std::uint32_t ways_;
  std::uint32_t shift_;
  Hash hash_;
  std::vector<std::uint64_t> slots_;
  std::unique_ptr<std::uint8_t, FreeDeleter> data_;  // zero pages stay untouched
  std::uint64_t occupancy_ = 0;
};

struct VatLookup {
  bool found = false;
  std::uint32_t table = kNoTable;
  std::uint64_t slot = 0;
  std::uint32_t probes = 0;
};

enum class InsertStatus { Ok, ResizeRequired };

struct VatInsertResult {
  InsertStatus status = InsertStatus::Ok;
  std::uint32_t table = kNoTable;
  std::uint32_t probes = 0;
  std::uint32_t retries = 0;
  bool updated = false;  // an existing entry was overwritten in place
};

struct ResizeOutcome {
  bool done = false;
  std::vector<std::uint32_t> tables;  // tables created or removed
  std::uint64_t moved_entries = 0;
};

// LUT + list of bucketized cuckoo tables mapping view indicators to VMS slots.
class ViewAddressTable {
 public:
  struct TableInfo {
    std::unique_ptr<CuckooTable> table;
    std::uint32_t parent = kNoTable;
    std::uint64_t epoch = 0;  // odd while a resize is in flight
    SimTime blocked_until = 0;
    bool resizing_error = false;
    std::uint64_t prefixes = 0;
  };

  ViewAddressTable(const VatConfig& cfg, std::uint64_t seed);

  const VatConfig& config() const { return cfg_; }

  static std::uint64_t indicator(NodeId node, std::uint64_t line_index) {
    return (static_cast<std::uint64_t>(node) << 52) | (line_index & ((std::uint64_t{1} << 52) - 1));
  }
  static NodeId node_of(std::uint64_t indicator) { return static_cast<NodeId>(indicator >> 52); }
  std::uint64_t prefix(std::uint64_t ind) const {
    return (ind >> cfg_.hash_bits) & ((std::uint64_t{1} << cfg_.lut_bits) - 1);
  }
  std::uint64_t key(std::uint64_t ind) const { return ind & ((std::uint64_t{1} << cfg_.hash_bits) - 1); }
  std::uint32_t table_of(std::uint64_t ind) const { return lut_[prefix(ind)]; }

  VatLookup lookup(std::uint64_t ind) const;
  // Caller guarantees `ind` is not present.
  VatInsertResult insert_absent(std::uint64_t ind, const std::uint8_t* data);
  VatInsertResult upsert(std::uint64_t ind, const std::uint8_t* data);
  bool invalidate(std::uint64_t ind);

  CuckooTable& table(std::uint32_t id) { return *infos_.at(id).table; }
  const CuckooTable& table(std::uint32_t id) const { return *infos_.at(id).table; }
  TableInfo& info(std::uint32_t id) { return infos_.at(id); }
  const TableInfo& info(std::uint32_t id) const { return infos_.at(id); }
  std::vector<std::uint32_t> live_tables() const;
  std::size_t table_slots() const { return infos_.size(); }
  const std::vector<std::uint32_t>& lut() const { return lut_; }

  // Moves the i-th prefix of table `t` to new table i mod k, keeping in-table
  // positions. Not done when `t` owns fewer than two prefixes.
  ResizeOutcome split(std::uint32_t t, std::uint32_t k);
  // Replaces `t` with a table k times larger and reinserts every entry.
  ResizeOutcome rehash(std::uint32_t t, std::uint32_t k);
  // Folds a leaf table created by a split back into its parent.
  ResizeOutcome merge(std::uint32_t t);

  std::uint64_t total_entries() const;
  template <typename F>
  void for_each_entry(F&& f) const {
    for (const auto& info : infos_) {
      if (!info.table) continue;
      const CuckooTable& tb = *info.table;
      for (std::uint64_t s = 0; s < tb.entries(); ++s)
        if (tb.valid(s)) f(tb.indicator(s), tb.data(s));
    }
  }

  // Placement and LUT consistency. Empty string when clean.
  std::string check_invariants() const;

 private:
  std::uint32_t new_table(std::uint64_t entries);
  VatInsertResult kick_insert(std::uint32_t t, std::uint64_t ind, const std::uint8_t* data);

  VatConfig cfg_;
  CuckooTable::Hash hash_;
  std::vector<std::uint32_t> lut_;
  std::vector<TableInfo> infos_;
  Rng rng_;
};

// ---------------------------------------------------------------------------
// View shim: VAT plus per-node VF and VBF

struct FilterConfig {
  std::uint64_t bytes = 0;
  std::uint32_t hashes = 2;
};

struct ViewShimConfig {
  VatConfig vat;
  FilterConfig vf{512, 2};
  FilterConfig vbf{16 * 1024, 2};
  double vf_design_fp = 0.25;

  void validate() const;
};

struct ViewShimStats {
  Histogram vat_probes;
  Histogram vat_retries;
  std::uint64_t translate_loads = 0;
  std::uint64_t vf_negative = 0;
  std::uint64_t vf_positive = 0;
  std::uint64_t vf_false_positive = 0;
  std::uint64_t vms_hits = 0;
  std::uint64_t vms_overflow_count = 0;  // new VMS views created by dirty evictions
  std::uint64_t vat_updates = 0;
  std::uint64_t vat_invalidations = 0;
  std::uint64_t vf_rebuilds = 0;
  std::uint64_t vbf_inserts = 0;
  std::uint64_t vbf_removes = 0;
  std::uint64_t resize_required = 0;

  double vf_sift_rate() const {
    return translate_loads ? static_cast<double>(vf_negative) / static_cast<double>(translate_loads) : 0.0;
  }
};

struct TranslateResult {
  bool vms = false;
  LineData data{};  // valid when vms
  bool vf_positive = false;
  std::uint32_t probes = 0;
};

enum class VbfAction { InsertOnFill, RemoveOnWriteback };

class ViewShim {
 public:
  ViewShim(const ViewShimConfig& cfg, std::uint32_t nodes, std::uint64_t seed);

  const ViewShimConfig& config() const { return cfg_; }

  // VF first, VAT only on a VF hit. Also records the fill in the node's VBF.
  TranslateResult translate_load(NodeId node, std::uint64_t line_index);
  VatInsertResult vat_insert(NodeId node, std::uint64_t line_index, const LineData& data);
  // Returns whether an entry was removed; `probes` receives VAT buckets read.
  bool vat_invalidate(NodeId node, std::uint64_t line_index, std::uint32_t* probes = nullptr);
  void vbf_update(NodeId node, std::uint64_t line_index, VbfAction action);

  bool vf_query(NodeId node, std::uint64_t line_index) const;
  bool vbf_query(NodeId node, std::uint64_t line_index) const;
  // Node's overflowed view, if any. No side effects.
  std::optional<LineData> peek_view(NodeId node, std::uint64_t line_index) const;
  // Table serving this node/line, for blocking checks.
  std::uint32_t table_for(NodeId node, std::uint64_t line_index) const {
    return vat_.table_of(ViewAddressTable::indicator(node, line_index));
  }

  void rebuild_vf(NodeId node);
  void rebuild_all_vfs();

  ViewAddressTable& vat() { return vat_; }
  const ViewAddressTable& vat() const { return vat_; }
  const BloomFilter& vf(NodeId node) const { return vfs_.at(node); }
  const CountingBloomFilter& vbf(NodeId node) const { return vbfs_.at(node); }
  std::uint64_t live_views(NodeId node) const { return live_.at(node); }
  const ViewShimStats& stats() const { return stats_; }

  // VF soundness over every live VAT entry. Empty string when clean.
  std::string check_invariants() const;

 private:
  void maybe_rebuild_vf(NodeId node);

  ViewShimConfig cfg_;
  ViewAddressTable vat_;
  std::vector<BloomFilter> vfs_;
  std::vector<CountingBloomFilter> vbfs_;
  std::vector<std::uint64_t> live_;
  std::vector<std::uint64_t> inserts_since_rebuild_;
  ViewShimStats stats_;
};

}  // namespace gfam
