#include "gfam/viewshim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <unordered_set>

#include "gfam/error.hpp"

namespace gfam {

namespace {

std::vector<std::uint64_t> make_seeds(std::uint32_t n, std::uint64_t seed) {
  std::vector<std::uint64_t> s(n);
  std::uint64_t x = seed;
  for (auto& v : s) {
    x = splitmix64(x);
    v = x;
  }
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// BloomFilter

BloomFilter::BloomFilter(std::uint64_t bytes, std::uint32_t hashes, std::uint64_t seed)
    : bits_((bytes * 8 + 63) / 64, 0), hashes_(hashes), seeds_(make_seeds(hashes, seed)) {
  if (bytes == 0 || hashes == 0) throw ConfigError("vf: bytes and hashes must be > 0");
}

std::uint64_t BloomFilter::cell(std::uint64_t key, std::uint32_t i) const {
  return splitmix64(key ^ seeds_[i]) % bits();
}

void BloomFilter::insert(std::uint64_t key) {
  for (std::uint32_t i = 0; i < hashes_; ++i) {
    std::uint64_t c = cell(key, i);
    std::uint64_t& w = bits_[c / 64];
    std::uint64_t m = std::uint64_t{1} << (c % 64);
    if (!(w & m)) {
      w |= m;
      ++set_;
    }
  }
}

bool BloomFilter::query(std::uint64_t key) const {
  for (std::uint32_t i = 0; i < hashes_; ++i) {
    std::uint64_t c = cell(key, i);
    if (!(bits_[c / 64] & (std::uint64_t{1} << (c % 64)))) return false;
  }
  return true;
}

void BloomFilter::clear() {
  std::fill(bits_.begin(), bits_.end(), 0);
  set_ = 0;
}

double BloomFilter::estimated_fp() const {
  double f = static_cast<double>(set_) / static_cast<double>(bits());
  return std::pow(f, static_cast<double>(hashes_));
}

// ---------------------------------------------------------------------------
// CountingBloomFilter

CountingBloomFilter::CountingBloomFilter(std::uint64_t bytes, std::uint32_t hashes, std::uint64_t seed)
    : counters_(bytes * 8, 0), hashes_(hashes), seeds_(make_seeds(hashes, seed)) {
  if (bytes == 0 || hashes == 0) throw ConfigError("vbf: bytes and hashes must be > 0");
}

std::uint64_t CountingBloomFilter::cell(std::uint64_t key, std::uint32_t i) const {
  return splitmix64(key ^ seeds_[i]) % counters_.size();
}

void CountingBloomFilter::insert(std::uint64_t key) {
  for (std::uint32_t i = 0; i < hashes_; ++i) {
    std::uint8_t& c = counters_[cell(key, i)];
    if (c == kSaturated) continue;
    if (c == 0) ++nonzero_;
    if (++c == kSaturated) ++saturated_;
  }
}

void CountingBloomFilter::remove(std::uint64_t key) {
  for (std::uint32_t i = 0; i < hashes_; ++i) {
    std::uint8_t& c = counters_[cell(key, i)];
    if (c == 0 || c == kSaturated) continue;
    if (--c == 0) --nonzero_;
  }
}

bool CountingBloomFilter::query(std::uint64_t key) const {
  for (std::uint32_t i = 0; i < hashes_; ++i)
    if (counters_[cell(key, i)] == 0) return false;
  return true;
}

double bloom_fp_rate(std::uint64_t cells, std::uint32_t hashes, std::uint64_t items) {
  double k = hashes;
  double fill = 1.0 - std::exp(-k * static_cast<double>(items) / static_cast<double>(cells));
  return std::pow(fill, k);
}

// ---------------------------------------------------------------------------
// CuckooTable

void VatConfig::validate() const {
  if (tables == 0) throw ConfigError("vat.tables: must be > 0");
  if (ways == 0) throw ConfigError("vat.ways: must be > 0");
  if (entries_per_table % ways != 0 || !std::has_single_bit(entries_per_table / ways))
    throw ConfigError("vat.entries_per_table: entries / ways must be a power of two");
  if (lut_bits == 0 || lut_bits > 24) throw ConfigError("vat.lut_bits: must be in [1, 24]");
  if (hash_bits == 0 || hash_bits + lut_bits > 56)
    throw ConfigError("vat.hash_bits: lut_bits + hash_bits must be <= 56");
  if (tables > (1u << lut_bits)) throw ConfigError("vat.tables: more tables than LUT prefixes");
  if (max_retries == 0) throw ConfigError("vat.max_retries: must be > 0");
}

void CuckooTable::FreeDeleter::operator()(std::uint8_t* p) const { std::free(p); }

CuckooTable::CuckooTable(std::uint64_t entries, std::uint32_t ways, const Hash& hash)
    : buckets_(entries / ways), ways_(ways), hash_(hash), slots_(entries, kEmpty) {
  if (!std::has_single_bit(buckets_)) throw ConfigError("cuckoo table bucket count must be a power of two");
  shift_ = 64 - static_cast<std::uint32_t>(std::countr_zero(buckets_));
  data_.reset(static_cast<std::uint8_t*>(std::calloc(entries, kLineSize)));
  if (!data_) throw OutOfMemoryError("cannot allocate VMS buffer");
}

std::uint64_t CuckooTable::bucket1(std::uint64_t key) const {
  if (shift_ == 64) return 0;
  return (hash_.mul1 * key + hash_.add1) >> shift_;
}

std::uint64_t CuckooTable::bucket2(std::uint64_t key) const {
  if (shift_ == 64) return 0;
  return (hash_.mul2 * key + hash_.add2) >> shift_;
}

void CuckooTable::place(std::uint64_t slot, std::uint64_t ind, const std::uint8_t* bytes) {
  if (!valid(slot)) ++occupancy_;
  slots_[slot] = ind;
  std::memcpy(data(slot), bytes, kLineSize);
}

void CuckooTable::clear(std::uint64_t slot) {
  if (!valid(slot)) return;
  slots_[slot] = kEmpty;
  --occupancy_;
}

// ---------------------------------------------------------------------------
// ViewAddressTable

ViewAddressTable::ViewAddressTable(const VatConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), rng_(seed, 0x7A7) {
  cfg_.validate();
  Rng h(seed, 0x4A54);
  hash_ = {h.next() | 1, h.next(), h.next() | 1, h.next()};
  lut_.assign(std::size_t{1} << cfg_.lut_bits, 0);
  for (std::uint32_t t = 0; t < cfg_.tables; ++t) new_table(cfg_.entries_per_table);
  // Interleave prefixes so that clustered indicators still spread over tables.
  for (std::size_t p = 0; p < lut_.size(); ++p) {
    lut_[p] = static_cast<std::uint32_t>(p % cfg_.tables);
    ++infos_[lut_[p]].prefixes;
  }
}

std::uint32_t ViewAddressTable::new_table(std::uint64_t entries) {
  TableInfo info;
  info.table = std::make_unique<CuckooTable>(entries, cfg_.ways, hash_);
  infos_.push_back(std::move(info));
  return static_cast<std::uint32_t>(infos_.size() - 1);
}

std::vector<std::uint32_t> ViewAddressTable::live_tables() const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < infos_.size(); ++i)
    if (infos_[i].table) out.push_back(i);
  return out;
}

VatLookup ViewAddressTable::lookup(std::uint64_t ind) const {
  VatLookup r;
  r.table = table_of(ind);
  const CuckooTable& tb = table(r.table);
  std::uint64_t k = key(ind);
  for (std::uint64_t b : {tb.bucket1(k), tb.bucket2(k)}) {
    ++r.probes;
    for (std::uint32_t w = 0; w < tb.ways(); ++w) {
      std::uint64_t s = b * tb.ways() + w;
      if (tb.valid(s) && tb.indicator(s) == ind) {
        r.found = true;
        r.slot = s;
        return r;
      }
    }
  }
  return r;
}

VatInsertResult ViewAddressTable::kick_insert(std::uint32_t t, std::uint64_t ind,
                                              const std::uint8_t* data) {
  VatInsertResult r;
  r.table = t;
  CuckooTable& tb = table(t);
  const std::uint32_t ways = tb.ways();
  std::uint64_t k = key(ind);
  std::uint64_t b1 = tb.bucket1(k), b2 = tb.bucket2(k);
  for (std::uint64_t b : {b1, b2}) {
    ++r.probes;
    for (std::uint32_t w = 0; w < ways; ++w) {
      if (!tb.valid(b * ways + w)) {
        tb.place(b * ways + w, ind, data);
        return r;
      }
    }
  }

  // Random walk: displace an occupant and move it to its other bucket.
  std::uint64_t hand_ind = ind;
  LineData hand{};
  std::memcpy(hand.data(), data, kLineSize);
  std::vector<std::uint64_t> path;
  path.reserve(cfg_.max_retries);
  std::uint64_t bucket = rng_.below(2) ? b2 : b1;
  std::uint64_t last_slot = ~std::uint64_t{0};
  auto swap_hand = [&](std::uint64_t slot) {
    LineData tmp{};
    std::memcpy(tmp.data(), tb.data(slot), kLineSize);
    std::uint64_t tmp_ind = tb.indicator(slot);
    tb.place(slot, hand_ind, hand.data());
    hand = tmp;
    hand_ind = tmp_ind;
  };
  for (std::uint32_t retry = 1; retry <= cfg_.max_retries; ++retry) {
    std::uint64_t slot = bucket * ways + rng_.below(ways);
    if (slot == last_slot && ways > 1) slot = bucket * ways + (slot - bucket * ways + 1) % ways;
    swap_hand(slot);
    path.push_back(slot);
    r.retries = retry;
    std::uint64_t vk = key(hand_ind);
    std::uint64_t v1 = tb.bucket1(vk), v2 = tb.bucket2(vk);
    std::uint64_t alt = (bucket == v1) ? v2 : v1;
    ++r.probes;
    for (std::uint32_t w = 0; w < ways; ++w) {
      if (!tb.valid(alt * ways + w)) {
        tb.place(alt * ways + w, hand_ind, hand.data());
        return r;
      }
    }
    bucket = alt;
    last_slot = ~std::uint64_t{0};
    // the slot the displaced entry would land on next round must not be the one it left
    if (alt == slot / ways) last_slot = slot;
  }
  for (auto it = path.rbegin(); it != path.rend(); ++it) swap_hand(*it);
  infos_[t].resizing_error = true;
  r.status = InsertStatus::ResizeRequired;
  return r;
}

VatInsertResult ViewAddressTable::insert_absent(std::uint64_t ind, const std::uint8_t* data) {
  return kick_insert(table_of(ind), ind, data);
}

VatInsertResult ViewAddressTable::upsert(std::uint64_t ind, const std::uint8_t* data) {
  VatLookup lk = lookup(ind);
  if (lk.found) {
    VatInsertResult r;
    r.table = lk.table;
    r.probes = lk.probes;
    r.updated = true;
    std::memcpy(table(lk.table).data(lk.slot), data, kLineSize);
    return r;
  }
  VatInsertResult r = insert_absent(ind, data);
  r.probes += lk.probes;
  return r;
}

bool ViewAddressTable::invalidate(std::uint64_t ind) {
  VatLookup lk = lookup(ind);
  if (!lk.found) return false;
  table(lk.table).clear(lk.slot);
  return true;
}

std::uint64_t ViewAddressTable::total_entries() const {
  std::uint64_t n = 0;
  for (const auto& i : infos_)
    if (i.table) n += i.table->occupancy();
  return n;
}

ResizeOutcome ViewAddressTable::split(std::uint32_t t, std::uint32_t k) {
  ResizeOutcome out;
  std::vector<std::size_t> owned;
  for (std::size_t p = 0; p < lut_.size(); ++p)
    if (lut_[p] == t) owned.push_back(p);
  if (owned.size() < 2) return out;

  ++infos_[t].epoch;
  std::vector<std::uint32_t> dest{t};
  for (std::uint32_t i = 1; i < k; ++i) {
    std::uint32_t id = new_table(table(t).entries());
    infos_[id].parent = t;
    infos_[id].epoch = 1;
    dest.push_back(id);
    out.tables.push_back(id);
  }
  for (std::size_t i = 0; i < owned.size(); ++i) {
    std::uint32_t d = dest[i % k];
    lut_[owned[i]] = d;
    if (d != t) {
      --infos_[t].prefixes;
      ++infos_[d].prefixes;
    }
  }
  CuckooTable& src = table(t);
  for (std::uint64_t s = 0; s < src.entries(); ++s) {
    if (!src.valid(s)) continue;
    std::uint32_t d = lut_[prefix(src.indicator(s))];
    if (d == t) continue;
    table(d).place(s, src.indicator(s), src.data(s));
    src.clear(s);
    ++out.moved_entries;
  }
  ++infos_[t].epoch;
  for (std::uint32_t id : out.tables) ++infos_[id].epoch;
  infos_[t].resizing_error = false;
  out.done = true;
  return out;
}

ResizeOutcome ViewAddressTable::rehash(std::uint32_t t, std::uint32_t k) {
  ResizeOutcome out;
  ++infos_[t].epoch;
  std::uint64_t entries = table(t).entries();
  for (;;) {
    entries *= k;
    std::uint32_t tmp = new_table(entries);
    const CuckooTable& src = table(t);
    bool ok = true;
    for (std::uint64_t s = 0; s < src.entries() && ok; ++s) {
      if (!src.valid(s)) continue;
      ok = kick_insert(tmp, src.indicator(s), src.data(s)).status == InsertStatus::Ok;
      ++out.moved_entries;
    }
    if (ok) {
      infos_[t].table = std::move(infos_[tmp].table);
      infos_.pop_back();
      break;
    }
    infos_.pop_back();
  }
  ++infos_[t].epoch;
  infos_[t].resizing_error = false;
  out.tables.push_back(t);
  out.done = true;
  return out;
}

ResizeOutcome ViewAddressTable::merge(std::uint32_t t) {
  ResizeOutcome out;
  std::uint32_t p = infos_.at(t).parent;
  if (p == kNoTable || !infos_.at(p).table || !infos_[t].table) return out;
  for (const auto& i : infos_)
    if (i.table && i.parent == t) return out;  // only leaves fold back

  ++infos_[t].epoch;
  ++infos_[p].epoch;
  CuckooTable& src = table(t);
  CuckooTable& dst = table(p);
  bool same_shape = src.entries() == dst.entries();
  std::vector<std::uint64_t> inserted;
  bool ok = true;
  for (std::uint64_t s = 0; s < src.entries(); ++s) {
    if (!src.valid(s)) continue;
    if (same_shape && !dst.valid(s)) {
      dst.place(s, src.indicator(s), src.data(s));
    } else if (kick_insert(p, src.indicator(s), src.data(s)).status != InsertStatus::Ok) {
      ok = false;
      break;
    }
    inserted.push_back(src.indicator(s));
    ++out.moved_entries;
  }
  if (!ok) {
    // entries still live in `t`; drop the copies taken so far (LUT still routes to `t`)
    for (std::uint64_t ind : inserted) {
      std::uint64_t k = key(ind);
      for (std::uint64_t b : {dst.bucket1(k), dst.bucket2(k)})
        for (std::uint32_t w = 0; w < dst.ways(); ++w)
          if (dst.valid(b * dst.ways() + w) && dst.indicator(b * dst.ways() + w) == ind)
            dst.clear(b * dst.ways() + w);
    }
    infos_[p].resizing_error = false;
    ++infos_[t].epoch;
    ++infos_[p].epoch;
    out.moved_entries = 0;
    return out;
  }
  for (auto& owner : lut_)
    if (owner == t) owner = p;
  infos_[p].prefixes += infos_[t].prefixes;
  infos_[t].prefixes = 0;
  infos_[t].table.reset();
  ++infos_[t].epoch;
  ++infos_[p].epoch;
  out.tables.push_back(t);
  out.done = true;
  return out;
}

std::string ViewAddressTable::check_invariants() const {
  std::ostringstream err;
  std::unordered_set<std::uint64_t> seen;
  for (std::uint32_t id = 0; id < infos_.size(); ++id) {
    const TableInfo& info = infos_[id];
    if (!info.table) continue;
    if (info.epoch % 2 != 0) err << "table " << id << " left mid-resize\n";
    const CuckooTable& tb = *info.table;
    std::uint64_t count = 0;
    for (std::uint64_t s = 0; s < tb.entries(); ++s) {
      if (!tb.valid(s)) continue;
      ++count;
      std::uint64_t ind = tb.indicator(s);
      std::uint64_t b = s / tb.ways();
      std::uint64_t k = key(ind);
      if (b != tb.bucket1(k) && b != tb.bucket2(k))
        err << "entry " << ind << " in table " << id << " outside its buckets\n";
      if (lut_[prefix(ind)] != id) err << "entry " << ind << " in table " << id << " not routed by LUT\n";
      if (!seen.insert(ind).second) err << "duplicate indicator " << ind << "\n";
    }
    if (count != tb.occupancy()) err << "table " << id << " occupancy counter drift\n";
  }
  for (std::size_t p = 0; p < lut_.size(); ++p)
    if (lut_[p] >= infos_.size() || !infos_[lut_[p]].table) err << "prefix " << p << " routes to a dead table\n";
  return err.str();
}

// ---------------------------------------------------------------------------
// ViewShim

void ViewShimConfig::validate() const {
  vat.validate();
  if (vf.bytes == 0 || vf.hashes == 0) throw ConfigError("vf.bytes/vf.hashes: must be > 0");
  if (vbf.bytes == 0 || vbf.hashes == 0) throw ConfigError("vbf.bytes/vbf.hashes: must be > 0");
  if (!(vf_design_fp > 0 && vf_design_fp < 1)) throw ConfigError("vf.design_fp: must be in (0, 1)");
}

ViewShim::ViewShim(const ViewShimConfig& cfg, std::uint32_t nodes, std::uint64_t seed)
    : cfg_(cfg), vat_(cfg.vat, seed), live_(nodes, 0), inserts_since_rebuild_(nodes, 0) {
  cfg_.validate();
  if (nodes == 0 || nodes > kMaxNodes) throw ConfigError("nodes: must be in [1, 16]");
  for (NodeId n = 0; n < nodes; ++n) {
    vfs_.emplace_back(cfg_.vf.bytes, cfg_.vf.hashes, splitmix64(seed ^ (0xF1000 + n)));
    vbfs_.emplace_back(cfg_.vbf.bytes, cfg_.vbf.hashes, splitmix64(seed ^ (0xB2000 + n)));
  }
}

bool ViewShim::vf_query(NodeId node, std::uint64_t li) const { return vfs_.at(node).query(li); }
bool ViewShim::vbf_query(NodeId node, std::uint64_t li) const { return vbfs_.at(node).query(li); }

TranslateResult ViewShim::translate_load(NodeId node, std::uint64_t li) {
  TranslateResult r;
  ++stats_.translate_loads;
  vbf_update(node, li, VbfAction::InsertOnFill);
  if (!vfs_.at(node).query(li)) {
    ++stats_.vf_negative;
    return r;
  }
  ++stats_.vf_positive;
  r.vf_positive = true;
  VatLookup lk = vat_.lookup(ViewAddressTable::indicator(node, li));
  r.probes = lk.probes;
  stats_.vat_probes.add(lk.probes);
  if (lk.found) {
    ++stats_.vms_hits;
    r.vms = true;
    std::memcpy(r.data.data(), vat_.table(lk.table).data(lk.slot), kLineSize);
  } else {
    ++stats_.vf_false_positive;
  }
  return r;
}

VatInsertResult ViewShim::vat_insert(NodeId node, std::uint64_t li, const LineData& data) {
  std::uint64_t ind = ViewAddressTable::indicator(node, li);
  std::uint32_t lookup_probes = 0;
  if (vfs_.at(node).query(li)) {
    VatLookup lk = vat_.lookup(ind);
    lookup_probes = lk.probes;
    if (lk.found) {
      std::memcpy(vat_.table(lk.table).data(lk.slot), data.data(), kLineSize);
      ++stats_.vat_updates;
      stats_.vat_probes.add(lk.probes);
      VatInsertResult r;
      r.table = lk.table;
      r.probes = lk.probes;
      r.updated = true;
      return r;
    }
  }
  VatInsertResult r = vat_.insert_absent(ind, data.data());
  r.probes += lookup_probes;
  stats_.vat_probes.add(r.probes);
  stats_.vat_retries.add(r.retries);
  if (r.status == InsertStatus::ResizeRequired) {
    ++stats_.resize_required;
    return r;
  }
  ++stats_.vms_overflow_count;
  ++live_[node];
  vfs_[node].insert(li);
  ++inserts_since_rebuild_[node];
  maybe_rebuild_vf(node);
  return r;
}

bool ViewShim::vat_invalidate(NodeId node, std::uint64_t li, std::uint32_t* probes) {
  if (probes) *probes = 0;
  if (!vfs_.at(node).query(li)) return false;
  VatLookup lk = vat_.lookup(ViewAddressTable::indicator(node, li));
  if (probes) *probes = lk.probes;
  stats_.vat_probes.add(lk.probes);
  if (!lk.found) return false;
  vat_.table(lk.table).clear(lk.slot);
  --live_[node];
  ++stats_.vat_invalidations;
  return true;
}

void ViewShim::vbf_update(NodeId node, std::uint64_t li, VbfAction action) {
  if (action == VbfAction::InsertOnFill) {
    vbfs_.at(node).insert(li);
    ++stats_.vbf_inserts;
  } else {
    vbfs_.at(node).remove(li);
    ++stats_.vbf_removes;
  }
}

std::optional<LineData> ViewShim::peek_view(NodeId node, std::uint64_t li) const {
  VatLookup lk = vat_.lookup(ViewAddressTable::indicator(node, li));
  if (!lk.found) return std::nullopt;
  LineData d{};
  std::memcpy(d.data(), vat_.table(lk.table).data(lk.slot), kLineSize);
  return d;
}

void ViewShim::maybe_rebuild_vf(NodeId node) {
  if (vfs_[node].estimated_fp() <= 2.0 * cfg_.vf_design_fp) return;
  // A rebuild cannot help until the filter has turned over its live set once.
  if (inserts_since_rebuild_[node] < std::max<std::uint64_t>(live_[node], 1)) return;
  rebuild_vf(node);
}

void ViewShim::rebuild_vf(NodeId node) {
  vfs_.at(node).clear();
  constexpr std::uint64_t mask = (std::uint64_t{1} << 52) - 1;
  vat_.for_each_entry([&](std::uint64_t ind, const std::uint8_t*) {
    if (ViewAddressTable::node_of(ind) == node) vfs_[node].insert(ind & mask);
  });
  inserts_since_rebuild_[node] = 0;
  ++stats_.vf_rebuilds;
}

void ViewShim::rebuild_all_vfs() {
  for (auto& f : vfs_) f.clear();
  constexpr std::uint64_t mask = (std::uint64_t{1} << 52) - 1;
  vat_.for_each_entry([&](std::uint64_t ind, const std::uint8_t*) {
    vfs_.at(ViewAddressTable::node_of(ind)).insert(ind & mask);
  });
  std::fill(inserts_since_rebuild_.begin(), inserts_since_rebuild_.end(), 0);
  stats_.vf_rebuilds += vfs_.size();
}

std::string ViewShim::check_invariants() const {
  std::ostringstream err;
  err << vat_.check_invariants();
  std::vector<std::uint64_t> counts(vfs_.size(), 0);
  constexpr std::uint64_t mask = (std::uint64_t{1} << 52) - 1;
  vat_.for_each_entry([&](std::uint64_t ind, const std::uint8_t*) {
    NodeId n = ViewAddressTable::node_of(ind);
    if (n >= vfs_.size()) {
      err << "indicator " << ind << " names unknown node\n";
      return;
    }
    ++counts[n];
    if (!vfs_[n].query(ind & mask)) err << "vf false negative for indicator " << ind << "\n";
  });
  for (std::size_t n = 0; n < counts.size(); ++n)
    if (counts[n] != live_[n]) err << "node " << n << " live view count drift\n";
  return err.str();
}

}  // namespace gfam
