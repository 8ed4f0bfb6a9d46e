#pragma once

#include <cmath>
#include <cstdint>
#include <map>

namespace gfam {

// Exact histogram over integer samples. Percentiles use the nearest-rank rule.
class Histogram {
 public:
  void add(std::uint64_t value, std::uint64_t count = 1) {
    if (count == 0) return;
    bins_[value] += count;
    total_ += count;
    sum_ += value * count;
  }
  void merge(const Histogram& o) {
    for (const auto& [v, c] : o.bins_) add(v, c);
  }
  void clear() { *this = Histogram{}; }

  std::uint64_t count() const { return total_; }
  std::uint64_t sum() const { return sum_; }
  double mean() const { return total_ ? static_cast<double>(sum_) / static_cast<double>(total_) : 0.0; }
  std::uint64_t max() const { return bins_.empty() ? 0 : bins_.rbegin()->first; }
  std::uint64_t percentile(double p) const;
  const std::map<std::uint64_t, std::uint64_t>& bins() const { return bins_; }

  bool operator==(const Histogram&) const = default;

 private:
  std::map<std::uint64_t, std::uint64_t> bins_;
  std::uint64_t total_ = 0;
  std::uint64_t sum_ = 0;
};

inline std::uint64_t Histogram::percentile(double p) const {
  if (total_ == 0) return 0;
  if (p <= 0) return bins_.begin()->first;
  auto rank = static_cast<std::uint64_t>(std::ceil(p / 100.0 * static_cast<double>(total_) - 1e-9));
  if (rank < 1) rank = 1;
  if (rank > total_) rank = total_;
  std::uint64_t seen = 0;
  for (const auto& [v, c] : bins_) {
    seen += c;
    if (seen >= rank) return v;
  }
  return bins_.rbegin()->first;
}

}  // namespace gfam
