#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>

#include "gfam/simcore.hpp"

namespace gfam {

using LineData = std::array<std::uint8_t, kLineSize>;

// Sparse byte store for the fabric-attached DRAM. Untouched bytes read as zero.
class Dram {
 public:
  explicit Dram(std::uint64_t capacity_bytes) : capacity_(capacity_bytes) {}

  std::uint64_t capacity() const { return capacity_; }

  void read(std::uint64_t offset, std::span<std::uint8_t> out) const;
  void write(std::uint64_t offset, std::span<const std::uint8_t> in);
  LineData read_line(std::uint64_t line_offset) const;
  void write_line(std::uint64_t line_offset, const LineData& data);

  std::uint64_t read_u64(std::uint64_t offset) const;
  void write_u64(std::uint64_t offset, std::uint64_t v);

  std::size_t touched_pages() const { return pages_.size(); }

 private:
  static constexpr std::uint64_t kPage = 4096;
  using Page = std::array<std::uint8_t, kPage>;

  const Page* find(std::uint64_t page) const;
  Page& get(std::uint64_t page);
  void check(std::uint64_t offset, std::size_t len) const;

  std::uint64_t capacity_;
  std::unordered_map<std::uint64_t, std::unique_ptr<Page>> pages_;
};

inline std::uint64_t load_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

inline void store_u64(std::uint8_t* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

}  // namespace gfam
