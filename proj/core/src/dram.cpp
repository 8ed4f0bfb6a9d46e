#include "gfam/dram.hpp"

#include <algorithm>
#include <cstring>

#include "gfam/error.hpp"

namespace gfam {

void Dram::check(std::uint64_t offset, std::size_t len) const {
  if (offset > capacity_ || len > capacity_ - offset)
    throw OutOfMemoryError("dram access beyond capacity");
}

const Dram::Page* Dram::find(std::uint64_t page) const {
  auto it = pages_.find(page);
  return it == pages_.end() ? nullptr : it->second.get();
}

Dram::Page& Dram::get(std::uint64_t page) {
  auto& slot = pages_[page];
  if (!slot) slot = std::make_unique<Page>(Page{});
  return *slot;
}

void Dram::read(std::uint64_t offset, std::span<std::uint8_t> out) const {
  check(offset, out.size());
  std::size_t done = 0;
  while (done < out.size()) {
    std::uint64_t pos = offset + done;
    std::uint64_t in_page = pos % kPage;
    std::size_t n = std::min<std::size_t>(out.size() - done, kPage - in_page);
    if (const Page* p = find(pos / kPage))
      std::memcpy(out.data() + done, p->data() + in_page, n);
    else
      std::memset(out.data() + done, 0, n);
    done += n;
  }
}

void Dram::write(std::uint64_t offset, std::span<const std::uint8_t> in) {
  check(offset, in.size());
  std::size_t done = 0;
  while (done < in.size()) {
    std::uint64_t pos = offset + done;
    std::uint64_t in_page = pos % kPage;
    std::size_t n = std::min<std::size_t>(in.size() - done, kPage - in_page);
    std::memcpy(get(pos / kPage).data() + in_page, in.data() + done, n);
    done += n;
  }
}

LineData Dram::read_line(std::uint64_t line_offset) const {
  LineData d{};
  read(line_offset, d);
  return d;
}

void Dram::write_line(std::uint64_t line_offset, const LineData& data) { write(line_offset, data); }

std::uint64_t Dram::read_u64(std::uint64_t offset) const {
  std::array<std::uint8_t, 8> b{};
  read(offset, b);
  return load_u64(b.data());
}

void Dram::write_u64(std::uint64_t offset, std::uint64_t v) {
  std::array<std::uint8_t, 8> b{};
  store_u64(b.data(), v);
  write(offset, b);
}

}  // namespace gfam
