#include <array>
#include <sstream>

#include "gfam/harness.hpp"

namespace gfam {

namespace {

enum class LKind { St, Ld, GSync, Wd };

// Address is `base` line plus (register value - 1) lines when `reg` >= 0.
struct LOp {
  LKind kind;
  int base;  // line number inside the litmus region
  int reg = -1;
  int dst = -1;
};

struct Program {
  std::string name;
  std::array<std::vector<LOp>, 2> procs;
  LitmusOutcome watched;
  bool watch_pair;     // only (r3, r4) matter
  bool ctxnl_reachable;
  bool vanilla_check;  // whether the vanilla run is asserted
  bool vanilla_reachable;
};

constexpr int kAlpha = 2;
constexpr int kBeta = 4;

std::vector<Program> programs() {
  std::vector<Program> p;
  p.push_back({"local-stores",
               {{{{LKind::St, kAlpha}, {LKind::Ld, kAlpha, -1, 0}, {LKind::Ld, kBeta, 0, 1}},
                 {{LKind::St, kBeta}, {LKind::Ld, kBeta, -1, 2}, {LKind::Ld, kAlpha, 2, 3}}}},
               {1, 0, 1, 0},
               false,
               true,
               true,
               false});
  p.push_back({"gsync-publish",
               {{{{LKind::St, kAlpha}, {LKind::Ld, kAlpha, -1, 0}, {LKind::GSync, kAlpha}, {LKind::Ld, kBeta, 0, 1}},
                 {{LKind::St, kBeta}, {LKind::Ld, kBeta, -1, 2}, {LKind::GSync, kBeta}, {LKind::Ld, kAlpha, 2, 3}}}},
               {1, 0, 1, 0},
               false,
               false,
               true,
               false});
  p.push_back({"wd-withdraw",
               {{{{LKind::St, kAlpha}, {LKind::Ld, kAlpha, -1, 0}, {LKind::Wd, kAlpha}, {LKind::Ld, kBeta, 0, 1}},
                 {{LKind::St, kBeta}, {LKind::Ld, kBeta, -1, 2}, {LKind::GSync, kBeta}, {LKind::Ld, kAlpha, 2, 3}}}},
               {0, 0, 1, 1},
               true,
               false,
               false,
               false});
  return p;
}

FabricConfig litmus_fabric() {
  FabricConfig f;
  f.nodes = 2;
  f.cache.capacity_bytes = 64 * 64;
  f.cache.associativity = 4;
  f.sf.entries = 256;
  f.sf.ways = 16;
  f.shim.vat.entries_per_table = 1024;
  f.shim.vat.lut_bits = 4;
  f.shim.vf = {64, 2};
  f.shim.vbf = {64, 2};
  f.queue_depth = 16;
  f.capacity = 1 << 20;
  return f;
}

std::string describe(const Program& p, const std::vector<int>& order, unsigned mask,
                     const std::vector<std::size_t>& evict_points) {
  static const char* names[] = {"St", "Ld", "GSync", "Wd"};
  std::ostringstream s;
  std::array<std::size_t, 2> pc{0, 0};
  std::size_t step = 0;
  for (int who : order) {
    const LOp& op = p.procs[who][pc[who]++];
    s << (step ? " ; " : "") << "P" << (who + 1) << ":" << names[static_cast<int>(op.kind)]
      << (op.base == kAlpha ? " a" : " b");
    for (std::size_t e = 0; e < evict_points.size(); ++e)
      if (evict_points[e] == step && (mask >> e & 1)) s << " +evict";
    ++step;
  }
  return s.str();
}

}  // namespace

LitmusReport run_litmus(bool evictions) {
  LitmusReport report;
  const FabricConfig fcfg = litmus_fabric();
  for (const Program& prog : programs()) {
    const std::size_t n0 = prog.procs[0].size(), n1 = prog.procs[1].size(), total = n0 + n1;
    // All schedules: bitmasks over `total` steps with n1 bits naming P2.
    std::vector<std::vector<int>> orders;
    for (unsigned bits = 0; bits < (1u << total); ++bits) {
      if (static_cast<std::size_t>(__builtin_popcount(bits)) != n1) continue;
      std::vector<int> o(total);
      for (std::size_t i = 0; i < total; ++i) o[i] = (bits >> i) & 1;
      orders.push_back(std::move(o));
    }
    for (Mode mode : {Mode::Ctxnl, Mode::Vanilla}) {
      LitmusCase c;
      c.program = prog.name;
      c.mode = mode;
      c.interleavings = orders.size();
      std::string first_hit;
      for (const auto& order : orders) {
        // Eviction points: after every store and sync op, in schedule order.
        std::vector<std::size_t> points;
        {
          std::array<std::size_t, 2> pc{0, 0};
          for (std::size_t step = 0; step < total; ++step) {
            const LOp& op = prog.procs[order[step]][pc[order[step]]++];
            if (op.kind != LKind::Ld && evictions) points.push_back(step);
          }
        }
        for (unsigned mask = 0; mask < (1u << points.size()); ++mask) {
          Fabric fab(fcfg);
          Primitive prim = mode == Mode::Ctxnl ? Primitive::Ctxnl : Primitive::Vanilla;
          Addr region = fab.cxl_alloc(0, 8 * kLineSize, prim, TrafficClass::Record);
          std::array<std::uint64_t, 4> regs{};
          std::array<std::size_t, 2> pc{0, 0};
          std::size_t next_point = 0;
          SimTime now = 0;
          for (std::size_t step = 0; step < total; ++step) {
            NodeId who = static_cast<NodeId>(order[step]);
            const LOp& op = prog.procs[who][pc[who]++];
            std::int64_t line = op.base;
            if (op.reg >= 0) line += static_cast<std::int64_t>(regs[op.reg]) - 1;
            Addr a = region + static_cast<Addr>(line) * kLineSize;
            std::array<std::uint8_t, 8> buf{};
            Breakdown cost;
            switch (op.kind) {
              case LKind::St:
                store_u64(buf.data(), 1);
                cost = mode == Mode::Ctxnl ? fab.l_store(who, a, buf, now) : fab.store(who, a, buf, now);
                break;
              case LKind::Ld:
                cost = mode == Mode::Ctxnl ? fab.l_load(who, a, buf, now) : fab.load(who, a, buf, now);
                regs[op.dst] = load_u64(buf.data());
                break;
              case LKind::GSync:
                if (mode == Mode::Ctxnl) cost = fab.gsync(who, std::span<const Addr>(&a, 1), now);
                break;
              case LKind::Wd:
                if (mode == Mode::Ctxnl) cost = fab.wd(who, std::span<const Addr>(&a, 1), now);
                break;
            }
            now += cost.total() + 1;
            if (next_point < points.size() && points[next_point] == step) {
              if (mask >> next_point & 1) fab.evict_all(who, now);
              ++next_point;
            }
          }
          ++c.runs;
          LitmusOutcome out{regs[0], regs[1], regs[2], regs[3]};
          c.reachable.insert(out);
          bool hit = prog.watch_pair ? (out[2] == prog.watched[2] && out[3] == prog.watched[3]) : out == prog.watched;
          if (hit && first_hit.empty()) first_hit = describe(prog, order, mask, points);
        }
      }
      std::ostringstream want;
      bool reachable = !first_hit.empty();
      if (prog.watch_pair)
        want << "(r3,r4)=(" << prog.watched[2] << "," << prog.watched[3] << ")";
      else
        want << "(" << prog.watched[0] << "," << prog.watched[1] << "," << prog.watched[2] << "," << prog.watched[3]
             << ")";
      bool expected;
      if (mode == Mode::Ctxnl) {
        expected = prog.ctxnl_reachable;
        c.pass = reachable == expected;
      } else {
        expected = prog.vanilla_reachable;
        c.pass = !prog.vanilla_check || reachable == expected;
      }
      bool asserted = mode == Mode::Ctxnl || prog.vanilla_check;
      c.expectation = want.str() + (asserted ? (expected ? " reachable" : " unreachable") : " (not asserted)");
      if (!c.pass) c.witness = reachable ? first_hit : "no schedule produced the outcome";
      report.cases.push_back(std::move(c));
    }
  }
  return report;
}

bool LitmusReport::pass() const {
  for (const auto& c : cases)
    if (!c.pass) return false;
  return true;
}

std::string LitmusReport::to_text() const {
  std::ostringstream s;
  for (const auto& c : cases) {
    s << (c.pass ? "ok   " : "FAIL ") << c.program << " [" << to_string(c.mode) << "] " << c.interleavings
      << " interleavings, " << c.runs << " runs; expect " << c.expectation << "; outcomes:";
    for (const auto& o : c.reachable) s << " (" << o[0] << "," << o[1] << "," << o[2] << "," << o[3] << ")";
    s << "\n";
    if (!c.pass) s << "     witness: " << c.witness << "\n";
  }
  return s.str();
}

}  // namespace gfam
