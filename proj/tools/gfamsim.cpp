// gfamsim: litmus conformance, benchmark runs, VAT sweep and report comparison.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gfam/error.hpp"
#include "gfam/harness.hpp"

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw gfam::ConfigError("cannot write '" + path + "'");
  out << text;
}

gfam::RunConfig make_config(const std::string& path, const std::vector<std::string>& sets) {
  gfam::RunConfig cfg = path.empty() ? gfam::RunConfig{} : gfam::load_config(path);
  for (const std::string& kv : sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw gfam::ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Virtual-time simulator of shared CXL memory with loosely coherent record access"};
  app.require_subcommand(1);

  auto* litmus = app.add_subcommand("litmus", "Exhaustive litmus conformance for L-Ld/L-St, GSync and Wd");
  bool no_evict = false;
  litmus->add_flag("--no-evictions", no_evict, "Skip cache-eviction injection");

  auto* run = app.add_subcommand("run", "Run a transactional workload and emit a JSON report");
  std::string config_path, out_path, csv_path, mode;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  run->add_option("--config", config_path, "key=value config file");
  run->add_option("--mode", mode, "ctxnl or vanilla");
  run->add_option("--seed", seed, "RNG seed");
  run->add_option("--set", sets, "Override a config key (key=value)");
  run->add_option("--out", out_path, "Write the JSON report here instead of stdout");
  run->add_option("--csv", csv_path, "Also write a CSV report");

  auto* sweep = app.add_subcommand("sweep-vat", "Insertion retries versus VAT occupancy");
  gfam::SweepConfig sc;
  std::string sweep_out;
  sweep->add_option("--tables", sc.tables, "VAT tables")->check(CLI::PositiveNumber);
  sweep->add_option("--entries", sc.entries_per_table, "Entries per table");
  sweep->add_option("--max-retries", sc.max_retries, "Cuckoo kick limit");
  sweep->add_option("--seed", sc.seed, "RNG seed");
  sweep->add_option("--out", sweep_out, "Write the CSV table here");

  auto* compare = app.add_subcommand("compare", "Run several configs and print a ratio table");
  std::vector<std::string> configs;
  std::vector<std::string> cmp_sets;
  compare->add_option("--configs", configs, "Comma-separated config files")->delimiter(',')->required();
  compare->add_option("--set", cmp_sets, "Override a key in every config");

  auto* rsweep = app.add_subcommand("sweep-record", "ctxnl/vanilla speedup across record sizes");
  std::string rs_config;
  std::vector<std::string> rs_sets;
  std::vector<std::uint32_t> sizes{100, 256, 512, 1024};
  rsweep->add_option("--config", rs_config, "key=value config file");
  rsweep->add_option("--set", rs_sets, "Override a config key");
  rsweep->add_option("--sizes", sizes, "Record sizes in bytes")->delimiter(',');

  auto* keys = app.add_subcommand("keys", "List config keys with default values");

  CLI11_PARSE(app, argc, argv);

  try {
    if (litmus->parsed()) {
      gfam::LitmusReport r = gfam::run_litmus(!no_evict);
      std::cout << r.to_text();
      std::cout << (r.pass() ? "litmus: conforms\n" : "litmus: MISMATCH\n");
      return r.pass() ? 0 : 1;
    }
    if (run->parsed()) {
      gfam::RunConfig cfg = make_config(config_path, sets);
      if (!mode.empty()) cfg.set("mode", mode);
      if (run->count("--seed")) cfg.seed = seed;
      gfam::RunReport r = gfam::run_bench(cfg);
      std::string json = gfam::to_json(r);
      if (out_path.empty())
        std::cout << json;
      else
        write_file(out_path, json);
      if (!csv_path.empty()) write_file(csv_path, gfam::to_csv(r));
      return 0;
    }
    if (sweep->parsed()) {
      gfam::SweepResult r = gfam::run_vat_sweep(sc);
      std::string csv = r.to_csv();
      if (sweep_out.empty())
        std::cout << csv;
      else
        write_file(sweep_out, csv);
      std::fprintf(stderr,
                   "inserts=%llu capacity_at_first_failure=%.2fMiB occupancy=%.4f p99<=6_capacity=%.2fMiB "
                   "p99_retries(occ<=0.6)=%llu\n",
                   static_cast<unsigned long long>(r.inserts), r.capacity_bytes / 1048576.0,
                   r.occupancy_at_failure, r.p99_capacity_bytes / 1048576.0,
                   static_cast<unsigned long long>(r.retries_below_threshold.percentile(99)));
      return 0;
    }
    if (compare->parsed()) {
      std::vector<std::pair<std::string, gfam::RunReport>> reports;
      for (const std::string& path : configs) reports.emplace_back(path, gfam::run_bench(make_config(path, cmp_sets)));
      std::cout << gfam::compare_reports(reports);
      return 0;
    }
    if (rsweep->parsed()) {
      gfam::RunConfig cfg = make_config(rs_config, rs_sets);
      std::printf("record_size,ctxnl_tps,vanilla_tps,speedup\n");
      for (const auto& p : gfam::record_size_sweep(cfg, sizes))
        std::printf("%u,%.1f,%.1f,%.4f\n", p.record_size, p.ctxnl_tps, p.vanilla_tps, p.speedup);
      return 0;
    }
    if (keys->parsed()) {
      for (const auto& [k, v] : gfam::RunConfig{}.entries()) std::cout << k << " = " << v << "\n";
      return 0;
    }
  } catch (const gfam::Error& e) {
    std::cerr << "gfamsim: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
