// tiersim: run, validate and summarize tiered-memory scenarios.

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "tiersim/scenario.h"
#include "tiersim/simulator.h"

namespace {

using tiersim::ExportFormat;

struct RunOptions {
  std::vector<std::string> files;
  std::string out;
  std::string format;
  std::optional<std::uint64_t> seed;
  std::optional<tiersim::Tick> duration;
  unsigned jobs = 1;
};

void PrintViolations(std::ostream& err, const std::string& file,
                     const std::vector<std::string>& violations) {
  err << file << ": invalid configuration\n";
  for (const auto& v : violations) err << "  - " << v << '\n';
}

// Runs one scenario; returns the process exit code and fills `report`.
int RunOne(const RunOptions& opt, const std::string& file, std::string& report,
           std::string& errors) {
  std::ostringstream out;
  std::ostringstream err;
  try {
    tiersim::Scenario s = tiersim::ParseScenarioFile(file);
    if (opt.seed) s.machine.rng_seed = *opt.seed;
    if (opt.duration) s.duration = *opt.duration;
    if (!opt.out.empty()) s.output.path = opt.out;
    if (!opt.format.empty()) s.output.format = tiersim::ParseExportFormat(opt.format);

    tiersim::Simulator sim(s);
    const tiersim::RunSummary summary = sim.Run();
    if (!s.output.path.empty()) sim.Export(s.output.path, s.output.format);

    nlohmann::json j = tiersim::ToJson(summary);
    j["scenario"] = file;
    if (!s.output.path.empty()) j["export"] = s.output.path;
    out << j.dump() << '\n';
    report = out.str();
    return 0;
  } catch (const tiersim::InvalidConfig& e) {
    PrintViolations(err, file, e.violations());
  } catch (const std::exception& e) {
    err << file << ": " << e.what() << '\n';
  }
  errors = err.str();
  return 1;
}

int RunCommand(const RunOptions& opt) {
  if (opt.files.size() > 1 && !opt.out.empty()) {
    std::cerr << "--out applies to a single scenario; set output.path per file instead\n";
    return 2;
  }
  std::vector<std::string> reports(opt.files.size());
  std::vector<std::string> errors(opt.files.size());
  std::vector<int> codes(opt.files.size(), 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < opt.files.size(); i = next++) {
      codes[i] = RunOne(opt, opt.files[i], reports[i], errors[i]);
    }
  };
  const unsigned n = std::max(1U, std::min<unsigned>(opt.jobs, opt.files.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int rc = 0;
  for (std::size_t i = 0; i < opt.files.size(); ++i) {
    std::cout << reports[i];
    std::cerr << errors[i];
    rc = std::max(rc, codes[i]);
  }
  return rc;
}

int ValidateCommand(const std::string& file) {
  try {
    const tiersim::Scenario s = tiersim::ParseScenarioFile(file);
    std::cout << file << ": ok (" << s.containers.size() << " containers, " << s.duration
              << " ticks)\n";
    return 0;
  } catch (const tiersim::InvalidConfig& e) {
    PrintViolations(std::cerr, file, e.violations());
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
  }
  return 1;
}

int SummaryCommand(const std::string& file) {
  try {
    const tiersim::ExportData data = tiersim::ReadExport(file);
    if (data.snapshots.empty()) {
      std::cerr << file << ": no snapshots\n";
      return 1;
    }
    const tiersim::MetricsSnapshot& last = data.snapshots.back();
    std::printf("final tick %lld, %zu snapshots\n", static_cast<long long>(last.tick),
                data.snapshots.size());
    std::printf("%-16s %10s %10s %10s %10s %10s %10s %8s\n", "container", "local", "cxl",
                "demoted", "promoted", "thrash", "sync_dem", "mult");
    for (const auto& c : last.containers) {
      std::printf("%-16s %10llu %10llu %10llu %10llu %10llu %10llu %8.4g\n", c.name.c_str(),
                  static_cast<unsigned long long>(c.local_pages),
                  static_cast<unsigned long long>(c.cxl_pages),
                  static_cast<unsigned long long>(c.counters.demoted),
                  static_cast<unsigned long long>(c.counters.promoted),
                  static_cast<unsigned long long>(c.counters.thrash_events),
                  static_cast<unsigned long long>(c.counters.sync_demotions), c.promo_multiplier);
    }
    const auto& sys = last.system;
    std::printf("free local %llu, free cxl %llu, watermark %s, oom %llu, cxl full %llu\n",
                static_cast<unsigned long long>(sys.free_local),
                static_cast<unsigned long long>(sys.free_cxl),
                std::string(tiersim::ToString(sys.watermark_state)).c_str(),
                static_cast<unsigned long long>(sys.oom_events),
                static_cast<unsigned long long>(sys.cxl_full_events));
    return 0;
  } catch (const std::exception& e) {
    std::cerr << file << ": " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tiered-memory placement simulator"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "Run one or more scenario files");
  run->add_option("scenario", run_opt.files, "Scenario files")->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_opt.out, "Export path (single scenario only)");
  run->add_option("--format", run_opt.format, "Export format")->check(CLI::IsMember({"csv", "jsonl"}));
  run->add_option("--seed", run_opt.seed, "Override rng_seed");
  run->add_option("--duration", run_opt.duration, "Override duration in ticks")
      ->check(CLI::PositiveNumber);
  run->add_option("--jobs,-j", run_opt.jobs, "Scenarios to run concurrently")
      ->check(CLI::Range(1U, 256U));

  std::string validate_file;
  CLI::App* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("scenario", validate_file, "Scenario file")->required();

  std::string summary_file;
  CLI::App* summary = app.add_subcommand("summary", "Summarize an export file");
  summary->add_option("export", summary_file, "CSV or JSONL export")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return RunCommand(run_opt);
  if (validate->parsed()) return ValidateCommand(validate_file);
  if (summary->parsed()) return SummaryCommand(summary_file);
  return 2;
}
