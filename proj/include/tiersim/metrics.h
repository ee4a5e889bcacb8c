#ifndef TIERSIM_METRICS_H_
#define TIERSIM_METRICS_H_

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tiersim/container.h"
#include "tiersim/memory_manager.h"

namespace tiersim {

struct ContainerSnapshot {
  std::string name;
  PageCount local_pages = 0;
  PageCount cxl_pages = 0;
  TierCounters counters;
  double promo_multiplier = 1.0;
  bool throttled = false;
  bool steady_state = false;
  std::uint64_t accesses = 0;
  std::uint64_t access_time_ns = 0;
};

struct SystemSnapshot {
  PageCount free_local = 0;
  PageCount free_cxl = 0;
  WatermarkState watermark_state = WatermarkState::kAboveHigh;
  std::uint64_t migrations_this_interval = 0;
  std::uint64_t demoted_total = 0;
  std::uint64_t promoted_total = 0;
  std::uint64_t oom_events = 0;
  std::uint64_t cxl_full_events = 0;
};

struct MetricsSnapshot {
  Tick tick = 0;
  std::vector<ContainerSnapshot> containers;
  SystemSnapshot system;
};

MetricsSnapshot TakeSnapshot(const MemoryManager& memory, Tick tick,
                             std::uint64_t migrations_this_interval);

enum class ExportFormat : std::uint8_t { kCsv, kJsonl };

// Throws std::invalid_argument for anything but "csv" or "jsonl".
ExportFormat ParseExportFormat(std::string_view name);
std::string_view ToString(ExportFormat f);

// CSV column order. Container rows leave system columns empty and vice versa.
const std::vector<std::string>& CsvColumns();

nlohmann::json ToJson(const MetricsSnapshot& s);

// CSV: "# run_header <json>" line, column header, then per snapshot one row
// per container followed by one system row. JSONL: run-header object, then
// one object per snapshot.
void ExportTimeseries(std::span<const MetricsSnapshot> snapshots, const nlohmann::json& run_header,
                      std::ostream& out, ExportFormat format);
// Throws std::runtime_error if the file cannot be written.
void ExportTimeseries(std::span<const MetricsSnapshot> snapshots, const nlohmann::json& run_header,
                      const std::filesystem::path& destination, ExportFormat format);

struct ExportData {
  nlohmann::json run_header;
  std::vector<MetricsSnapshot> snapshots;
};

// Reads a CSV or JSONL export back (format detected from content).
ExportData ReadExport(std::istream& in);
ExportData ReadExport(const std::filesystem::path& path);

}  // namespace tiersim

#endif  // TIERSIM_METRICS_H_
