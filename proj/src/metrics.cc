#include "tiersim/metrics.h"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tiersim {

MetricsSnapshot TakeSnapshot(const MemoryManager& memory, Tick tick,
                             std::uint64_t migrations_this_interval) {
  MetricsSnapshot s;
  s.tick = tick;
  for (const Container& c : memory.containers()) {
    ContainerSnapshot cs;
    cs.name = c.name;
    cs.local_pages = c.local_usage;
    cs.cxl_pages = c.cxl_usage;
    cs.counters = c.counters;
    cs.promo_multiplier = c.promo_multiplier.value();
    cs.throttled = c.throttled;
    cs.steady_state = c.steady_state;
    cs.accesses = c.access.accesses;
    cs.access_time_ns = c.access.access_time_ns;
    s.containers.push_back(std::move(cs));
  }
  const SystemStats& st = memory.stats();
  s.system.free_local = memory.free_pages(Tier::kLocal);
  s.system.free_cxl = memory.free_pages(Tier::kCxl);
  s.system.watermark_state = memory.watermark_state();
  s.system.migrations_this_interval = migrations_this_interval;
  s.system.demoted_total = st.demoted;
  s.system.promoted_total = st.promoted;
  s.system.oom_events = st.oom_events;
  s.system.cxl_full_events = st.cxl_full_events;
  return s;
}

ExportFormat ParseExportFormat(std::string_view name) {
  if (name == "csv") return ExportFormat::kCsv;
  if (name == "jsonl") return ExportFormat::kJsonl;
  throw std::invalid_argument("unknown export format '" + std::string(name) +
                              "' (expected csv or jsonl)");
}

std::string_view ToString(ExportFormat f) { return f == ExportFormat::kCsv ? "csv" : "jsonl"; }

const std::vector<std::string>& CsvColumns() {
  static const std::vector<std::string> kColumns = {
      "tick",           "row_type",        "container",
      "local_pages",    "cxl_pages",       "demoted",
      "promoted",       "promotion_attempts", "hint_faults",
      "thrash_events",  "sync_demotions",  "cxl_fallback_allocs",
      "freed",          "promo_multiplier", "throttled",
      "steady_state",   "accesses",        "access_time_ns",
      "free_local",     "free_cxl",        "watermark_state",
      "migrations_this_interval", "demoted_total", "promoted_total",
      "oom_events",     "cxl_full_events",
  };
  return kColumns;
}

namespace {

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

WatermarkState ParseWatermark(std::string_view s) {
  if (s == "above_high") return WatermarkState::kAboveHigh;
  if (s == "below_high") return WatermarkState::kBelowHigh;
  if (s == "below_low") return WatermarkState::kBelowLow;
  throw std::runtime_error("bad watermark_state '" + std::string(s) + "'");
}

nlohmann::json ToJson(const ContainerSnapshot& c) {
  const TierCounters& k = c.counters;
  return {
      {"container", c.name},
      {"local_pages", c.local_pages},
      {"cxl_pages", c.cxl_pages},
      {"demoted", k.demoted},
      {"promoted", k.promoted},
      {"promotion_attempts", k.promotion_attempts},
      {"hint_faults", k.hint_faults},
      {"thrash_events", k.thrash_events},
      {"sync_demotions", k.sync_demotions},
      {"cxl_fallback_allocs", k.cxl_fallback_allocs},
      {"freed", k.freed},
      {"promo_multiplier", c.promo_multiplier},
      {"throttled", c.throttled},
      {"steady_state", c.steady_state},
      {"accesses", c.accesses},
      {"access_time_ns", c.access_time_ns},
  };
}

ContainerSnapshot ContainerFromJson(const nlohmann::json& j) {
  ContainerSnapshot c;
  c.name = j.at("container").get<std::string>();
  c.local_pages = j.at("local_pages").get<PageCount>();
  c.cxl_pages = j.at("cxl_pages").get<PageCount>();
  c.counters.demoted = j.at("demoted").get<std::uint64_t>();
  c.counters.promoted = j.at("promoted").get<std::uint64_t>();
  c.counters.promotion_attempts = j.at("promotion_attempts").get<std::uint64_t>();
  c.counters.hint_faults = j.at("hint_faults").get<std::uint64_t>();
  c.counters.thrash_events = j.at("thrash_events").get<std::uint64_t>();
  c.counters.sync_demotions = j.at("sync_demotions").get<std::uint64_t>();
  c.counters.cxl_fallback_allocs = j.at("cxl_fallback_allocs").get<std::uint64_t>();
  c.counters.freed = j.at("freed").get<std::uint64_t>();
  c.promo_multiplier = j.at("promo_multiplier").get<double>();
  c.throttled = j.at("throttled").get<bool>();
  c.steady_state = j.at("steady_state").get<bool>();
  c.accesses = j.at("accesses").get<std::uint64_t>();
  c.access_time_ns = j.at("access_time_ns").get<std::uint64_t>();
  return c;
}

SystemSnapshot SystemFromJson(const nlohmann::json& j) {
  SystemSnapshot s;
  s.free_local = j.at("free_local").get<PageCount>();
  s.free_cxl = j.at("free_cxl").get<PageCount>();
  s.watermark_state = ParseWatermark(j.at("watermark_state").get<std::string>());
  s.migrations_this_interval = j.at("migrations_this_interval").get<std::uint64_t>();
  s.demoted_total = j.at("demoted_total").get<std::uint64_t>();
  s.promoted_total = j.at("promoted_total").get<std::uint64_t>();
  s.oom_events = j.at("oom_events").get<std::uint64_t>();
  s.cxl_full_events = j.at("cxl_full_events").get<std::uint64_t>();
  return s;
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

void WriteCsv(std::span<const MetricsSnapshot> snapshots, const nlohmann::json& header,
              std::ostream& out) {
  out << "# run_header " << header.dump() << '\n';
  const auto& cols = CsvColumns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  constexpr int kSystemColumns = 8;
  for (const MetricsSnapshot& s : snapshots) {
    for (const ContainerSnapshot& c : s.containers) {
      const TierCounters& k = c.counters;
      out << s.tick << ",container," << c.name << ',' << c.local_pages << ',' << c.cxl_pages
          << ',' << k.demoted << ',' << k.promoted << ',' << k.promotion_attempts << ','
          << k.hint_faults << ',' << k.thrash_events << ',' << k.sync_demotions << ','
          << k.cxl_fallback_allocs << ',' << k.freed << ',' << FormatDouble(c.promo_multiplier)
          << ',' << (c.throttled ? 1 : 0) << ',' << (c.steady_state ? 1 : 0) << ','
          << c.accesses << ',' << c.access_time_ns;
      for (int i = 0; i < kSystemColumns; ++i) out << ',';
      out << '\n';
    }
    const SystemSnapshot& y = s.system;
    out << s.tick << ",system,";
    for (int i = 0; i < 16; ++i) out << ',';
    out << y.free_local << ',' << y.free_cxl << ',' << ToString(y.watermark_state) << ','
        << y.migrations_this_interval << ',' << y.demoted_total << ',' << y.promoted_total << ','
        << y.oom_events << ',' << y.cxl_full_events << '\n';
  }
}

ExportData ReadCsv(std::istream& in, std::string first_line) {
  ExportData data;
  const std::string prefix = "# run_header ";
  if (first_line.rfind(prefix, 0) == 0) {
    data.run_header = nlohmann::json::parse(first_line.substr(prefix.size()));
    if (!std::getline(in, first_line)) return data;
  }
  const auto header = SplitCsv(first_line);
  if (header != CsvColumns()) throw std::runtime_error("unexpected CSV column header");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto f = SplitCsv(line);
    if (f.size() != header.size()) throw std::runtime_error("malformed CSV row: " + line);
    const Tick tick = std::stoll(f[0]);
    if (data.snapshots.empty() || data.snapshots.back().tick != tick) {
      data.snapshots.emplace_back();
      data.snapshots.back().tick = tick;
    }
    MetricsSnapshot& s = data.snapshots.back();
    auto u = [&f](std::size_t i) { return static_cast<std::uint64_t>(std::stoull(f[i])); };
    if (f[1] == "container") {
      ContainerSnapshot c;
      c.name = f[2];
      c.local_pages = u(3);
      c.cxl_pages = u(4);
      c.counters.demoted = u(5);
      c.counters.promoted = u(6);
      c.counters.promotion_attempts = u(7);
      c.counters.hint_faults = u(8);
      c.counters.thrash_events = u(9);
      c.counters.sync_demotions = u(10);
      c.counters.cxl_fallback_allocs = u(11);
      c.counters.freed = u(12);
      c.promo_multiplier = std::stod(f[13]);
      c.throttled = f[14] == "1";
      c.steady_state = f[15] == "1";
      c.accesses = u(16);
      c.access_time_ns = u(17);
      s.containers.push_back(std::move(c));
    } else if (f[1] == "system") {
      s.system.free_local = u(18);
      s.system.free_cxl = u(19);
      s.system.watermark_state = ParseWatermark(f[20]);
      s.system.migrations_this_interval = u(21);
      s.system.demoted_total = u(22);
      s.system.promoted_total = u(23);
      s.system.oom_events = u(24);
      s.system.cxl_full_events = u(25);
    } else {
      throw std::runtime_error("unknown row_type '" + f[1] + "'");
    }
  }
  return data;
}

ExportData ReadJsonl(std::istream& in, const std::string& first_line) {
  ExportData data;
  auto handle = [&data](const std::string& line) {
    if (line.empty()) return;
    const auto j = nlohmann::json::parse(line);
    const std::string type = j.value("type", "");
    if (type == "run_header") {
      data.run_header = j;
      data.run_header.erase("type");
      return;
    }
    MetricsSnapshot s;
    s.tick = j.at("tick").get<Tick>();
    for (const auto& c : j.at("containers")) s.containers.push_back(ContainerFromJson(c));
    s.system = SystemFromJson(j.at("system"));
    data.snapshots.push_back(std::move(s));
  };
  handle(first_line);
  std::string line;
  while (std::getline(in, line)) handle(line);
  return data;
}

}  // namespace

nlohmann::json ToJson(const MetricsSnapshot& s) {
  nlohmann::json containers = nlohmann::json::array();
  for (const auto& c : s.containers) containers.push_back(ToJson(c));
  const SystemSnapshot& y = s.system;
  return {
      {"type", "snapshot"},
      {"tick", s.tick},
      {"containers", std::move(containers)},
      {"system",
       {
           {"free_local", y.free_local},
           {"free_cxl", y.free_cxl},
           {"watermark_state", ToString(y.watermark_state)},
           {"migrations_this_interval", y.migrations_this_interval},
           {"demoted_total", y.demoted_total},
           {"promoted_total", y.promoted_total},
           {"oom_events", y.oom_events},
           {"cxl_full_events", y.cxl_full_events},
       }},
  };
}

void ExportTimeseries(std::span<const MetricsSnapshot> snapshots, const nlohmann::json& run_header,
                      std::ostream& out, ExportFormat format) {
  if (format == ExportFormat::kCsv) {
    WriteCsv(snapshots, run_header, out);
  } else {
    nlohmann::json header = run_header;
    header["type"] = "run_header";
    out << header.dump() << '\n';
    for (const MetricsSnapshot& s : snapshots) out << ToJson(s).dump() << '\n';
  }
}

void ExportTimeseries(std::span<const MetricsSnapshot> snapshots, const nlohmann::json& run_header,
                      const std::filesystem::path& destination, ExportFormat format) {
  std::ofstream out(destination, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + destination.string() + "' for writing");
  ExportTimeseries(snapshots, run_header, out, format);
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + destination.string() + "'");
}

ExportData ReadExport(std::istream& in) {
  std::string first;
  if (!std::getline(in, first)) throw std::runtime_error("empty export");
  if (!first.empty() && first[0] == '{') return ReadJsonl(in, first);
  return ReadCsv(in, first);
}

ExportData ReadExport(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return ReadExport(in);
}

}  // namespace tiersim
