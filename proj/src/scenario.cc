#include "tiersim/scenario.h"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace tiersim {

ScenarioError::ScenarioError(const std::string& source, int line, int column,
                             const std::string& message)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << source;
        if (line > 0) os << ':' << line << ':' << column;
        os << ": " << message;
        return os.str();
      }()),
      line_(line),
      column_(column) {}

namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double ParseDouble(std::string_view s) {
  s = Trim(s);
  // std::from_chars for double is missing from older libstdc++.
  std::string tmp(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tmp, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + tmp + "'");
  }
  if (used != tmp.size()) throw std::invalid_argument("not a number: '" + tmp + "'");
  return v;
}

std::uint64_t ParseUnsigned(std::string_view s) {
  s = Trim(s);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a non-negative integer: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

PageCount ParseSize(std::string_view text, std::uint64_t page_size) {
  std::string_view s = Trim(text);
  struct Suffix {
    std::string_view name;
    std::uint64_t bytes;
  };
  static constexpr Suffix kSuffixes[] = {
      {"GiB", 1ULL << 30}, {"MiB", 1ULL << 20}, {"KiB", 1ULL << 10}, {"B", 1},
  };
  for (const Suffix& suf : kSuffixes) {
    if (s.size() > suf.name.size() && s.substr(s.size() - suf.name.size()) == suf.name) {
      const double qty = ParseDouble(s.substr(0, s.size() - suf.name.size()));
      if (qty < 0) throw std::invalid_argument("negative size '" + std::string(s) + "'");
      const double bytes = qty * static_cast<double>(suf.bytes);
      return static_cast<PageCount>(std::ceil(bytes / static_cast<double>(page_size)));
    }
  }
  return ParseUnsigned(s);
}

double ParseRational(std::string_view text) {
  std::string_view s = Trim(text);
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) return ParseDouble(s);
  const double num = ParseDouble(s.substr(0, slash));
  const double den = ParseDouble(s.substr(slash + 1));
  if (den == 0.0) throw std::invalid_argument("zero denominator in '" + std::string(s) + "'");
  return num / den;
}

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void Fail(const YAML::Node& node, const std::string& message) const {
    const YAML::Mark mark = node.Mark();
    throw ScenarioError(source_, mark.is_null() ? 0 : mark.line + 1,
                        mark.is_null() ? 0 : mark.column + 1, message);
  }

  void CheckKeys(const YAML::Node& map, const std::string& where,
                 std::initializer_list<std::string_view> allowed) const {
    if (!map.IsMap()) Fail(map, where + " must be a mapping");
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        Fail(kv.first, "unknown field '" + key + "' in " + where);
      }
    }
  }

  std::string Scalar(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) Fail(node, "field '" + field + "' must be a scalar");
    return node.Scalar();
  }

  template <typename Fn>
  auto Convert(const YAML::Node& node, const std::string& field, Fn&& fn) const {
    const std::string text = Scalar(node, field);
    try {
      return fn(text);
    } catch (const std::invalid_argument& e) {
      Fail(node, "field '" + field + "': " + e.what());
    } catch (const std::out_of_range&) {
      Fail(node, "field '" + field + "': value out of range");
    }
  }

  PageCount Size(const YAML::Node& node, const std::string& field, std::uint64_t page_size) const {
    return Convert(node, field, [&](const std::string& s) { return ParseSize(s, page_size); });
  }
  double Rational(const YAML::Node& node, const std::string& field) const {
    return Convert(node, field, [](const std::string& s) { return ParseRational(s); });
  }
  std::int64_t Integer(const YAML::Node& node, const std::string& field) const {
    return Convert(node, field, [](const std::string& s) {
      const std::uint64_t v = ParseUnsigned(s);
      if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
        throw std::out_of_range("too large");
      }
      return static_cast<std::int64_t>(v);
    });
  }
  std::uint64_t Unsigned(const YAML::Node& node, const std::string& field) const {
    return Convert(node, field, [](const std::string& s) { return ParseUnsigned(s); });
  }
  bool Bool(const YAML::Node& node, const std::string& field) const {
    const std::string s = Scalar(node, field);
    if (s == "true" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "no" || s == "off") return false;
    Fail(node, "field '" + field + "' must be true or false");
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

int HalvingsFor(double floor_value) {
  if (!(floor_value > 0.0 && floor_value <= 1.0)) return -1;
  int exp = 0;
  const double mant = std::frexp(floor_value, &exp);
  if (mant != 0.5) return -1;
  return 1 - exp;
}

void ParseMachine(const Reader& r, const YAML::Node& node, MachineConfig& m) {
  r.CheckKeys(node, "machine",
              {"local_capacity", "cxl_capacity", "page_size", "low_watermark", "high_watermark",
               "tick_length_ms", "promo_scan_interval", "demote_scan_interval", "detector_period",
               "t_resident_ms", "r_thrashing", "hash_table_slots", "promo_sample_rate",
               "multiplier_floor", "p_base_fraction", "bound_headroom_fraction",
               "sync_batch_fraction", "sync_retries", "migration_cap_per_tick", "hint_window",
               "aging_horizon", "steady_active_delta", "steady_free_rate",
               "steady_grace_periods", "local_latency_ns", "cxl_latency_ns",
               "migration_bandwidth"});
  if (node["page_size"]) m.page_size = r.Unsigned(node["page_size"], "page_size");
  if (m.page_size == 0) r.Fail(node["page_size"], "page_size must be positive");
  const auto ps = m.page_size;
  if (!node["local_capacity"]) r.Fail(node, "machine.local_capacity is required");
  if (!node["cxl_capacity"]) r.Fail(node, "machine.cxl_capacity is required");
  m.local_capacity = r.Size(node["local_capacity"], "local_capacity", ps);
  m.cxl_capacity = r.Size(node["cxl_capacity"], "cxl_capacity", ps);
  if (node["low_watermark"]) m.low_watermark = r.Size(node["low_watermark"], "low_watermark", ps);
  if (node["high_watermark"]) {
    m.high_watermark = r.Size(node["high_watermark"], "high_watermark", ps);
  }
  if (node["tick_length_ms"]) m.tick_length_ms = r.Rational(node["tick_length_ms"], "tick_length_ms");
  if (node["promo_scan_interval"]) {
    m.promo_scan_interval = r.Integer(node["promo_scan_interval"], "promo_scan_interval");
  }
  if (node["demote_scan_interval"]) {
    m.demote_scan_interval = r.Integer(node["demote_scan_interval"], "demote_scan_interval");
  }
  if (node["detector_period"]) m.detector_period = r.Integer(node["detector_period"], "detector_period");
  if (node["t_resident_ms"]) m.t_resident_ms = r.Rational(node["t_resident_ms"], "t_resident_ms");
  if (node["r_thrashing"]) m.r_thrashing = r.Rational(node["r_thrashing"], "r_thrashing");
  if (node["hash_table_slots"]) {
    const auto slots = r.Unsigned(node["hash_table_slots"], "hash_table_slots");
    if (slots > std::numeric_limits<std::uint32_t>::max()) {
      r.Fail(node["hash_table_slots"], "hash_table_slots too large");
    }
    m.hash_table_slots = static_cast<std::uint32_t>(slots);
  }
  if (node["promo_sample_rate"]) {
    m.promo_sample_rate = r.Rational(node["promo_sample_rate"], "promo_sample_rate");
  }
  if (node["multiplier_floor"]) {
    const double f = r.Rational(node["multiplier_floor"], "multiplier_floor");
    const int h = HalvingsFor(f);
    if (h < 0) r.Fail(node["multiplier_floor"], "multiplier_floor must be a power of two in (0, 1]");
    m.multiplier_floor_halvings = h;
  }
  if (node["p_base_fraction"]) m.p_base_fraction = r.Rational(node["p_base_fraction"], "p_base_fraction");
  if (node["bound_headroom_fraction"]) {
    m.bound_headroom_fraction = r.Rational(node["bound_headroom_fraction"], "bound_headroom_fraction");
  }
  if (node["sync_batch_fraction"]) {
    m.sync_batch_fraction = r.Rational(node["sync_batch_fraction"], "sync_batch_fraction");
  }
  if (node["sync_retries"]) m.sync_retries = static_cast<int>(r.Integer(node["sync_retries"], "sync_retries"));
  if (node["migration_cap_per_tick"]) {
    m.migration_cap_per_tick = r.Size(node["migration_cap_per_tick"], "migration_cap_per_tick", ps);
  }
  if (node["hint_window"]) m.hint_window = r.Integer(node["hint_window"], "hint_window");
  if (node["aging_horizon"]) m.aging_horizon = r.Integer(node["aging_horizon"], "aging_horizon");
  if (node["steady_active_delta"]) {
    m.steady_active_delta = r.Rational(node["steady_active_delta"], "steady_active_delta");
  }
  if (node["steady_free_rate"]) {
    m.steady_free_rate = static_cast<double>(r.Size(node["steady_free_rate"], "steady_free_rate", ps));
  }
  if (node["steady_grace_periods"]) {
    m.steady_grace_periods = static_cast<int>(r.Integer(node["steady_grace_periods"], "steady_grace_periods"));
  }
  if (node["local_latency_ns"]) m.local_latency_ns = r.Rational(node["local_latency_ns"], "local_latency_ns");
  if (node["cxl_latency_ns"]) m.cxl_latency_ns = r.Rational(node["cxl_latency_ns"], "cxl_latency_ns");
  if (node["migration_bandwidth"]) {
    m.migration_bandwidth = r.Size(node["migration_bandwidth"], "migration_bandwidth", ps);
  }
}

void ParsePolicy(const Reader& r, const YAML::Node& node, PolicyConfig& p) {
  if (node.IsScalar()) {
    const std::string name = node.Scalar();
    if (name == "fair") {
      p = PolicyConfig::Fair();
    } else if (name == "baseline") {
      p = PolicyConfig::Baseline();
    } else {
      r.Fail(node, "policy must be 'fair' or 'baseline'");
    }
    return;
  }
  r.CheckKeys(node, "policy",
              {"profile", "throttle_promotion", "thrash_mitigation", "promotion_gate",
               "demotion_order"});
  if (node["profile"]) ParsePolicy(r, node["profile"], p);
  if (node["throttle_promotion"]) p.throttle_promotion = r.Bool(node["throttle_promotion"], "throttle_promotion");
  if (node["thrash_mitigation"]) p.thrash_mitigation = r.Bool(node["thrash_mitigation"], "thrash_mitigation");
  if (node["promotion_gate"]) {
    const std::string g = r.Scalar(node["promotion_gate"], "promotion_gate");
    if (g == "free_frame") {
      p.promotion_gate = PromotionGate::kFreeFrame;
    } else if (g == "above_high") {
      p.promotion_gate = PromotionGate::kAboveHigh;
    } else {
      r.Fail(node["promotion_gate"], "promotion_gate must be free_frame or above_high");
    }
  }
  if (node["demotion_order"]) {
    const std::string o = r.Scalar(node["demotion_order"], "demotion_order");
    if (o == "overage_ratio") {
      p.demotion_order = DemotionOrder::kOverageRatio;
    } else if (o == "global_lru") {
      p.demotion_order = DemotionOrder::kGlobalLru;
    } else {
      r.Fail(node["demotion_order"], "demotion_order must be overage_ratio or global_lru");
    }
  }
}

WorkloadKind ParseKind(const Reader& r, const YAML::Node& node) {
  const std::string k = r.Scalar(node, "kind");
  if (k == "streaming") return WorkloadKind::kStreaming;
  if (k == "bursty") return WorkloadKind::kBursty;
  if (k == "thrashing") return WorkloadKind::kThrashing;
  if (k == "idle") return WorkloadKind::kIdle;
  r.Fail(node, "workload kind must be streaming, bursty, thrashing or idle");
}

WorkloadSpec ParseWorkload(const Reader& r, const YAML::Node& node, std::uint64_t ps) {
  r.CheckKeys(node, "workload",
              {"kind", "footprint", "hotness", "hot_fraction", "launch_delay", "burst_profile",
               "block_size", "reaccess_gap"});
  WorkloadSpec w;
  if (!node["kind"]) r.Fail(node, "workload.kind is required");
  w.kind = ParseKind(r, node["kind"]);
  if (node["footprint"]) w.footprint = r.Size(node["footprint"], "footprint", ps);
  if (node["hotness"]) w.hotness = r.Rational(node["hotness"], "hotness");
  if (node["hot_fraction"]) w.hot_fraction = r.Rational(node["hot_fraction"], "hot_fraction");
  if (node["launch_delay"]) w.launch_delay = r.Integer(node["launch_delay"], "launch_delay");
  if (node["block_size"]) w.block_size = r.Size(node["block_size"], "block_size", ps);
  if (node["reaccess_gap"]) w.reaccess_gap = r.Integer(node["reaccess_gap"], "reaccess_gap");
  if (const YAML::Node bp = node["burst_profile"]) {
    if (!bp.IsSequence()) r.Fail(bp, "burst_profile must be a list of [tick, footprint] pairs");
    for (const auto& item : bp) {
      if (!item.IsSequence() || item.size() != 2) {
        r.Fail(item, "burst_profile entries must be [tick, footprint]");
      }
      BurstPoint p;
      p.offset = r.Integer(item[0], "burst_profile.tick");
      p.target = r.Size(item[1], "burst_profile.footprint", ps);
      w.burst_profile.push_back(p);
    }
    if (w.footprint == 0) {
      for (const auto& p : w.burst_profile) w.footprint = std::max(w.footprint, p.target);
    }
  }
  return w;
}

ContainerSpec ParseContainer(const Reader& r, const YAML::Node& node, std::uint64_t ps) {
  r.CheckKeys(node, "container", {"id", "lower_protection", "upper_bound", "workload"});
  ContainerSpec c;
  if (!node["id"]) r.Fail(node, "container.id is required");
  c.name = r.Scalar(node["id"], "id");
  const bool ok_name = !c.name.empty() && std::all_of(c.name.begin(), c.name.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.';
  });
  if (!ok_name) r.Fail(node["id"], "container id may only use letters, digits, '_', '-' and '.'");
  if (node["lower_protection"]) {
    c.lower_protection = r.Size(node["lower_protection"], "lower_protection", ps);
  }
  if (node["upper_bound"] && !node["upper_bound"].IsNull()) {
    c.upper_bound = r.Size(node["upper_bound"], "upper_bound", ps);
  }
  if (!node["workload"]) r.Fail(node, "container.workload is required");
  c.workload = ParseWorkload(r, node["workload"], ps);
  return c;
}

}  // namespace

Scenario ParseScenarioText(std::string_view text, const std::string& source) {
  Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ScenarioError(source, e.mark.line + 1, e.mark.column + 1, e.msg);
  }
  if (!root || !root.IsMap()) throw ScenarioError(source, 0, 0, "scenario must be a mapping");
  r.CheckKeys(root, "scenario",
              {"name", "rng_seed", "duration", "snapshot_interval", "policy", "machine",
               "containers", "output"});

  Scenario s;
  if (root["name"]) s.name = r.Scalar(root["name"], "name");
  if (!root["rng_seed"]) r.Fail(root, "rng_seed is required");
  if (!root["machine"]) r.Fail(root, "machine section is required");
  if (!root["duration"]) r.Fail(root, "duration is required");
  if (!root["containers"] || !root["containers"].IsSequence()) {
    r.Fail(root, "containers must be a non-empty list");
  }

  ParseMachine(r, root["machine"], s.machine);
  s.machine.rng_seed = r.Unsigned(root["rng_seed"], "rng_seed");
  ApplyCapacityDefaults(s.machine);
  s.duration = r.Integer(root["duration"], "duration");
  if (root["snapshot_interval"]) s.snapshot_interval = r.Integer(root["snapshot_interval"], "snapshot_interval");
  if (root["policy"]) ParsePolicy(r, root["policy"], s.policy);
  for (const auto& c : root["containers"]) {
    s.containers.push_back(ParseContainer(r, c, s.machine.page_size));
  }
  if (const YAML::Node out = root["output"]) {
    r.CheckKeys(out, "output", {"path", "format"});
    if (out["path"]) s.output.path = r.Scalar(out["path"], "path");
    if (out["format"]) {
      try {
        s.output.format = ParseExportFormat(r.Scalar(out["format"], "format"));
      } catch (const std::invalid_argument& e) {
        r.Fail(out["format"], e.what());
      }
    }
  }

  auto violations = FindScenarioViolations(s);
  if (!violations.empty()) throw InvalidConfig(std::move(violations));
  return s;
}

Scenario ParseScenarioFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path.string(), 0, 0, "cannot open scenario file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseScenarioText(ss.str(), path.string());
}

std::vector<std::string> FindScenarioViolations(const Scenario& s) {
  auto v = FindConfigViolations(s.machine, s.containers);
  if (s.containers.empty()) v.emplace_back("scenario needs at least one container");
  if (s.duration <= 0) v.emplace_back("duration must be positive");
  if (s.snapshot_interval <= 0) v.emplace_back("snapshot_interval must be positive");
  return v;
}

namespace {

std::string ToString(PromotionGate g) {
  return g == PromotionGate::kFreeFrame ? "free_frame" : "above_high";
}
std::string ToString(DemotionOrder o) {
  return o == DemotionOrder::kOverageRatio ? "overage_ratio" : "global_lru";
}

}  // namespace

nlohmann::json ScenarioToJson(const Scenario& s) {
  const MachineConfig& m = s.machine;
  nlohmann::json machine = {
      {"local_capacity", m.local_capacity},
      {"cxl_capacity", m.cxl_capacity},
      {"page_size", m.page_size},
      {"low_watermark", m.low_watermark},
      {"high_watermark", m.high_watermark},
      {"tick_length_ms", m.tick_length_ms},
      {"promo_scan_interval", m.promo_scan_interval},
      {"demote_scan_interval", m.demote_scan_interval},
      {"detector_period", m.detector_period},
      {"t_resident_ms", m.t_resident_ms},
      {"r_thrashing", m.r_thrashing},
      {"hash_table_slots", m.hash_table_slots},
      {"promo_sample_rate", m.promo_sample_rate},
      {"multiplier_floor", m.multiplier_floor()},
      {"p_base_fraction", m.p_base_fraction},
      {"bound_headroom_fraction", m.bound_headroom_fraction},
      {"sync_batch_fraction", m.sync_batch_fraction},
      {"sync_retries", m.sync_retries},
      {"migration_cap_per_tick", m.migration_cap_per_tick},
      {"hint_window", m.hint_window},
      {"aging_horizon", m.aging_horizon},
      {"steady_active_delta", m.steady_active_delta},
      {"steady_free_rate", m.steady_free_rate},
      {"steady_grace_periods", m.steady_grace_periods},
      {"local_latency_ns", m.local_latency_ns},
      {"cxl_latency_ns", m.cxl_latency_ns},
      {"migration_bandwidth", m.migration_bandwidth},
      {"rng_seed", m.rng_seed},
  };
  nlohmann::json policy = {
      {"profile", s.policy.profile},
      {"throttle_promotion", s.policy.throttle_promotion},
      {"thrash_mitigation", s.policy.thrash_mitigation},
      {"promotion_gate", ToString(s.policy.promotion_gate)},
      {"demotion_order", ToString(s.policy.demotion_order)},
  };
  nlohmann::json containers = nlohmann::json::array();
  for (const ContainerSpec& c : s.containers) {
    const WorkloadSpec& w = c.workload;
    nlohmann::json burst = nlohmann::json::array();
    for (const auto& b : w.burst_profile) burst.push_back({b.offset, b.target});
    containers.push_back({
        {"id", c.name},
        {"lower_protection", c.lower_protection},
        {"upper_bound", c.upper_bound ? nlohmann::json(*c.upper_bound) : nlohmann::json(nullptr)},
        {"workload",
         {
             {"kind", ToString(w.kind)},
             {"footprint", w.footprint},
             {"hotness", w.hotness},
             {"hot_fraction", w.hot_fraction},
             {"launch_delay", w.launch_delay},
             {"burst_profile", std::move(burst)},
             {"block_size", w.block_size},
             {"reaccess_gap", w.reaccess_gap},
         }},
    });
  }
  return {
      {"name", s.name},
      {"rng_seed", m.rng_seed},
      {"duration", s.duration},
      {"snapshot_interval", s.snapshot_interval},
      {"machine", std::move(machine)},
      {"policy", std::move(policy)},
      {"containers", std::move(containers)},
  };
}

}  // namespace tiersim
