#ifndef TIERSIM_SCENARIO_H_
#define TIERSIM_SCENARIO_H_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tiersim/config.h"
#include "tiersim/metrics.h"

namespace tiersim {

struct OutputSpec {
  std::string path;  // empty: no export unless overridden on the command line
  ExportFormat format = ExportFormat::kCsv;
};

struct Scenario {
  std::string name;
  MachineConfig machine;
  PolicyConfig policy;
  std::vector<ContainerSpec> containers;
  Tick duration = 0;
  Tick snapshot_interval = 10;
  OutputSpec output;
};

// Malformed scenario text. The message carries the source name and, when
// known, the 1-based line and column of the offending node (0 otherwise).
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& source, int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Sizes accept plain page counts ("4096") or byte quantities with a B, KiB,
// MiB or GiB suffix, converted with page_size (rounding up).
PageCount ParseSize(std::string_view text, std::uint64_t page_size);

// Rationals accept decimals ("0.125") or fractions ("1/8").
double ParseRational(std::string_view text);

// Parses and applies defaults. Throws ScenarioError on syntax or schema
// problems and InvalidConfig when the resolved scenario cannot run.
Scenario ParseScenarioText(std::string_view text, const std::string& source = "<string>");
Scenario ParseScenarioFile(const std::filesystem::path& path);

// Violations of the scenario-level invariants plus FindConfigViolations.
std::vector<std::string> FindScenarioViolations(const Scenario& scenario);

// Fully resolved configuration, echoed as the export run header.
nlohmann::json ScenarioToJson(const Scenario& scenario);

}  // namespace tiersim

#endif  // TIERSIM_SCENARIO_H_
