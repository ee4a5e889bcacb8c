// Python bindings: scenario parsing, stepping a simulation, summaries and
// exports. Results come back as plain dicts via the JSON serializers.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tiersim/demotion.h"
#include "tiersim/promotion.h"
#include "tiersim/scenario.h"
#include "tiersim/simulator.h"

namespace py = pybind11;
using namespace tiersim;

namespace {

// nlohmann::json -> Python object through the json module.
py::object ToPython(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

Scenario LoadScenario(const std::string& path) { return ParseScenarioFile(path); }

}  // namespace

PYBIND11_MODULE(_tiersim, m) {
  m.doc() = "Tiered-memory placement simulator";

  py::register_exception<InvalidConfig>(m, "InvalidConfig", PyExc_ValueError);
  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);

  py::class_<Scenario>(m, "Scenario")
      .def_readwrite("name", &Scenario::name)
      .def_readwrite("duration", &Scenario::duration)
      .def_readwrite("snapshot_interval", &Scenario::snapshot_interval)
      .def_property(
          "rng_seed", [](const Scenario& s) { return s.machine.rng_seed; },
          [](Scenario& s, std::uint64_t seed) { s.machine.rng_seed = seed; })
      .def_property(
          "thrash_mitigation", [](const Scenario& s) { return s.policy.thrash_mitigation; },
          [](Scenario& s, bool on) { s.policy.thrash_mitigation = on; })
      .def_property_readonly("container_names",
                             [](const Scenario& s) {
                               std::vector<std::string> names;
                               for (const auto& c : s.containers) names.push_back(c.name);
                               return names;
                             })
      .def("to_dict", [](const Scenario& s) { return ToPython(ScenarioToJson(s)); });

  m.def("load_scenario", &LoadScenario, py::arg("path"), "Parse a scenario file.");
  m.def(
      "parse_scenario",
      [](const std::string& text) { return ParseScenarioText(text); }, py::arg("text"),
      "Parse scenario YAML text.");
  m.def("validate",
        [](const Scenario& s) { return FindScenarioViolations(s); },
        py::arg("scenario"), "List configuration violations (empty when valid).");

  py::class_<Simulator>(m, "Simulator")
      .def(py::init<Scenario>(), py::arg("scenario"))
      .def("step", &Simulator::Step, "Run one tick.")
      .def(
          "run", [](Simulator& s) { return ToPython(ToJson(s.Run())); },
          "Run to completion and return the summary.")
      .def_property_readonly("tick", &Simulator::tick)
      .def_property_readonly("done", &Simulator::done)
      .def("summary", [](const Simulator& s) { return ToPython(ToJson(s.Summary())); })
      .def("snapshots",
           [](const Simulator& s) {
             py::list out;
             for (const MetricsSnapshot& snap : s.snapshots()) out.append(ToPython(ToJson(snap)));
             return out;
           })
      .def("local_pages",
           [](const Simulator& s, std::size_t id) { return s.memory().container(id).local_usage; })
      .def("cxl_pages",
           [](const Simulator& s, std::size_t id) { return s.memory().container(id).cxl_usage; })
      .def("check_invariants", [](const Simulator& s) { return s.memory().CheckInvariants(); })
      .def(
          "export",
          [](const Simulator& s, const std::filesystem::path& path, const std::string& format) {
            s.Export(path, ParseExportFormat(format));
          },
          py::arg("path"), py::arg("format") = "csv");

  m.def("demotion_scan_size", &DemotionScanSize, py::arg("n_lru"), py::arg("n_cgroup"),
        py::arg("n_protection"));
  m.def("promotion_throttle_factor", &PromotionThrottleFactor, py::arg("n_cgroup"),
        py::arg("n_protection"));
  m.def("promotion_scan_size", &PromotionScanSize, py::arg("p_base"), py::arg("throttled"),
        py::arg("n_cgroup"), py::arg("n_protection"), py::arg("multiplier") = 1.0);
  m.def(
      "read_export",
      [](const std::filesystem::path& path) {
        const ExportData d = ReadExport(path);
        py::list snaps;
        for (const MetricsSnapshot& s : d.snapshots) snaps.append(ToPython(ToJson(s)));
        return py::make_tuple(ToPython(d.run_header), snaps);
      },
      py::arg("path"), "Read a CSV or JSONL export: (run_header, snapshots).");
}
