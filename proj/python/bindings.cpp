#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "forge/area.hpp"
#include "forge/error.hpp"
#include "forge/error_metrics.hpp"
#include "forge/parallel.hpp"
#include "forge/pcc.hpp"
#include "forge/pipeline.hpp"
#include "forge/popcount.hpp"
#include "forge/tnn.hpp"

namespace py = pybind11;
using namespace forge;

namespace {

std::vector<int> evaluate_vector(const Netlist& net, const std::vector<int>& bits) {
  if (bits.size() != net.input_count()) {
    throw ValidationError("expected " + std::to_string(net.input_count()) + " input bits");
  }
  BitMatrix in(net.input_count(), 1);
  for (std::size_t i = 0; i < bits.size(); ++i) in.set(i, 0, bits[i] != 0);
  const BitMatrix out = simulate(net, in);
  std::vector<int> result(out.rows());
  for (std::size_t r = 0; r < out.rows(); ++r) result[r] = out.get(r, 0);
  return result;
}

std::string arithmetic_error(const Netlist& approx, const Netlist& exact, const std::string& evaluator) {
  return to_json(eval_arithmetic(approx, exact, evaluator_from_string(evaluator))).dump();
}

py::tuple cgp(const Netlist& seed, double tau, const std::string& metric, std::uint64_t iterations,
              std::uint64_t rng_seed) {
  CgpSearchConfig cfg;
  cfg.tau = tau;
  cfg.error_metric = error_metric_from_string(metric);
  cfg.max_iterations = iterations;
  cfg.time_limit = std::chrono::duration<double>(0.0);
  PcLibraryEntry e;
  {
    py::gil_scoped_release release;
    e = cgp_search(seed, cfg, rng_seed);
  }
  return py::make_tuple(e.netlist, to_json(e).dump());
}

std::string pcc_error(const PccCircuit& pcc, std::uint64_t samples, std::uint64_t seed) {
  if (samples == 0) return to_json(eval_pcc_exhaustive(pcc)).dump();
  return to_json(eval_pcc_mc(pcc, samples, seed)).dump();
}

std::string pipeline(const std::string& config_path, const std::string& out_dir) {
  PipelineConfig cfg = load_pipeline_config(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  py::gil_scoped_release release;
  return run_pipeline(cfg).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bindings for the forge circuit toolkit";

  static py::exception<Error> base(m, "ForgeError");
  static py::exception<ValidationError> validation(m, "ValidationError", base.ptr());
  static py::exception<ResourceError> resource(m, "ResourceError", base.ptr());
  static py::exception<IoError> io(m, "IoError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      switch (e.kind()) {
        case ErrorKind::Validation: py::set_error(validation, e.what()); break;
        case ErrorKind::Resource: py::set_error(resource, e.what()); break;
        case ErrorKind::Io: py::set_error(io, e.what()); break;
      }
    }
  });

  py::class_<Netlist>(m, "Netlist")
      .def_property_readonly("name", &Netlist::name)
      .def_property_readonly("input_count", &Netlist::input_count)
      .def_property_readonly("output_count", &Netlist::output_count)
      .def_property_readonly("gate_count", &Netlist::active_gate_count)
      .def("evaluate", &evaluate_vector, py::arg("bits"))
      .def("to_json", [](const Netlist& n) { return to_json(n).dump(); })
      .def("to_verilog", [](const Netlist& n) { return to_verilog(n); })
      .def_static("from_json", [](const std::string& s) { return netlist_from_json(nlohmann::json::parse(s)); })
      .def("__eq__", [](const Netlist& a, const Netlist& b) { return a == b; });

  py::class_<PccCircuit>(m, "PccCircuit")
      .def_readonly("n_pos", &PccCircuit::n_pos)
      .def_readonly("n_neg", &PccCircuit::n_neg)
      .def_readonly("comparator_width", &PccCircuit::comparator_width)
      .def_readonly("assembled", &PccCircuit::assembled);

  py::class_<TnnModel>(m, "TnnModel")
      .def_readonly("name", &TnnModel::name)
      .def_readonly("input_count", &TnnModel::input_count)
      .def_readonly("hidden_count", &TnnModel::hidden_count)
      .def_readonly("class_count", &TnnModel::class_count)
      .def_readonly("hidden_weights", &TnnModel::hidden_weights)
      .def_readonly("output_weights", &TnnModel::output_weights)
      .def("to_json", [](const TnnModel& t) { return to_json(t).dump(); });

  m.def("set_threads", &set_thread_count, py::arg("count"));
  m.def("popcount_width", &popcount_width, py::arg("n"));
  m.def("build_exact_pc", &build_exact_pc, py::arg("n"));
  m.def("build_truncated_pc", &build_truncated_pc, py::arg("n"), py::arg("cut_bits"));
  m.def("area", [](const Netlist& n) { return area(n); }, py::arg("netlist"));
  m.def("arithmetic_error", &arithmetic_error, py::arg("approx"), py::arg("exact"), py::arg("evaluator") = "AUTO");
  m.def("cgp_search", &cgp, py::arg("seed"), py::arg("tau"), py::arg("metric") = "MAE",
        py::arg("iterations") = 10000, py::arg("rng_seed") = 1);
  m.def("build_comparator", &build_comparator, py::arg("width"));
  m.def("assemble_pcc", &assemble_pcc, py::arg("pc_pos"), py::arg("pc_neg"));
  m.def("pcc_error", &pcc_error, py::arg("pcc"), py::arg("samples") = 0, py::arg("seed") = 1);
  m.def("model_from_json", [](const std::string& s) { return model_from_json(nlohmann::json::parse(s)); });
  m.def("load_model", [](const std::string& p) { return load_model(p); }, py::arg("path"));
  m.def("infer_exact", [](const TnnModel& t, const std::vector<std::uint8_t>& x) { return infer_exact(t, x); },
        py::arg("model"), py::arg("sample"));
  m.def("generate_exact_netlist",
        [](const TnnModel& t) { return generate_netlist(t, TnnSelection::exact(t), t.name); }, py::arg("model"));
  m.def("run_pipeline", &pipeline, py::arg("config_path"), py::arg("out_dir") = "");
}
