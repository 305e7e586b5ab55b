#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hfevd/cli.hpp"
#include "hfevd/decomposition.hpp"
#include "hfevd/error.hpp"
#include "hfevd/estimation.hpp"
#include "hfevd/irf.hpp"
#include "hfevd/ortho_poly.hpp"
#include "hfevd/parallel.hpp"
#include "hfevd/registry.hpp"
#include "hfevd/report_io.hpp"
#include "hfevd/simulation.hpp"

namespace py = pybind11;
using namespace hfevd;

namespace {

// Python objects cross the boundary as JSON text; the schemas are the ones
// the CLI reads and writes.
Json to_cpp(const py::object& obj) {
  return Json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(dump_json(j)); }

History make_history(const Eigen::MatrixXd& values) {
  // A single row or column is one observation.
  if (values.rows() == 1 || values.cols() == 1) return History::from_row(values.reshaped());
  return History(values);
}

InnovationKind make_innovations(const std::optional<std::vector<std::vector<double>>>& samples) {
  if (!samples) return InnovationKind::gaussian();
  std::vector<EmpiricalDistribution> d;
  for (const auto& s : *samples) d.emplace_back(s);
  return InnovationKind::empirical(std::move(d));
}

ShockKind shock_kind(const std::string& s) {
  if (s == "additive") return ShockKind::additive;
  if (s == "pegged") return ShockKind::pegged;
  if (s == "mit") return ShockKind::mit;
  throw Error("irf", Errc::parameter, "shock kind must be additive, pegged or mit");
}

std::vector<PartitionSpec> partitions_or_default(const py::object& partitions) {
  if (partitions.is_none())
    return {{"linear", select::Linear{}}, {"nonlinear", select::Nonlinear{}}};
  return partitions_from_json(to_cpp(partitions));
}

std::vector<PolyFamily> families_from_py(const py::object& families) {
  std::vector<PolyFamily> out;
  for (const auto& f : to_cpp(families)) out.push_back(poly_family_from_json(f));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hermite and orthogonal-polynomial variance decompositions for nonlinear SVARs";

  static py::exception<Error> error(m, "HfevdError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error)(e.what());
      inst.attr("code") = e.qualified_code();
      PyErr_SetObject(error.ptr(), inst.ptr());
    }
  });

  py::class_<ModelSpec>(m, "Model")
      .def_property_readonly("name", &ModelSpec::name)
      .def_property_readonly("dimension", &ModelSpec::dimension)
      .def_property_readonly("lags", &ModelSpec::lags)
      .def_property_readonly("warnings", &ModelSpec::warnings)
      .def_property_readonly("theta",
                             [](const ModelSpec& s) {
                               py::dict d;
                               for (const auto& t : s.theta()) d[py::str(t.name)] = t.value;
                               return d;
                             })
      .def("step", [](const ModelSpec& s, const Eigen::MatrixXd& history, const Eigen::VectorXd& innovation) {
        return s.step(make_history(history), innovation);
      })
      .def("__repr__", [](const ModelSpec& s) { return "<hfevd.Model " + s.name() + ">"; });

  m.def(
      "model",
      [](const std::string& name, const py::dict& params, const std::optional<std::vector<std::vector<double>>>& samples) {
        return ModelRegistry::defaults().build(name, to_cpp(params), make_innovations(samples));
      },
      py::arg("name"), py::arg("params") = py::dict(), py::arg("innovations") = py::none(),
      "Built-in model by name; `innovations` is one residual sample per component for empirical innovations.");

  m.def("model_names", [] { return ModelRegistry::defaults().names(); });

  m.def(
      "decompose",
      [](const ModelSpec& model, const Eigen::MatrixXd& history, int h, std::size_t S, std::uint64_t seed,
         int max_total_degree, int max_active, const py::object& partitions) {
        const auto parts = partitions_or_default(partitions);
        DecompositionReport r;
        {
          py::gil_scoped_release release;
          r = decompose(model, make_history(history), h, S, seed, {max_total_degree, max_active}, parts);
        }
        return to_py(to_json(r));
      },
      py::arg("model"), py::arg("history"), py::arg("h"), py::arg("S"), py::arg("seed"),
      py::arg("max_total_degree") = 5, py::arg("max_active") = 2, py::arg("partitions") = py::none(),
      "HFEVD report as a dict (same layout as report.json). Partition specs use 1-based components.");

  m.def(
      "ofevd",
      [](const ModelSpec& model, const Eigen::MatrixXd& history, int h, std::size_t S, std::uint64_t seed,
         const py::object& families, int max_total_degree, int max_active, const py::object& partitions) {
        const auto fams = families_from_py(families);
        const auto parts = partitions_or_default(partitions);
        DecompositionReport r;
        {
          py::gil_scoped_release release;
          r = ofevd(model, make_history(history), h, S, seed, fams, {max_total_degree, max_active}, parts);
        }
        return to_py(to_json(r));
      },
      py::arg("model"), py::arg("history"), py::arg("h"), py::arg("S"), py::arg("seed"), py::arg("families"),
      py::arg("max_total_degree") = 3, py::arg("max_active") = 2, py::arg("partitions") = py::none());

  m.def(
      "classical_family",
      [](const std::string& kind, int max_degree, double alpha, double beta) {
        return to_py(to_json(classical_family(poly_kind_from_string(kind), max_degree, alpha, beta)));
      },
      py::arg("kind"), py::arg("max_degree"), py::arg("alpha") = 0.0, py::arg("beta") = 0.0);

  m.def(
      "sample_family",
      [](const std::vector<double>& sample, int max_degree) {
        return to_py(to_json(gram_schmidt_family(std::span<const double>(sample), max_degree, std::nullopt)));
      },
      py::arg("sample"), py::arg("max_degree"));

  auto irf = [](auto fn) {
    return [fn](const ModelSpec& model, const Eigen::MatrixXd& history, int h, int component, double magnitude,
                std::size_t S, std::uint64_t seed) {
      IrfEstimate e;
      {
        py::gil_scoped_release release;
        e = fn(model, make_history(history), h, ShockSpec{component - 1, magnitude, ShockKind::additive}, S, seed);
      }
      return py::make_tuple(e.mean, e.se);
    };
  };
  m.def("eirf",
        irf([](const ModelSpec& md, const History& hi, int h, ShockSpec s, std::size_t S, std::uint64_t sd) {
          return eirf(md, hi, h, s, S, sd);
        }),
        py::arg("model"), py::arg("history"), py::arg("h"), py::arg("component"), py::arg("magnitude"), py::arg("S"),
        py::arg("seed"), "(mean, se) of the additive-shock response; component is 1-based.");
  m.def("girf",
        irf([](const ModelSpec& md, const History& hi, int h, ShockSpec s, std::size_t S, std::uint64_t sd) {
          s.kind = ShockKind::pegged;
          return girf(md, hi, h, s, S, sd);
        }),
        py::arg("model"), py::arg("history"), py::arg("h"), py::arg("component"), py::arg("magnitude"), py::arg("S"),
        py::arg("seed"));
  m.def(
      "irf_path",
      [](const ModelSpec& model, const Eigen::MatrixXd& history, int h, int component, double magnitude,
         const std::string& kind, std::size_t S, std::uint64_t seed) {
        const IrfPath p = irf_path(model, make_history(history), h, {component - 1, magnitude, shock_kind(kind)}, S, seed);
        return py::make_tuple(p.mean, p.se);
      },
      py::arg("model"), py::arg("history"), py::arg("h"), py::arg("component"), py::arg("magnitude"),
      py::arg("kind") = "additive", py::arg("S") = 100000, py::arg("seed") = 0);

  m.def(
      "simulate",
      [](const ModelSpec& model, const Eigen::MatrixXd& history, std::size_t T, std::uint64_t seed) {
        return simulate_series(model, make_history(history), T, seed);
      },
      py::arg("model"), py::arg("history"), py::arg("T"), py::arg("seed"));

  m.def(
      "tvar_fit",
      [](const Eigen::MatrixXd& data, int trigger, int grid_points, double min_frac, bool intercept) {
        TvarOptions opt;
        opt.intercept = intercept;
        opt.min_regime_frac = min_frac;
        const TvarFit fit = tvar_fit(data, trigger - 1, threshold_grid(data, trigger - 1, grid_points, min_frac), opt);
        return to_py(to_json(fit));
      },
      py::arg("data"), py::arg("trigger") = 1, py::arg("grid_points") = 50, py::arg("min_frac") = 0.15,
      py::arg("intercept") = true, "TVAR fit as a dict (same layout as fit.json); trigger is 1-based.");

  m.def(
      "model_from_fit", [](const py::dict& fit) { return tvar_fit_from_json(to_cpp(fit)).to_model(); },
      py::arg("fit"));

  m.def(
      "run_config",
      [](const std::string& command, const py::dict& config, const std::filesystem::path& base_dir,
         const std::filesystem::path& out_dir) {
        const Json cfg = to_cpp(config);
        py::gil_scoped_release release;
        run_config(command, cfg, base_dir, out_dir);
      },
      py::arg("command"), py::arg("config"), py::arg("base_dir"), py::arg("out_dir"),
      "Runs a CLI command on a config dict and writes its artifacts to out_dir.");

  m.def("set_threads", &set_thread_count, py::arg("threads"));
  m.def("threads", &thread_count);
}
