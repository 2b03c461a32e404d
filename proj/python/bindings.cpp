#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gsb/asymptotics.hpp"
#include "gsb/divergence.hpp"
#include "gsb/errors.hpp"
#include "gsb/estimation.hpp"
#include "gsb/influence.hpp"
#include "gsb/simulation.hpp"
#include "gsb/tuning.hpp"

namespace py = pybind11;
using namespace gsb;

namespace {

EmpiricalDensity to_data(const std::vector<long long>& sample) {
  return EmpiricalDensity::from_sample(std::span<const long long>(sample));
}

py::dict triplet_dict(const TuningTriplet& t) {
  py::dict d;
  d["alpha"] = t.alpha();
  d["lambda"] = t.lambda();
  d["beta"] = t.beta();
  return d;
}

py::dict selection_dict(const TuningSelection& s) {
  py::dict d;
  d["method"] = s.method;
  d["triplet"] = triplet_dict(s.triplet);
  d["theta_hat"] = s.theta_hat;
  d["criterion_value"] = s.criterion_value;
  d["converged"] = s.converged;
  d["grid_resolution"] = s.grid_resolution;
  py::list trace;
  for (const auto& step : s.pilot_trace) {
    py::dict st;
    st["pilot"] = step.pilot;
    st["triplet"] = triplet_dict(step.triplet);
    st["theta_hat"] = step.theta_hat;
    st["criterion"] = step.criterion;
    trace.append(st);
  }
  d["pilot_trace"] = trace;
  d["warnings"] = s.warnings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_gsb, m) {
  m.doc() = "Minimum GSB divergence estimation for discrete models";

  // GsbError is the common base; the specific errors also derive from the
  // matching builtin so callers can catch ValueError / ArithmeticError.
  // Leaked on purpose: these must outlive interpreter shutdown.
  static auto* base = new py::exception<Error>(m, "GsbError", PyExc_RuntimeError);
  auto derived = [&](const char* name, PyObject* builtin) {
    py::tuple bases = py::make_tuple(*base, py::handle(builtin));
    py::object cls = py::reinterpret_steal<py::object>(
        PyErr_NewException((std::string("gsb._gsb.") + name).c_str(), bases.ptr(), nullptr));
    m.attr(name) = cls;
    return cls;
  };
  static auto* input_error = new py::object(derived("InputError", PyExc_ValueError));
  static auto* singular_error = new py::object(derived("SingularMatrixError", PyExc_ArithmeticError));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InputError& e) {
      PyErr_SetString(input_error->ptr(), e.what());
    } catch (const SingularMatrixError& e) {
      PyErr_SetString(singular_error->ptr(), e.what());
    } catch (const Error& e) {
      PyErr_SetString(base->ptr(), e.what());
    }
  });

  py::class_<TuningTriplet>(m, "TuningTriplet")
      .def(py::init<double, double, double>(), py::arg("alpha"), py::arg("lam"), py::arg("beta"))
      .def_property_readonly("alpha", &TuningTriplet::alpha)
      .def_property_readonly("lam", &TuningTriplet::lambda)
      .def_property_readonly("beta", &TuningTriplet::beta)
      .def_property_readonly("A", &TuningTriplet::A)
      .def_property_readonly("B", &TuningTriplet::B)
      .def("__repr__", [](const TuningTriplet& t) { return "TuningTriplet" + t.to_string(); });

  m.def(
      "gsb_divergence",
      [](const std::vector<double>& g, const std::vector<double>& f, const TuningTriplet& t) {
        return gsb_divergence(DiscreteDensity(g), DiscreteDensity(f), t);
      },
      py::arg("g"), py::arg("f"), py::arg("triplet"));

  m.def(
      "named_divergence",
      [](const std::string& name, const std::vector<double>& g, const std::vector<double>& f,
         const std::vector<double>& params) {
        return named_divergence(parse_divergence_name(name), DiscreteDensity(g), DiscreteDensity(f), params);
      },
      py::arg("name"), py::arg("g"), py::arg("f"), py::arg("params") = std::vector<double>{});

  m.def(
      "estimate",
      [](const std::vector<long long>& sample, const TuningTriplet& t, const std::string& model) {
        const auto r = estimate(t, ModelFamily::by_name(model), to_data(sample));
        py::dict d;
        d["theta_hat"] = r.theta_hat;
        d["std_error"] = r.std_error ? py::cast(*r.std_error) : py::none();
        d["objective"] = r.objective_at_min;
        d["estimating_value"] = r.estimating_value;
        d["converged"] = r.converged;
        d["iterations"] = r.iterations;
        d["message"] = r.message;
        return d;
      },
      py::arg("sample"), py::arg("triplet"), py::arg("model") = "poisson");

  m.def(
      "sandwich",
      [](const TuningTriplet& t, double theta, const std::string& model) {
        const auto cov = model_JV(t, ModelFamily::by_name(model), theta);
        py::dict d;
        d["J"] = cov.J(0, 0);
        d["V"] = cov.V(0, 0);
        d["sandwich"] = cov.sandwich ? py::cast((*cov.sandwich)(0, 0)) : py::none();
        d["condition_number"] = cov.condition_number;
        return d;
      },
      py::arg("triplet"), py::arg("theta"), py::arg("model") = "poisson");

  m.def(
      "influence",
      [](const TuningTriplet& t, double theta, const std::vector<std::size_t>& ys, const std::string& model) {
        const ModelFamily family = ModelFamily::by_name(model);
        const ModelInfluence inf(t, family, theta);
        std::vector<double> out;
        for (auto y : ys) out.push_back(inf(y).value(0));
        return out;
      },
      py::arg("triplet"), py::arg("theta"), py::arg("ys"), py::arg("model") = "poisson");

  m.def(
      "classify_boundedness",
      [](const TuningTriplet& t) {
        const auto v = classify_boundedness(t);
        py::dict d;
        d["bounded"] = v.bounded;
        d["region"] = region_name(v.region);
        d["witness"] = v.witness;
        return d;
      },
      py::arg("triplet"));

  m.def(
      "sample_mixture",
      [](std::size_t n, double eps, std::uint64_t seed, double base_theta, double contaminant_theta) {
        ContaminationScheme s;
        s.epsilon = eps;
        s.base_theta = base_theta;
        s.contaminant_theta = contaminant_theta;
        RngStream rng = replication_stream(seed, 0, 0);
        return sample_mixture(s, n, rng);
      },
      py::arg("n"), py::arg("eps"), py::arg("seed"), py::arg("base_theta") = 3.0,
      py::arg("contaminant_theta") = 10.0);

  m.def(
      "run_mse_grid",
      [](const std::vector<TuningTriplet>& triplets, const std::vector<double>& eps, std::size_t n, std::size_t reps,
         std::uint64_t seed, std::size_t workers) {
        MseGridConfig cfg;
        cfg.triplets = triplets;
        cfg.epsilons = eps;
        cfg.n = n;
        cfg.reps = reps;
        cfg.seed = seed;
        cfg.workers = workers;
        MseGrid grid;
        {
          py::gil_scoped_release release;
          grid = run_mse_grid(cfg);
        }
        py::list cells;
        for (const auto& c : grid.cells) {
          py::dict d;
          d["triplet"] = triplet_dict(c.triplet);
          d["epsilon"] = c.epsilon;
          d["mse"] = c.mse;
          d["mc_se"] = c.mc_se;
          d["failures"] = c.failures;
          d["valid"] = c.valid;
          cells.append(d);
        }
        return cells;
      },
      py::arg("triplets"), py::arg("eps"), py::arg("n") = 50, py::arg("reps") = 1000, py::arg("seed") = 20240601,
      py::arg("workers") = 0);

  m.def(
      "select",
      [](const std::vector<long long>& sample, const std::string& method, const std::vector<double>& alphas,
         const std::vector<double>& lambdas, const std::vector<double>& betas, const std::string& model) {
        const auto grid = TuningGrid::make(alphas, lambdas, betas);
        const auto family = ModelFamily::by_name(model);
        const auto data = to_data(sample);
        if (method == "hk") return selection_dict(select_hk(grid, family, data));
        if (method == "owj") return selection_dict(select_owj(grid, family, data));
        if (method == "iwj") return selection_dict(select_iwj(grid, family, data));
        throw InputError("method must be hk, owj or iwj");
      },
      py::arg("sample"), py::arg("method"), py::arg("alphas"), py::arg("lambdas"), py::arg("betas"),
      py::arg("model") = "poisson");
}
