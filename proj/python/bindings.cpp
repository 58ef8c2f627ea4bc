#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <stdexcept>

#include "adaptsc/adaptive_driver.hpp"
#include "adaptsc/analytic_ode.hpp"
#include "adaptsc/error_estimator.hpp"
#include "adaptsc/fem_assembly.hpp"
#include "adaptsc/multi_index.hpp"
#include "adaptsc/sparse_grid.hpp"

namespace py = pybind11;
using namespace adaptsc;

namespace {

std::vector<std::vector<int>> as_tuples(const std::vector<MultiIndex>& v) {
  std::vector<std::vector<int>> out;
  for (const auto& m : v) out.push_back(m.levels());
  return out;
}

MultiIndexSet set_from(std::size_t dim, const std::vector<std::vector<int>>& members) {
  std::vector<MultiIndex> v;
  for (const auto& m : members) v.emplace_back(m);
  return MultiIndexSet(dim, v);
}

std::shared_ptr<ParametricProblem> fem_problem(int grid, const std::string& wind, double sigma, double epsilon,
                                               double tau, std::size_t kl_dim) {
  std::shared_ptr<const WindModel> w;
  if (wind == "four_quadrant") {
    w = std::make_shared<FourQuadrantWind>(sigma);
  } else if (wind == "kl") {
    KlParameters p;
    p.dim = kl_dim;
    w = make_kl_wind(p);
  } else {
    throw std::invalid_argument("wind must be 'four_quadrant' or 'kl'");
  }
  return std::make_shared<FemProblem>(SpatialMesh(grid), std::move(w), epsilon, HotWall{tau});
}

py::dict report_dict(const EstimatorReport& r) {
  py::dict d;
  d["time"] = r.time;
  d["interpolation"] = r.interpolation;
  d["correction"] = r.correction;
  d["timestepping"] = r.timestepping;
  d["total"] = r.total;
  d["tolerance"] = r.tolerance;
  d["n_colloc"] = r.n_colloc;
  d["n_colloc_enhanced"] = r.n_colloc_enhanced;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Adaptive sparse-grid stochastic collocation";

  py::class_<MultiIndexSet>(m, "MultiIndexSet")
      .def(py::init(&set_from), py::arg("dim"), py::arg("members"))
      .def_static("root", &MultiIndexSet::root)
      .def_static("total_degree", &MultiIndexSet::total_degree, py::arg("dim"), py::arg("w"))
      .def_property_readonly("dim", &MultiIndexSet::dim)
      .def("__len__", &MultiIndexSet::size)
      .def("__contains__", [](const MultiIndexSet& s, const std::vector<int>& nu) { return s.contains(MultiIndex(nu)); })
      .def("members", [](const MultiIndexSet& s) { return as_tuples(s.members()); })
      .def("with_index", [](const MultiIndexSet& s, const std::vector<int>& nu) { return s.with(MultiIndex(nu)); })
      .def("is_admissible", &MultiIndexSet::is_admissible)
      .def("margin", &MultiIndexSet::margin)
      .def("reduced_margin", &MultiIndexSet::reduced_margin)
      .def("enhance", &MultiIndexSet::enhance)
      .def("max_levels", &MultiIndexSet::max_levels)
      .def("__eq__", [](const MultiIndexSet& a, const MultiIndexSet& b) { return a == b; })
      .def("__repr__", [](const MultiIndexSet& s) { return "MultiIndexSet(" + std::to_string(s.size()) + " members)"; });

  m.def("rule_size", &rule_size);
  m.def("cc_points", [](int level) { return cc_rule(level).points; });
  m.def("sparse_points", [](const MultiIndexSet& s) {
    std::vector<std::vector<double>> out;
    for (const auto& z : sparse_points(s)) out.push_back(z.coordinates());
    return out;
  });
  m.def("combination_coefficients", [](const MultiIndexSet& s) {
    py::dict out;
    for (const auto& [nu, c] : combination_coefficients(s)) {
      if (c != 0) out[py::tuple(py::cast(nu.levels()))] = c;
    }
    return out;
  });
  m.def("lagrange_norm", [](const MultiIndexSet& s, const std::vector<double>& y) {
    return lagrange_norm(s, point_from_coordinates(y));
  });
  m.def(
      "dorfler_mark",
      [](const std::map<std::vector<int>, double>& indicators, double theta) {
        std::map<MultiIndex, double> in;
        for (const auto& [k, v] : indicators) in.emplace(MultiIndex(k), v);
        return as_tuples(dorfler_mark(in, theta));
      },
      py::arg("indicators"), py::arg("theta"));

  py::class_<ComplexOdeProblem>(m, "ComplexOdeProblem")
      .def(py::init([](double epsilon, double u0) { return ComplexOdeProblem{epsilon, u0}; }),
           py::arg("epsilon") = 0.1, py::arg("u0") = 1.0)
      .def_readwrite("epsilon", &ComplexOdeProblem::epsilon)
      .def_readwrite("u0", &ComplexOdeProblem::u0);
  m.def("exact_solution", &exact_solution);
  m.def("exact_mean", &exact_mean);
  m.def("exact_stddev", &exact_stddev);
  m.def("log_spaced", &log_spaced);
  m.def(
      "timestepping_study",
      [](const ComplexOdeProblem& p, double y, const std::string& method, double control, double final_time) {
        TimeMethod tm;
        if (method == "tr") {
          tm = TimeMethod::tr;
        } else if (method == "tr_ab2") {
          tm = TimeMethod::tr_ab2;
        } else {
          throw std::invalid_argument("method must be 'tr' or 'tr_ab2'");
        }
        const auto s = timestepping_study(p, y, tm, control, final_time);
        py::dict d;
        d["times"] = s.times;
        d["steps"] = s.steps;
        d["global_errors"] = s.global_errors;
        d["step_count"] = s.step_count;
        return d;
      },
      py::arg("problem"), py::arg("y"), py::arg("method"), py::arg("control"), py::arg("final_time"));
  m.def("interp_error_study", [](const ComplexOdeProblem& p, int k, const std::vector<double>& times) {
    py::list out;
    for (const auto& s : interp_error_study(p, k, times)) {
      py::dict d;
      d["time"] = s.time;
      d["l2_error"] = s.l2_error;
      d["mean"] = s.mean;
      d["stddev"] = s.stddev;
      d["mean_error"] = s.mean_error;
      d["stddev_error"] = s.stddev_error;
      out.append(d);
    }
    return out;
  });

  py::class_<ParametricProblem, std::shared_ptr<ParametricProblem>>(m, "ParametricProblem")
      .def_property_readonly("parameter_dim", &ParametricProblem::parameter_dim)
      .def("initial_condition", &ParametricProblem::initial_condition);
  m.def("ode_problem", [](double epsilon, double u0) -> std::shared_ptr<ParametricProblem> {
    return std::make_shared<ComplexOdeFamily>(ComplexOdeProblem{epsilon, u0});
  }, py::arg("epsilon") = 0.1, py::arg("u0") = 1.0);
  m.def("fem_problem", &fem_problem, py::arg("grid") = 3, py::arg("wind") = "four_quadrant", py::arg("sigma") = 0.5,
        py::arg("epsilon") = 0.1, py::arg("tau") = 0.1, py::arg("kl_dim") = 8);

  py::enum_<GlobalErrorMode>(m, "GlobalErrorMode")
      .value("per_point", GlobalErrorMode::per_point)
      .value("shared_at_mean", GlobalErrorMode::shared_at_mean);
  py::enum_<RefinementInit>(m, "RefinementInit")
      .value("reintegrate", RefinementInit::reintegrate)
      .value("interpolate", RefinementInit::interpolate);

  py::class_<AdaptiveConfig>(m, "AdaptiveConfig")
      .def(py::init<>())
      .def_readwrite("tolerance", &AdaptiveConfig::tolerance)
      .def_readwrite("safety", &AdaptiveConfig::safety)
      .def_readwrite("theta", &AdaptiveConfig::theta)
      .def_readwrite("sync_step", &AdaptiveConfig::sync_step)
      .def_readwrite("grow", &AdaptiveConfig::grow)
      .def_readwrite("shrink", &AdaptiveConfig::shrink)
      .def_readwrite("initial_step", &AdaptiveConfig::initial_step)
      .def_readwrite("final_time", &AdaptiveConfig::final_time)
      .def_readwrite("ge_mode", &AdaptiveConfig::ge_mode)
      .def_readwrite("init", &AdaptiveConfig::init)
      .def_readwrite("coarse_tolerance", &AdaptiveConfig::coarse_tolerance)
      .def_readwrite("max_level", &AdaptiveConfig::max_level)
      .def_readwrite("report_times", &AdaptiveConfig::report_times)
      .def_readwrite("threads", &AdaptiveConfig::threads)
      .def("violations", &AdaptiveConfig::violations);

  py::class_<AdaptiveResult>(m, "AdaptiveResult")
      .def_readonly("final_set", &AdaptiveResult::final_set)
      .def_readonly("final_time", &AdaptiveResult::final_time)
      .def_readonly("warnings", &AdaptiveResult::warnings)
      .def_property_readonly("reports",
                             [](const AdaptiveResult& r) {
                               py::list l;
                               for (const auto& e : r.reports) l.append(report_dict(e));
                               return l;
                             })
      .def_property_readonly("report_estimates",
                             [](const AdaptiveResult& r) {
                               py::list l;
                               for (const auto& e : r.report_estimates) l.append(report_dict(e));
                               return l;
                             })
      .def_property_readonly("refinements",
                             [](const AdaptiveResult& r) {
                               py::list l;
                               for (const auto& e : r.refinements) {
                                 py::dict d;
                                 d["time"] = e.time;
                                 d["marked"] = as_tuples(e.marked);
                                 d["n_colloc"] = e.n_colloc;
                                 d["n_colloc_enhanced"] = e.n_colloc_enhanced;
                                 l.append(d);
                               }
                               return l;
                             })
      .def_property_readonly("total_approximation_steps", &AdaptiveResult::total_approximation_steps)
      .def_property_readonly("total_estimator_steps", &AdaptiveResult::total_estimator_steps)
      .def(
          "snapshot_mean",
          [](const AdaptiveResult& r, std::size_t k) { return Eigen::VectorXd(r.snapshots.at(k).interpolant().expansion().mean()); },
          "Mean field of u_A at report time k.")
      .def("snapshot_evaluate", [](const AdaptiveResult& r, std::size_t k, const std::vector<double>& y) {
        return Eigen::VectorXd(r.snapshots.at(k).interpolant().evaluate(y));
      });

  m.def(
      "run_adaptive",
      [](const std::shared_ptr<ParametricProblem>& problem, const AdaptiveConfig& config) {
        py::gil_scoped_release release;
        return run_adaptive(*problem, config);
      },
      py::arg("problem"), py::arg("config"));

  py::register_exception<IntegrationFailure>(m, "IntegrationFailure", PyExc_RuntimeError);
}
