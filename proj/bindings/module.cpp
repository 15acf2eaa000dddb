#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mfhb/boltzmann.hpp"
#include "mfhb/diagnostics.hpp"
#include "mfhb/dynamics.hpp"
#include "mfhb/grid.hpp"
#include "mfhb/kinetic_pde.hpp"
#include "mfhb/parallel.hpp"
#include "mfhb/serialize.hpp"
#include "mfhb/types.hpp"

namespace py = pybind11;
using namespace mfhb;

PYBIND11_MODULE(_mfhb, m) {
  m.doc() = "mean-field heavy-ball training dynamics: particles, kinetic PDE, "
            "Boltzmann fixed points, diagnostics";

  py::enum_<Integrator>(m, "Integrator")
      .value("SHB", Integrator::SHB)
      .value("HB", Integrator::HB)
      .value("AGD", Integrator::AGD)
      .value("GF", Integrator::GF);

  py::enum_<ActivationKind>(m, "ActivationKind")
      .value("Sigmoid", ActivationKind::Sigmoid)
      .value("Tanh", ActivationKind::Tanh);

  py::enum_<RegularizerKind>(m, "RegularizerKind")
      .value("NoReg", RegularizerKind::None)
      .value("SmoothedNorm", RegularizerKind::SmoothedNorm)
      .value("Quadratic", RegularizerKind::Quadratic);

  py::class_<ParamPoint>(m, "ParamPoint")
      .def(py::init([](std::vector<double> a, double b) {
             ParamPoint p;
             p.a = std::move(a);
             p.b = b;
             return p;
           }),
           py::arg("a"), py::arg("b"))
      .def_readwrite("a", &ParamPoint::a)
      .def_readwrite("b", &ParamPoint::b)
      .def("flatten", &ParamPoint::flatten)
      .def_static("from_flat", &ParamPoint::from_flat);

  py::class_<ParticleState>(m, "ParticleState")
      .def_readwrite("theta", &ParticleState::theta)
      .def_readwrite("r", &ParticleState::r);

  py::class_<Ensemble>(m, "Ensemble")
      .def_readwrite("particles", &Ensemble::particles)
      .def_readonly("dim", &Ensemble::dim)
      .def_readonly("time", &Ensemble::time)
      .def("size", &Ensemble::size)
      .def("to_json", [](const Ensemble& e) { return to_json(e).dump(); })
      .def_static("from_json",
                  [](const std::string& s) { return ensemble_from_json(nlohmann::json::parse(s)); });

  py::class_<TeacherSpec>(m, "TeacherSpec").def_readonly("neurons", &TeacherSpec::neurons);

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("features", &Dataset::features)
      .def_readonly("labels", &Dataset::labels)
      .def_readonly("teacher", &Dataset::teacher)
      .def("to_json", [](const Dataset& d) { return to_json(d).dump(); })
      .def_static("from_json",
                  [](const std::string& s) { return dataset_from_json(nlohmann::json::parse(s)); });

  py::class_<RegularizerSpec>(m, "RegularizerSpec")
      .def(py::init<>())
      .def_static("none", &RegularizerSpec::none)
      .def_static("smoothed_norm", &RegularizerSpec::smoothed_norm, py::arg("c"),
                  py::arg("eps") = 1e-3)
      .def_static("quadratic", &RegularizerSpec::quadratic, py::arg("c"))
      .def_readwrite("kind", &RegularizerSpec::kind)
      .def_readwrite("c", &RegularizerSpec::c)
      .def_readwrite("eps", &RegularizerSpec::eps);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("d", &RunConfig::d)
      .def_readwrite("n", &RunConfig::n)
      .def_readwrite("n0", &RunConfig::n0)
      .def_readwrite("m", &RunConfig::m)
      .def_readwrite("gamma", &RunConfig::gamma)
      .def_readwrite("beta", &RunConfig::beta)
      .def_readwrite("dt", &RunConfig::dt)
      .def_readwrite("steps", &RunConfig::steps)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("integrator", &RunConfig::integrator)
      .def_readwrite("regularizer", &RunConfig::regularizer)
      .def_readwrite("record_every", &RunConfig::record_every)
      .def_readwrite("init_scale", &RunConfig::init_scale)
      .def_readwrite("activation", &RunConfig::activation)
      .def_readwrite("t_floor", &RunConfig::t_floor)
      .def("to_json", [](const RunConfig& c) { return to_json(c).dump(); })
      .def_static("from_json", [](const std::string& s) {
        return run_config_from_json(nlohmann::json::parse(s));
      });

  py::class_<TrajectoryRecord>(m, "TrajectoryRecord")
      .def_readonly("step", &TrajectoryRecord::step)
      .def_readonly("time", &TrajectoryRecord::time)
      .def_readonly("risk", &TrajectoryRecord::risk)
      .def_readonly("loss", &TrajectoryRecord::loss)
      .def_readonly("kinetic", &TrajectoryRecord::kinetic);

  py::class_<TrajectoryResult>(m, "TrajectoryResult")
      .def_readonly("final_ensemble", &TrajectoryResult::final_ensemble)
      .def_readonly("records", &TrajectoryResult::records);

  m.def("set_thread_count", &set_thread_count, py::arg("n"));
  m.def("init_ensemble", &init_ensemble, py::arg("config"));
  m.def("sample_dataset", &sample_dataset, py::arg("d"), py::arg("n0"), py::arg("m"),
        py::arg("seed"), py::arg("act") = ActivationKind::Sigmoid, py::arg("init_scale") = 1.0);
  m.def(
      "basis_eval",
      [](const ParamPoint& theta, const std::vector<double>& x, ActivationKind act) {
        return basis_eval(theta, x, ActivationSpec{act});
      },
      py::arg("theta"), py::arg("x"), py::arg("act") = ActivationKind::Sigmoid);
  m.def(
      "network_output",
      [](const Ensemble& ens, const std::vector<double>& x, ActivationKind act) {
        return network_output(ens, x, ActivationSpec{act});
      },
      py::arg("ensemble"), py::arg("x"), py::arg("act") = ActivationKind::Sigmoid);
  m.def(
      "risk",
      [](const Ensemble& ens, const Dataset& data, ActivationKind act) {
        return risk(ens, data, ActivationSpec{act});
      },
      py::arg("ensemble"), py::arg("data"), py::arg("act") = ActivationKind::Sigmoid);
  m.def(
      "interaction_gradient",
      [](const Ensemble& ens, const Dataset& data, ActivationKind act,
         const RegularizerSpec& reg) {
        return interaction_gradient(ens, data, ActivationSpec{act}, reg);
      },
      py::arg("ensemble"), py::arg("data"), py::arg("act") = ActivationKind::Sigmoid,
      py::arg("reg") = RegularizerSpec::none());
  m.def("run_trajectory",
        [](const RunConfig& cfg, const Dataset& data) { return run_trajectory(cfg, data); },
        py::arg("config"), py::arg("data"));
  m.def("knn_entropy", &knn_entropy, py::arg("samples"), py::arg("k_neighbors") = 3);
  m.def(
      "velocity_stationarity",
      [](const Ensemble& ens, double beta) {
        const auto gaps = velocity_stationarity(ens, beta);
        return py::make_tuple(gaps.mean_gap, gaps.cov_gap);
      },
      py::arg("ensemble"), py::arg("beta"));
  m.def(
      "theta_r_independence",
      [](const Ensemble& ens) { return theta_r_independence(ens).max_abs_correlation; },
      py::arg("ensemble"));

  py::class_<ThetaGrid>(m, "ThetaGrid")
      .def_static("line", &ThetaGrid::line, py::arg("lo"), py::arg("hi"), py::arg("n"))
      .def_static("plane", &ThetaGrid::plane, py::arg("lo1"), py::arg("hi1"), py::arg("n1"),
                  py::arg("lo2"), py::arg("hi2"), py::arg("n2"))
      .def("cells", &ThetaGrid::cells)
      .def("center", &ThetaGrid::center);

  py::class_<ThetaDensity>(m, "ThetaDensity")
      .def_static("uniform", &ThetaDensity::uniform)
      .def_readwrite("values", &ThetaDensity::values)
      .def("mass", &ThetaDensity::mass);

  py::class_<GridKernels>(m, "GridKernels")
      .def_static(
          "build",
          [](const ThetaGrid& grid, const Dataset& data, ActivationKind act,
             const RegularizerSpec& reg, const ParamPoint& base, std::array<int, 2> axes) {
            ThetaSlice slice;
            slice.base = base;
            slice.axes = axes;
            return GridKernels::build(grid, data, ActivationSpec{act}, reg, slice);
          },
          py::arg("grid"), py::arg("data"), py::arg("act"), py::arg("reg"), py::arg("base"),
          py::arg("axes"))
      .def_static("linear_case", &GridKernels::linear_case, py::arg("grid"),
                  py::arg("f_values"));

  py::class_<FixedPointResult>(m, "FixedPointResult")
      .def_readonly("density", &FixedPointResult::density)
      .def_readonly("iterations", &FixedPointResult::iterations)
      .def_readonly("residual", &FixedPointResult::residual)
      .def_readonly("converged", &FixedPointResult::converged);

  m.def("apply_T", &apply_T, py::arg("rho"), py::arg("kernels"), py::arg("beta"));
  m.def("solve_fixed_point", &solve_fixed_point, py::arg("init"), py::arg("kernels"),
        py::arg("beta"), py::arg("damping") = 0.5, py::arg("tol") = 1e-9,
        py::arg("max_iter") = 20000);
  m.def("f_lambda", &f_lambda, py::arg("rho"), py::arg("kernels"), py::arg("lambda"));

  m.attr("__version__") = MFHB_VERSION;
}
