// Copyright 2026 The qdsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Python bindings. Matrices cross as numpy arrays (complex128 / float64).

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

#include "qdsim/calibrate.hpp"
#include "qdsim/characterize.hpp"
#include "qdsim/hilbert.hpp"
#include "qdsim/liouville.hpp"
#include "qdsim/magnus.hpp"

namespace py = pybind11;
using namespace qdsim;

namespace {

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kCapacity: return "capacity";
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kNumerical: return "numerical";
    case ErrorKind::kDegenerateSignal: return "degenerate_signal";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

JumpOperatorSet jumps_for(int n_dots, std::optional<double> t1, std::optional<double> t2,
                          const std::string& encoding) {
  if (!t1 && !t2) return {};
  return make_jump_operators(t1, t2,
                             logical_lowering(reference_pair(n_dots, parse_encoding_variant(encoding))));
}

}  // namespace

PYBIND11_MODULE(qdsim, m) {
  m.doc() = "Lindblad simulation and pulse calibration for Hubbard quantum-dot chains";

  static py::handle error = py::exception<Error>(m, "Error").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error(e.what());
      exc.attr("kind") = kind_name(e.kind());
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  py::enum_<Spin>(m, "Spin").value("UP", Spin::kUp).value("DOWN", Spin::kDown);

  m.def("hilbert_dimension", &hilbert_dimension, py::arg("n_dots"));
  m.def("creation_operator", &creation_operator, py::arg("dot"), py::arg("spin"), py::arg("n_dots"));
  m.def("annihilation_operator", &annihilation_operator, py::arg("dot"), py::arg("spin"), py::arg("n_dots"));
  m.def("number_operator", &number_operator, py::arg("dot"), py::arg("n_dots"));
  m.def("hopping_operator", &hopping_operator, py::arg("bond"), py::arg("n_dots"));

  py::class_<HubbardParams>(m, "HubbardParams")
      .def(py::init([](double u, std::vector<double> mu, double uc) {
             HubbardParams p{u, std::move(mu), uc, 0};
             p.n_dots = static_cast<int>(p.chem_potential.size());
             p.validate();
             return p;
           }),
           py::arg("u_onsite"), py::arg("chem_potential"), py::arg("u_neighbor") = 0.0)
      .def_readonly("u_onsite", &HubbardParams::u_onsite)
      .def_readonly("chem_potential", &HubbardParams::chem_potential)
      .def_readonly("u_neighbor", &HubbardParams::u_neighbor)
      .def_readonly("n_dots", &HubbardParams::n_dots);

  py::class_<DotSystem>(m, "DotSystem")
      .def(py::init<HubbardParams>(), py::arg("params"))
      .def_property_readonly("n_dots", &DotSystem::n_dots)
      .def_property_readonly("n_bonds", &DotSystem::n_bonds)
      .def_property_readonly("dim", &DotSystem::dim)
      .def_property_readonly("static_hamiltonian", &DotSystem::static_hamiltonian)
      .def("hamiltonian", [](const DotSystem& s, std::vector<double> t) { return s.hamiltonian(t); },
           py::arg("hoppings"));

  m.def(
      "reference_pair",
      [](int n, const std::string& enc) {
        const LogicalEncoding e = reference_pair(n, parse_encoding_variant(enc));
        return py::make_tuple(e.phi0, e.phi1);
      },
      py::arg("n_dots"), py::arg("encoding") = "as-printed");

  m.def("jump_operators", &jumps_for, py::arg("n_dots"), py::arg("t1") = py::none(),
        py::arg("t2") = py::none(), py::arg("encoding") = "as-printed");
  m.def("vectorize", &vectorize, py::arg("rho"));
  m.def("unvectorize", &unvectorize, py::arg("v"));
  m.def(
      "lindblad_rhs",
      [](const CMatrix& rho, const CMatrix& h, const JumpOperatorSet& jumps) {
        return lindblad_rhs(rho, h, jumps);
      },
      py::arg("rho"), py::arg("hamiltonian"), py::arg("jumps"));
  m.def(
      "liouvillian",
      [](const CMatrix& h, const JumpOperatorSet& jumps) { return build_liouvillian(h, jumps); },
      py::arg("hamiltonian"), py::arg("jumps"));
  m.def(
      "random_density_matrix",
      [](Eigen::Index dim, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return random_density_matrix(dim, rng);
      },
      py::arg("dim"), py::arg("seed") = 0);
  m.def("uhlmann_fidelity", &uhlmann_fidelity, py::arg("rho"), py::arg("sigma"));

  m.def(
      "propagator",
      [](const DotSystem& sys, const RMatrix& coefficients, double duration, const JumpOperatorSet& jumps,
         int workers, const std::string& strategy) {
        PropagatorOptions o;
        o.workers = workers;
        o.strategy = parse_expansion_strategy(strategy);
        py::gil_scoped_release release;
        return build_superpropagator(PulseSchedule(coefficients, duration), sys, jumps, o).entries;
      },
      py::arg("system"), py::arg("coefficients"), py::arg("duration"),
      py::arg("jumps") = JumpOperatorSet{}, py::arg("workers") = 1, py::arg("strategy") = "sectors",
      "Full D^2 x D^2 superpropagator for a piecewise-constant schedule (rows are slices).");
  m.def(
      "apply_propagator",
      [](const CMatrix& u, const CMatrix& rho) { return apply_propagator(u, rho); }, py::arg("u"),
      py::arg("rho"));
  m.def(
      "reference_evolve",
      [](const CMatrix& rho0, const DotSystem& sys, const RMatrix& coefficients, double duration,
         const JumpOperatorSet& jumps, int steps_per_slice) {
        return reference_evolve(rho0, PulseSchedule(coefficients, duration), sys, jumps, steps_per_slice);
      },
      py::arg("rho0"), py::arg("system"), py::arg("coefficients"), py::arg("duration"),
      py::arg("jumps") = JumpOperatorSet{}, py::arg("steps_per_slice") = 200,
      "Fixed-step RK4 integration of the master equation.");

  m.def("named_gate", &named_gate, py::arg("name"));
  m.def("project_propagator", &project_propagator, py::arg("u"), py::arg("projection"));
  m.def(
      "projection_matrix",
      [](int n, const std::string& enc) {
        return projection_matrix(reference_pair(n, parse_encoding_variant(enc)));
      },
      py::arg("n_dots"), py::arg("encoding") = "as-printed");

  py::class_<CalibrationResult>(m, "CalibrationResult")
      .def_property_readonly("coefficients",
                             [](const CalibrationResult& r) { return r.schedule.coefficients(); })
      .def_readonly("loss_history", &CalibrationResult::loss_history)
      .def_readonly("final_projection", &CalibrationResult::final_projection)
      .def_readonly("best_loss", &CalibrationResult::best_loss)
      .def_readonly("iterations", &CalibrationResult::iterations)
      .def_readonly("converged", &CalibrationResult::converged)
      .def_readonly("stop_reason", &CalibrationResult::stop_reason);

  m.def(
      "calibrate",
      [](const DotSystem& sys, const CMatrix& target, bool is_gate, int n_slices, double duration,
         const JumpOperatorSet& jumps, const std::string& mode, const std::string& encoding, double lr,
         int max_iters, double loss_tol, std::uint64_t seed) {
        const CalibrationTarget t{is_gate ? CalibrationTarget::Kind::kGate : CalibrationTarget::Kind::kProjection,
                                  target};
        const CalibrationObjective objective(make_calibration_problem(
            sys, jumps, parse_encoding_variant(encoding), t, parse_projection_mode(mode), n_slices, duration));
        OptimizerConfig cfg;
        cfg.adam.lr = lr;
        cfg.stopping.max_iters = max_iters;
        cfg.stopping.loss_tol = loss_tol;
        cfg.seed = seed;
        py::gil_scoped_release release;
        return optimize(objective, cfg);
      },
      py::arg("system"), py::arg("target"), py::arg("is_gate") = false, py::arg("n_slices") = 16,
      py::arg("duration") = 1.0, py::arg("jumps") = JumpOperatorSet{}, py::arg("mode") = "paper",
      py::arg("encoding") = "as-printed", py::arg("lr") = 0.01, py::arg("max_iters") = 1000,
      py::arg("loss_tol") = 1e-6, py::arg("seed") = 0);

  py::class_<DampedSinusoidFit>(m, "DampedSinusoidFit")
      .def_readonly("amplitude", &DampedSinusoidFit::amplitude)
      .def_readonly("decay_time", &DampedSinusoidFit::decay_time)
      .def_readonly("angular_frequency", &DampedSinusoidFit::angular_frequency)
      .def_readonly("phase", &DampedSinusoidFit::phase)
      .def_readonly("offset", &DampedSinusoidFit::offset)
      .def_readonly("residual_rms", &DampedSinusoidFit::residual_rms)
      .def_readonly("converged", &DampedSinusoidFit::converged)
      .def("__call__", &DampedSinusoidFit::evaluate, py::arg("t"));

  m.def(
      "fit_damped_sinusoid",
      [](std::vector<double> t, std::vector<double> y) { return fit_damped_sinusoid(t, y); },
      py::arg("times"), py::arg("values"));
  m.def(
      "fit_exponential_decay",
      [](std::vector<double> t, std::vector<double> y) { return fit_exponential_decay(t, y); },
      py::arg("times"), py::arg("values"));
}
