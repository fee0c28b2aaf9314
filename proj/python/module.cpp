#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "susyscat/errors.hpp"
#include "susyscat/feshbach.hpp"
#include "susyscat/radial.hpp"
#include "susyscat/scattering.hpp"
#include "susyscat/susy.hpp"

namespace py = pybind11;
using namespace susyscat;

namespace {

py::dict phase_dict(const scattering::EigenphaseSet& s) {
  py::dict d;
  d["energy"] = s.energy;
  d["delta1"] = s.delta1;
  d["delta2"] = s.delta2 ? py::cast(*s.delta2) : py::none();
  d["epsilon"] = s.epsilon ? py::cast(*s.epsilon) : py::none();
  return d;
}

radial::Potential model_potential(const feshbach::FeshbachParams& p) {
  return [p](double r) { return feshbach::potential_matrix(p, r); };
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Supersymmetric coupled-channel scattering: Feshbach model, Jost matrices, S-matrix analysis";

  static PyObject* error_type = PyErr_NewException("susyscat._core.SusyscatError", PyExc_RuntimeError, nullptr);
  m.attr("SusyscatError") = py::handle(error_type);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object instance = py::reinterpret_borrow<py::object>(error_type)(e.what());
      instance.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type, instance.ptr());
    }
  });

  py::class_<feshbach::ResonancePole>(m, "ResonancePole")
      .def_readonly("k1", &feshbach::ResonancePole::k1)
      .def_readonly("k2", &feshbach::ResonancePole::k2)
      .def_readonly("energy", &feshbach::ResonancePole::energy)
      .def_property_readonly("resonance_energy", &feshbach::ResonancePole::resonance_energy)
      .def_property_readonly("width", &feshbach::ResonancePole::width)
      .def("__repr__", [](const feshbach::ResonancePole& r) {
        return "ResonancePole(E_R=" + std::to_string(r.resonance_energy()) + ", Gamma=" + std::to_string(r.width()) +
               ")";
      });

  py::class_<feshbach::FeshbachParams>(m, "FeshbachParams")
      .def_static("from_physical", &feshbach::FeshbachParams::from_physical, py::arg("delta"), py::arg("e_r"),
                  py::arg("gamma"))
      .def_static("from_raw", &feshbach::FeshbachParams::from_raw, py::arg("kappa1"), py::arg("kappa2"),
                  py::arg("beta"))
      .def_property_readonly("delta", &feshbach::FeshbachParams::delta)
      .def_property_readonly("resonance_energy", &feshbach::FeshbachParams::resonance_energy)
      .def_property_readonly("width", &feshbach::FeshbachParams::width)
      .def_property_readonly("kappa1", &feshbach::FeshbachParams::kappa1)
      .def_property_readonly("kappa2", &feshbach::FeshbachParams::kappa2)
      .def_property_readonly("beta", &feshbach::FeshbachParams::beta)
      .def_property_readonly("alpha1", &feshbach::FeshbachParams::alpha1)
      .def_property_readonly("alpha2", &feshbach::FeshbachParams::alpha2)
      .def_property_readonly("above_threshold", &feshbach::FeshbachParams::above_threshold)
      .def_property_readonly("decoupled", &feshbach::FeshbachParams::decoupled)
      .def_property_readonly("u0", &feshbach::FeshbachParams::u0)
      .def("__repr__", [](const feshbach::FeshbachParams& p) {
        return "FeshbachParams(kappa1=" + std::to_string(p.kappa1()) + ", kappa2=" + std::to_string(p.kappa2()) +
               ", beta=" + std::to_string(p.beta()) + ")";
      });

  m.def("resonance_zeros", &feshbach::resonance_zeros, py::arg("params"),
        "Closed-form zero of det F in the lower k1 half-plane and its mirror.");
  m.def("potential_matrix", &feshbach::potential_matrix, py::arg("params"), py::arg("r"));
  m.def("superpotential_closed_form", &feshbach::superpotential_closed_form, py::arg("params"), py::arg("r"));
  m.def(
      "jost_matrix",
      [](const feshbach::FeshbachParams& p, double energy) {
        return feshbach::jost_matrix(p, ChannelMomenta::physical(p.channels(), energy));
      },
      py::arg("params"), py::arg("energy"), "Closed-form Jost matrix at a real energy on the physical sheet.");
  m.def("jost_determinant", &feshbach::jost_determinant, py::arg("params"), py::arg("k1"));

  m.def(
      "transformed_potential",
      [](const RealVector& kappa, const RealMatrix& u0, double r) {
        return susy::transformed_potential(susy::TransformSpec::from_kappa(kappa, u0), r);
      },
      py::arg("kappa"), py::arg("u0"), py::arg("r"));
  m.def(
      "superpotential",
      [](const RealVector& kappa, const RealMatrix& u0, double r) {
        return susy::superpotential(susy::TransformSpec::from_kappa(kappa, u0), r);
      },
      py::arg("kappa"), py::arg("u0"), py::arg("r"));

  m.def(
      "s_matrix",
      [](const feshbach::FeshbachParams& p, double energy) { return scattering::feshbach_s_matrix(p, energy).matrix; },
      py::arg("params"), py::arg("energy"), "S-matrix restricted to the open channels.");
  m.def(
      "eigenphases",
      [](const feshbach::FeshbachParams& p, double energy) {
        return phase_dict(scattering::phases(scattering::feshbach_s_matrix(p, energy)));
      },
      py::arg("params"), py::arg("energy"));
  m.def(
      "phase_scan",
      [](const feshbach::FeshbachParams& p, const std::vector<double>& energies) {
        std::vector<scattering::EigenphaseSet> scan;
        scan.reserve(energies.size());
        for (double e : energies) scan.push_back(scattering::phases(scattering::feshbach_s_matrix(p, e)));
        py::list out;
        for (const auto& s : scattering::unwrap_scan(std::move(scan))) out.append(phase_dict(s));
        return out;
      },
      py::arg("params"), py::arg("energies"), "Unwrapped eigenphases over increasing energies.");

  m.def(
      "find_resonance",
      [](const feshbach::FeshbachParams& p, cplx seed) {
        const auto root = scattering::find_detF_zero(
            [&p](cplx k1) { return feshbach::jost_determinant(p, k1); }, seed, p.delta());
        py::dict d;
        d["pole"] = root.pole;
        d["iterations"] = root.iterations;
        d["residual"] = root.residual;
        return d;
      },
      py::arg("params"), py::arg("seed"), "Newton search for a zero of det F from a lower-half-plane seed.");

  m.def(
      "integrate_jost",
      [](const feshbach::FeshbachParams& p, double energy, double r_max, double step) {
        const auto potential = model_potential(p);
        const auto grid = radial::RadialGrid::for_potential(potential, r_max, step);
        radial::IntegrationOptions options;
        options.throw_if_unreliable = false;
        const auto f = radial::integrate_jost_inward(potential, ChannelMomenta::physical(p.channels(), energy), grid,
                                                     options);
        py::dict d;
        d["matrix"] = f.matrix;
        d["estimated_error"] = f.estimated_error;
        d["reliable"] = f.reliable;
        d["step"] = grid.step();
        return d;
      },
      py::arg("params"), py::arg("energy"), py::arg("r_max") = 12.0, py::arg("step") = 1e-3,
      "Jost matrix of the model potential by inward RK4 integration.");
}
