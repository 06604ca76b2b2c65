#include "kerr/classical.hpp"
#include "kerr/commands.hpp"
#include "kerr/dynamics.hpp"
#include "kerr/errors.hpp"
#include "kerr/fock.hpp"
#include "kerr/phasespace.hpp"
#include "kerr/spectral.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

kerr::ModelParams make_model(double xi, kerr::Index dim, double K, double n_eff, const std::string& sign) {
  kerr::ModelParams p;
  p.kerr_K = K;
  p.xi = xi;
  p.n_eff = n_eff;
  p.dim_N = dim;
  p.sign = kerr::sign_convention_from_string(sign);
  p.validate();
  return p;
}

kerr::StateVector as_state(const Eigen::VectorXcd& v) { return kerr::StateVector{v}; }

py::dict evolve_observables(const Eigen::VectorXcd& psi0, const kerr::spectral::SpectralDecomposition& spec,
                            const std::vector<double>& times, bool entropy) {
  using namespace kerr::dynamics;
  const Evolution ev = evolve(as_state(psi0), spec, TimeGrid{times});
  py::dict out;
  out["t"] = times;
  out["survival"] = survival_probability(ev).values;
  out["fotoc"] = fotoc(ev).values;
  if (entropy) out["entropy"] = husimi_entropy_series(ev).values;
  const auto [q, p] = quadrature_means(ev);
  out["q_mean"] = q.values;
  out["p_mean"] = p.values;
  const auto d = conservation_drifts(ev);
  out["max_drift"] = d.max();
  return out;
}

}  // namespace

PYBIND11_MODULE(_kerr_esqpt, m) {
  m.doc() = "Squeeze-driven Kerr oscillator: spectra, phase-space diagnostics and dynamics";

  auto base = py::register_exception<kerr::Error>(m, "KerrError", PyExc_ValueError);
  py::register_exception<kerr::InvalidParams>(m, "InvalidParams", base.ptr());
  py::register_exception<kerr::InvalidTruncation>(m, "InvalidTruncation", base.ptr());
  py::register_exception<kerr::TruncationTooSmall>(m, "TruncationTooSmall", base.ptr());
  py::register_exception<kerr::KerrFreePoint>(m, "KerrFreePoint", base.ptr());
  py::register_exception<kerr::NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<kerr::SingularInput>(m, "SingularInput", base.ptr());
  py::register_exception<kerr::DomainError>(m, "DomainError", base.ptr());
  py::register_exception<kerr::ParityViolation>(m, "ParityViolation", base.ptr());

  py::class_<kerr::ModelParams>(m, "ModelParams")
      .def(py::init(&make_model), "xi"_a, "dim"_a = 64, "K"_a = 1.0, "n_eff"_a = 1.0, "sign"_a = "main_text")
      .def_readonly("kerr_K", &kerr::ModelParams::kerr_K)
      .def_readonly("xi", &kerr::ModelParams::xi)
      .def_readonly("n_eff", &kerr::ModelParams::n_eff)
      .def_readonly("dim", &kerr::ModelParams::dim_N)
      .def_property_readonly("sign", [](const kerr::ModelParams& p) { return std::string(kerr::to_string(p.sign)); })
      .def_property_readonly("epsilon2", &kerr::ModelParams::epsilon2)
      .def("__repr__", [](const kerr::ModelParams& p) {
        return "ModelParams(xi=" + std::to_string(p.xi) + ", dim=" + std::to_string(p.dim_N) + ", K=" +
               std::to_string(p.kerr_K) + ")";
      });

  m.def("hamiltonian", [](const kerr::ModelParams& p) { return kerr::fock::build_hamiltonian(p).entries; },
        "params"_a, "Dense Fock-basis Hamiltonian matrix.");

  using kerr::spectral::SpectralDecomposition;
  py::class_<SpectralDecomposition>(m, "Spectrum")
      .def_property_readonly("params", &SpectralDecomposition::params)
      .def_property_readonly("eigenvalues", &SpectralDecomposition::eigenvalues)
      .def_property_readonly("excitation_energies", &SpectralDecomposition::excitation_energies)
      .def_property_readonly("parity",
                             [](const SpectralDecomposition& s) {
                               std::vector<int> out;
                               for (auto q : s.parity()) out.push_back(q == kerr::spectral::Parity::even ? 1 : -1);
                               return out;
                             })
      .def("reported_energy", &SpectralDecomposition::reported_energy, "k"_a)
      .def("eigenvector", [](const SpectralDecomposition& s, kerr::Index k) { return s.eigenvector(k).amplitudes; },
           "k"_a)
      .def("__len__", &SpectralDecomposition::size);

  m.def("diagonalize", &kerr::spectral::diagonalize, "params"_a);
  m.def(
      "locate_esqpt",
      [](const SpectralDecomposition& s) {
        const auto e = kerr::spectral::locate_esqpt(s);
        return py::dict("target"_a = e.target, "dos_peak"_a = e.E_peak_dos, "pr_dip"_a = e.E_dip_pr,
                        "occupation_dip"_a = e.E_dip_occ, "histogram_peak"_a = e.E_hist_peak_interp,
                        "level_pr_dip"_a = e.level_dip_pr);
      },
      "spectrum"_a);

  m.def(
      "coherent_state",
      [](double q, double p, const kerr::ModelParams& params) {
        return kerr::fock::coherent_state_with_tail(q, p, params).state.amplitudes;
      },
      "q"_a, "p"_a, "params"_a);
  m.def("participation_ratio", [](const Eigen::VectorXcd& v) { return kerr::spectral::participation_ratio(as_state(v)); });
  m.def("husimi_at", [](const Eigen::VectorXcd& v, double q, double p) { return kerr::phasespace::husimi_at(as_state(v), q, p); },
        "state"_a, "q"_a, "p"_a);
  m.def(
      "husimi",
      [](const Eigen::VectorXcd& v, double half_width, kerr::Index samples) {
        return kerr::phasespace::husimi_eval(as_state(v), kerr::phasespace::GridSpec::square(half_width, samples)).values;
      },
      "state"_a, "half_width"_a, "samples"_a = 161, "Q on a square grid; rows follow q, columns p.");
  m.def("m2", [](const Eigen::VectorXcd& v) { return kerr::phasespace::m2_exact(as_state(v)); }, "state"_a);
  m.def("husimi_entropy", [](const Eigen::VectorXcd& v) { return kerr::phasespace::husimi_entropy(as_state(v)); },
        "state"_a);

  m.def(
      "semiclassical_dos",
      [](double E, double K_cl, double xi_cl) { return kerr::classical::semiclassical_dos(E, {K_cl, xi_cl}); }, "E"_a,
      "K_cl"_a = 1.0, "xi_cl"_a);
  m.def(
      "classical_energy",
      [](double q, double p, double K_cl, double xi_cl) { return kerr::classical::h_cl({q, p}, {K_cl, xi_cl}); }, "q"_a,
      "p"_a, "K_cl"_a = 1.0, "xi_cl"_a);
  m.def(
      "stationary_points",
      [](double K_cl, double xi_cl) {
        py::list out;
        for (const auto& s : kerr::classical::stationary_points({K_cl, xi_cl}).points) {
          const char* kind = s.kind == kerr::classical::PointKind::center   ? "center"
                             : s.kind == kerr::classical::PointKind::saddle ? "saddle"
                                                                            : "degenerate";
          out.append(py::dict("q"_a = s.point.q, "p"_a = s.point.p, "energy"_a = s.energy, "kind"_a = kind));
        }
        return out;
      },
      "K_cl"_a = 1.0, "xi_cl"_a);
  m.def(
      "trajectory",
      [](double q, double p, double K_cl, double xi_cl, double t_max, double dt, kerr::Index stride) {
        const auto tr = kerr::classical::integrate_trajectory({q, p}, {K_cl, xi_cl}, t_max, dt, stride);
        std::vector<double> qs, ps;
        for (const auto& x : tr.x) {
          qs.push_back(x.q);
          ps.push_back(x.p);
        }
        return py::dict("t"_a = tr.t, "q"_a = qs, "p"_a = ps, "relative_drift"_a = tr.relative_drift);
      },
      "q"_a, "p"_a, "K_cl"_a = 1.0, "xi_cl"_a, "t_max"_a, "dt"_a, "stride"_a = 1);

  m.def("evolve", &evolve_observables, "state"_a, "spectrum"_a, "times"_a, "entropy"_a = true,
        "Survival probability, FOTOC, Husimi entropy and quadrature means at the given times.");
  m.def(
      "energy_width",
      [](const Eigen::VectorXcd& v, const SpectralDecomposition& s) {
        return kerr::dynamics::energy_distribution(as_state(v), s).width();
      },
      "state"_a, "spectrum"_a);
  m.def(
      "preset_state",
      [](const std::string& id, const kerr::ModelParams& p) {
        return kerr::dynamics::preset_state(kerr::dynamics::preset_from_string(id), p).amplitudes;
      },
      "id"_a, "params"_a);
  m.def("presets", [] {
    py::dict out;
    for (const auto& pr : kerr::dynamics::presets())
      out[py::str(std::string(1, pr.name))] = py::dict("q"_a = pr.q, "p"_a = pr.p, "energy"_a = pr.tabulated_energy);
    return out;
  });

  m.def(
      "map_params",
      [](double g3, double g4, double Omega_d, double omega_d) {
        kerr::MicroscopicParams mp{g3, g4, omega_d, Omega_d};
        const auto r = kerr::fock::microscopic_map(mp);
        return py::dict("K"_a = r.K, "epsilon2"_a = r.epsilon2, "xi"_a = r.xi);
      },
      "g3"_a, "g4"_a, "Omega_d"_a, "omega_d"_a);
}
