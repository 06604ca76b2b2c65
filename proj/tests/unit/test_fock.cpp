#include "doctest.h"
#include "helpers.hpp"

#include "kerr/errors.hpp"
#include "kerr/fock.hpp"

#include <cmath>

using namespace kerr;
using kerr::testing::model;

namespace {

// Poisson tail sum_{n >= dim} e^{-m} m^n / n!, summed term by term.
double poisson_tail(double mean, Index dim) {
  double total = 0.0;
  for (Index n = dim; n < dim + 4000; ++n) {
    const double nd = static_cast<double>(n);
    total += std::exp(-mean + nd * std::log(mean) - std::lgamma(nd + 1.0));
  }
  return total;
}

}  // namespace

TEST_CASE("model parameter validation") {
  CHECK_NOTHROW(model(1.0, 4).validate());
  CHECK_THROWS_AS(model(-1.0, 16).validate(), InvalidParams);
  CHECK_THROWS_AS(model(1.0, 3).validate(), InvalidTruncation);
  ModelParams p = model(1.0, 16);
  p.n_eff = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidParams);
  p = model(2.5, 16, 3.0);
  CHECK(p.epsilon2() == 7.5);
  CHECK_THROWS_AS(fock::build_hamiltonian(model(1.0, 3)), InvalidTruncation);
}

TEST_CASE("hamiltonian matrix elements") {
  const auto H = fock::build_hamiltonian(model(180.0, 16));
  CHECK(H.hermitian);
  CHECK(H.check_hermitian());
  CHECK(H.entries(3, 3).real() == doctest::Approx(6.0));
  CHECK(H.entries(2, 0).real() == doctest::Approx(-180.0 * std::sqrt(2.0)));
  CHECK(H.entries(0, 2).real() == doctest::Approx(-254.558441227).epsilon(1e-10));
  CHECK(std::abs(H.entries(1, 0)) == 0.0);
  CHECK(std::abs(H.entries(4, 0)) == 0.0);

  const auto H0 = fock::build_hamiltonian(model(0.0, 8));
  for (Index n = 0; n < 8; ++n) CHECK(H0.entries(n, n).real() == doctest::Approx(static_cast<double>(n * (n - 1))));
  CHECK((H0.entries - Eigen::MatrixXcd(H0.entries.diagonal().asDiagonal())).norm() == 0.0);
}

TEST_CASE("hamiltonian equals the ladder-operator product form") {
  const ModelParams p = model(3.7, 24, 1.3);
  const auto L = fock::ladder_matrices(p);
  const Eigen::MatrixXcd a = L.a.entries, ad = L.a_dag.entries;
  const Eigen::MatrixXcd oracle = p.kerr_K * (ad * ad * a * a) - p.epsilon2() * (ad * ad + a * a);
  const auto H = fock::build_hamiltonian(p);
  // a^+2 a^2 is exact under truncation; a^+2 + a^2 too.
  CHECK((H.entries - oracle).cwiseAbs().maxCoeff() <= 1e-12 * oracle.cwiseAbs().maxCoeff());

  ModelParams lab = p;
  lab.sign = SignConvention::lab_frame;
  CHECK((fock::build_hamiltonian(lab).entries + H.entries).norm() == 0.0);
}

TEST_CASE("hamiltonian commutes with parity") {
  const auto H = fock::build_hamiltonian(model(12.0, 40));
  const auto P = fock::parity_operator(40);
  CHECK((H.entries * P.entries - P.entries * H.entries).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("ladder operators") {
  const auto L = fock::ladder_matrices(model(0.0, 12));
  CHECK(L.a.entries(1, 2).real() == doctest::Approx(std::sqrt(2.0)));
  CHECK((L.a_dag.entries - L.a.entries.adjoint()).norm() == 0.0);
  CHECK(L.q_op.check_hermitian());
  CHECK(L.p_op.check_hermitian());
  const Eigen::MatrixXcd comm = L.q_op.entries * L.p_op.entries - L.p_op.entries * L.q_op.entries;
  const Eigen::MatrixXcd inner = comm.topLeftCorner(10, 10);
  CHECK((inner - Complex(0.0, 1.0) * Eigen::MatrixXcd::Identity(10, 10)).cwiseAbs().maxCoeff() <= 1e-14);
  const Eigen::MatrixXcd r2 = L.q_op.entries * L.q_op.entries + L.p_op.entries * L.p_op.entries;
  CHECK(r2(0, 0).real() == doctest::Approx(1.0));

  ModelParams p = model(0.0, 12);
  p.n_eff = 4.0;
  const auto L4 = fock::ladder_matrices(p);
  const Eigen::MatrixXcd c4 = L4.q_op.entries * L4.p_op.entries - L4.p_op.entries * L4.q_op.entries;
  CHECK(c4(3, 3).imag() == doctest::Approx(0.25));
}

TEST_CASE("parity split and reassembly") {
  const auto H = fock::build_hamiltonian(model(5.0, 8));
  const auto blocks = fock::parity_split(H);
  CHECK(blocks.even.dim() == 4);
  CHECK(blocks.odd.dim() == 4);
  CHECK(blocks.even_index == std::vector<Index>{0, 2, 4, 6});
  CHECK(blocks.odd_index == std::vector<Index>{1, 3, 5, 7});
  CHECK((blocks.reassemble().entries - H.entries).norm() == 0.0);

  const auto odd_dim = fock::parity_split(fock::build_hamiltonian(model(5.0, 9)));
  CHECK(odd_dim.even.dim() == 5);
  CHECK(odd_dim.odd.dim() == 4);

  OperatorMatrix bad = H;
  bad.entries(1, 0) = 1e-6;
  bad.entries(0, 1) = 1e-6;
  CHECK_THROWS_AS(fock::parity_split(bad), ParityViolation);
}

TEST_CASE("coherent states") {
  const ModelParams p = model(0.0, 900);
  const StateVector vac = fock::coherent_state(0.0, 0.0, p);
  CHECK(vac.amplitudes(0) == Complex(1.0, 0.0));
  CHECK(vac.amplitudes.tail(899).norm() == 0.0);

  const StateVector e = fock::coherent_state(28.1302, 0.0, p);
  CHECK(std::abs(e.norm() - 1.0) <= 1e-10);
  const auto L = fock::ladder_matrices(p);
  const double n_dense = (e.amplitudes.adjoint() * L.n_op.entries * e.amplitudes)(0, 0).real();
  CHECK(n_dense == doctest::Approx(395.65).epsilon(1e-4));
  CHECK(fock::expectation_n(e) == doctest::Approx(28.1302 * 28.1302 / 2.0).epsilon(1e-12));

  // <a> = alpha (n_eff = 1: alpha = (q + ip)/sqrt 2).
  const ModelParams small = model(0.0, 60);
  const StateVector c = fock::coherent_state(1.5, -2.0, small);
  const Complex a_mean = (c.amplitudes.adjoint() * L.a.entries.topLeftCorner(60, 60) * c.amplitudes)(0, 0);
  CHECK(std::abs(a_mean - Complex(1.5, -2.0) / std::sqrt(2.0)) <= 1e-12);
  CHECK(std::abs(fock::expectation_a(c) - a_mean) <= 1e-13);

  // n_eff rescales alpha.
  ModelParams pn = small;
  pn.n_eff = 2.0;
  CHECK(fock::expectation_n(fock::coherent_state(1.0, 0.0, pn)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("coherent tail mass against a Poisson-sum oracle") {
  for (auto [q, dim] : {std::pair{6.0, Index{30}}, std::pair{28.1302, Index{480}}, std::pair{10.0, Index{90}}}) {
    const double mean = q * q / 2.0;
    const double oracle = poisson_tail(mean, dim);
    const double tail = fock::coherent_tail_mass(Complex(q / std::sqrt(2.0), 0.0), dim);
    CHECK(tail == doctest::Approx(oracle).epsilon(1e-8));
  }
  CHECK_THROWS_AS(fock::coherent_state_with_tail(28.1302, 0.0, model(0.0, 450)), TruncationTooSmall);
  const auto ok = fock::coherent_state_with_tail(28.1302, 0.0, model(0.0, 900));
  CHECK(ok.tail_mass < 1e-30);
  const Index rec = fock::recommended_truncation(28.1302, 0.0);
  CHECK_NOTHROW(fock::coherent_state_with_tail(28.1302, 0.0, model(0.0, rec)));
}

TEST_CASE("factorized ground state of the lab-frame hamiltonian") {
  // (H_lab - K xi^2)|sqrt(xi)> = -K (a^+2 - xi)(a^2 - xi)|sqrt(xi)> = 0.
  double previous = 1.0;
  for (Index dim : {Index{60}, Index{90}, Index{140}}) {
    ModelParams p = model(10.0, dim);
    p.sign = SignConvention::lab_frame;
    const double x = std::sqrt(2.0 * p.xi);  // alpha = sqrt(xi) = x / sqrt 2
    const StateVector s = fock::coherent_state(x, 0.0, p);
    const Eigen::VectorXcd r = fock::apply_hamiltonian(p, s.amplitudes) - p.kerr_K * p.xi * p.xi * s.amplitudes;
    const double residual = r.norm() / (p.kerr_K * p.xi * p.xi);
    CHECK(residual <= previous + 1e-13);
    previous = residual;
  }
  CHECK(previous <= 1e-10);
}

TEST_CASE("expectation helpers agree with dense operators") {
  const ModelParams p = model(2.0, 40);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(40);
  for (Index n = 0; n < 30; ++n) v(n) = Complex(std::cos(0.3 * n), std::sin(0.7 * n)) / (1.0 + n);
  v.normalize();
  const StateVector s{v};
  const auto L = fock::ladder_matrices(p);
  const auto H = fock::build_hamiltonian(p);
  auto dense = [&](const Eigen::MatrixXcd& A) { return (v.adjoint() * A * v)(0, 0); };
  CHECK(std::abs(fock::expectation_a(s) - dense(L.a.entries)) <= 1e-13);
  CHECK(std::abs(fock::expectation_a2(s) - dense(L.a.entries * L.a.entries)) <= 1e-13);
  CHECK(fock::expectation_n(s) == doctest::Approx(dense(L.n_op.entries).real()));
  CHECK(fock::expectation_energy(s, p) == doctest::Approx(dense(H.entries).real()).epsilon(1e-13));
  CHECK(fock::expectation_energy_squared(s, p) == doctest::Approx(dense(H.entries * H.entries).real()).epsilon(1e-13));
  CHECK(fock::expectation_parity(s) == doctest::Approx(dense(fock::parity_operator(40).entries).real()));
  CHECK((fock::apply_hamiltonian(p, v) - H.entries * v).norm() <= 1e-12);
}

TEST_CASE("microscopic parameter map") {
  MicroscopicParams mp;
  mp.g3 = 0.0;
  mp.g4 = -2.0 / 3.0;
  mp.omega_d = 5.0;
  mp.Omega_d = 3.0;
  auto m = fock::microscopic_map(mp);
  CHECK(m.K == doctest::Approx(1.0));
  CHECK(m.epsilon2 == 0.0);
  CHECK(m.xi == 0.0);

  mp.g3 = 0.2;
  mp.Omega_d = 0.0;
  CHECK(fock::microscopic_map(mp).xi == 0.0);

  mp.Omega_d = 1.0;
  const double xi1 = fock::microscopic_map(mp).xi;
  mp.Omega_d = 2.5;
  const auto m2 = fock::microscopic_map(mp);
  CHECK(m2.xi == doctest::Approx(2.5 * xi1));
  CHECK(m2.K == doctest::Approx(1.0 + 20.0 * 0.04 / 15.0));
  CHECK(m2.epsilon2 == doctest::Approx(4.0 * 0.2 * 2.5 / 15.0));

  MicroscopicParams free;
  free.g3 = 0.0;
  free.g4 = 0.0;
  CHECK_THROWS_AS(fock::microscopic_map(free), KerrFreePoint);
  free.g4 = 1.0;
  free.omega_d = 0.0;
  CHECK_THROWS_AS(fock::microscopic_map(free), InvalidParams);

  CHECK(fock::display_frequency(2.0 * M_PI * 0.32) == doctest::Approx(0.32));
}

TEST_CASE("truncation checks") {
  CHECK(fock::truncation_increment(800) == 100);
  CHECK(fock::truncation_increment(100) == 32);

  const auto flat = fock::truncation_check_spectrum(model(0.0, 64), 40);
  CHECK(flat.converged);
  CHECK(flat.max_drift <= 1e-12);

  const auto deep = fock::truncation_check_spectrum(model(180.0, 800), 200);
  CHECK(deep.converged);
  CHECK(deep.max_drift < 1e-8);

  CHECK_FALSE(fock::truncation_check_spectrum(model(50.0, 40), 10).converged);

  CHECK_FALSE(fock::truncation_check_coherent(model(0.0, 500), 28.13, 0.0).converged);
  CHECK(fock::truncation_check_coherent(model(0.0, 900), 28.13, 0.0).converged);
}
