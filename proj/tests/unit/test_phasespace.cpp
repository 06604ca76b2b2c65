#include "doctest.h"
#include "helpers.hpp"

#include "kerr/errors.hpp"
#include "kerr/fock.hpp"
#include "kerr/phasespace.hpp"

#include <cmath>
#include <random>

using namespace kerr;
using namespace kerr::phasespace;
using kerr::testing::model;

namespace {

double fock_m2(int n) {
  // (1/pi) int |<alpha|n>|^4 = (2n)! / (n!^2 2^{2n+1})
  return std::exp(std::lgamma(2.0 * n + 1) - 2.0 * std::lgamma(n + 1.0)) / std::pow(2.0, 2 * n + 1);
}

StateVector random_state(Index dim, Index support, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  for (Index n = 0; n < support; ++n) v(n) = Complex(g(rng), g(rng));
  v.normalize();
  return StateVector{v};
}

}  // namespace

TEST_CASE("husimi of Fock and coherent states") {
  const ModelParams p = model(0.0, 80);
  CHECK(husimi_at(StateVector::fock(80, 0), 0.0, 0.0) == doctest::Approx(1.0 / (2.0 * M_PI)));
  for (int n : {0, 1, 5}) {
    const StateVector f = StateVector::fock(80, n);
    for (auto [q, pp] : {std::pair{0.7, -1.1}, std::pair{3.0, 2.0}}) {
      const double u = (q * q + pp * pp) / 2.0;
      const double oracle = std::exp(-u + n * std::log(u) - std::lgamma(n + 1.0)) / (2.0 * M_PI);
      CHECK(husimi_at(f, q, pp) == doctest::Approx(oracle).epsilon(1e-12));
    }
  }
  const StateVector c = fock::coherent_state(2.0, -1.0, p);
  for (auto [q, pp] : {std::pair{2.0, -1.0}, std::pair{0.5, 0.5}, std::pair{-1.0, 3.0}}) {
    const double d2 = (q - 2.0) * (q - 2.0) + (pp + 1.0) * (pp + 1.0);
    CHECK(husimi_at(c, q, pp) == doctest::Approx(std::exp(-d2 / 2.0) / (2.0 * M_PI)).epsilon(1e-10));
  }
}

TEST_CASE("husimi grids") {
  const StateVector c = fock::coherent_state(3.0, 1.0, model(0.0, 80));
  const auto g = husimi_eval(c, GridSpec::square(10.0, 161));
  CHECK(g.riemann_mass == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(g.tail_outside <= 1e-10);
  CHECK_FALSE(g.coarse);
  const auto [q, p] = g.argmax();
  CHECK(q == doctest::Approx(3.0));
  CHECK(p == doctest::Approx(1.0));
  CHECK(g.values(40, 100) == doctest::Approx(husimi_at(c, g.spec.q(40), g.spec.p(100))));

  const auto coarse = husimi_eval(c, GridSpec::square(10.0, 11));
  CHECK(coarse.coarse);
  CHECK_THROWS_AS(GridSpec::square(1.0, 1).validate(), InvalidParams);
  CHECK_THROWS_AS((GridSpec{1.0, -1.0, -1.0, 1.0, 10, 10}.validate()), InvalidParams);
}

TEST_CASE("husimi of eigenstates is parity symmetric") {
  const auto spec = spectral::diagonalize(model(8.0, 100));
  for (Index k : {Index{0}, Index{3}, Index{10}}) {
    const StateVector v = spec.eigenvector(k);
    for (auto [q, p] : {std::pair{1.0, 0.3}, std::pair{-2.5, 1.7}})
      CHECK(husimi_at(v, q, p) == doctest::Approx(husimi_at(v, -q, -p)).epsilon(1e-10));
  }
}

TEST_CASE("second moment closed form") {
  for (int n : {0, 1, 2, 7}) CHECK(m2_exact(StateVector::fock(40, n)) == doctest::Approx(fock_m2(n)).epsilon(1e-12));
  CHECK(m2_exact(StateVector::fock(40, 1)) == doctest::Approx(0.25));
  for (auto [q, p] : {std::pair{0.0, 0.0}, std::pair{4.0, -3.0}, std::pair{28.1302, 0.0}}) {
    const StateVector c = fock::coherent_state(q, p, model(0.0, 900));
    CHECK(m2_exact(c) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(husimi_entropy(c) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  }
  // Well-separated even cat: two half-weight lobes.
  const ModelParams p = model(0.0, 200);
  Eigen::VectorXcd cat = fock::coherent_state(12.0, 0.0, p).amplitudes + fock::coherent_state(-12.0, 0.0, p).amplitudes;
  CHECK(m2_exact(StateVector{cat.normalized()}) == doctest::Approx(0.25).epsilon(1e-8));
  CHECK(husimi_entropy(StateVector{cat}) == doctest::Approx(std::log(4.0)).epsilon(1e-8));
  CHECK_THROWS_AS(m2_exact(StateVector{Eigen::VectorXcd::Zero(8)}), DomainError);
}

TEST_CASE("second moment: closed form against quadrature") {
  for (unsigned seed : {1u, 2u, 3u}) {
    const StateVector s = random_state(40, 12, seed);
    const double exact = m2_exact(s);
    CHECK(exact <= 0.5 + 1e-12);
    CHECK(exact > 0.0);
    CHECK(m2_quadrature(s, GridSpec::square(12.0, 121)) == doctest::Approx(exact).epsilon(1e-8));
  }
  const auto spec = spectral::diagonalize(model(10.0, 120));
  const StateVector v = spec.eigenvector(20);
  CHECK(m2_quadrature(v, default_grid(v, 10.0, 161)) == doctest::Approx(m2_exact(v)).epsilon(1e-8));

  const StateVector s = random_state(40, 12, 7);
  CHECK_THROWS_AS(m2_quadrature(s, GridSpec::square(12.0, 41)), DomainError);
  CHECK_THROWS_AS(m2_quadrature(s, GridSpec::square(2.0, 41)), DomainError);
}

TEST_CASE("default grid extent") {
  const StateVector vac = StateVector::fock(10, 0);
  CHECK(default_grid(vac, 0.0).q_max == doctest::Approx(6.0));
  CHECK(default_grid(vac, 180.0).q_max == doctest::Approx(4.0 * std::sqrt(180.0)));
  const StateVector e = fock::coherent_state(28.1302, 0.0, model(0.0, 900));
  CHECK(default_grid(e, 1.0, 64).q_max == doctest::Approx(4.0 * std::sqrt(28.1302 * 28.1302 / 2.0)));
  CHECK(default_grid(e, 1.0, 64).nq == 64);
}

TEST_CASE("critical eigenstate concentrates at the saddle") {
  const auto& spec = kerr::testing::spectrum_180();
  const auto est = spectral::locate_esqpt(spec);
  const StateVector v = spec.eigenvector(est.level_dip_pr);
  const auto g = husimi_eval(v, GridSpec::square(40.0, 161));
  const auto [q, p] = g.argmax();
  CHECK(std::hypot(q, p) <= 3.0);
  CHECK(g.riemann_mass == doctest::Approx(1.0).epsilon(1e-6));
}
