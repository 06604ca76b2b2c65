#include "kerr/phasespace.hpp"

#include "kerr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

namespace kerr::phasespace {

using std::numbers::pi;

void GridSpec::validate() const {
  if (nq < 2 || np < 2) throw InvalidParams("Husimi grid needs >= 2 samples per axis");
  if (!(q_max > q_min) || !(p_max > p_min)) throw InvalidParams("Husimi grid has empty extent");
}

std::pair<double, double> HusimiGrid::argmax() const {
  Index i = 0, j = 0;
  values.maxCoeff(&i, &j);
  return {spec.q(i), spec.p(j)};
}

namespace {

// ln|C_n| - (n ln 2 + ln n!)/2 and the unit phase of C_n, for the nonzero
// amplitudes only; terms of the Husimi sum are assembled from these.
struct LogAmplitudes {
  std::vector<Index> n;
  std::vector<double> log_mag;
  std::vector<Complex> phase;
};

LogAmplitudes log_amplitudes(const StateVector& state) {
  LogAmplitudes la;
  const double ln2 = std::log(2.0);
  for (Index k = 0; k < state.dim(); ++k) {
    const Complex c = state.amplitudes(k);
    const double mag = std::abs(c);
    if (mag == 0.0) continue;
    const double kd = static_cast<double>(k);
    la.n.push_back(k);
    la.log_mag.push_back(std::log(mag) - 0.5 * (kd * ln2 + std::lgamma(kd + 1.0)));
    la.phase.push_back(c / mag);
  }
  return la;
}

double husimi_point(const LogAmplitudes& la, double q, double p) {
  const double r2 = q * q + p * p;
  if (r2 == 0.0) {
    const Complex c0 = (!la.n.empty() && la.n.front() == 0) ? std::exp(la.log_mag.front()) * la.phase.front() : 0.0;
    return std::norm(c0) / (2.0 * pi);
  }
  const Complex z(q, -p);
  const double lz = 0.5 * std::log(r2);
  const Complex u = z / std::sqrt(r2);
  const double shift = -0.25 * r2;
  Complex acc = 0.0;
  Complex upow = 1.0;  // u^at
  Index at = 0;
  for (std::size_t k = 0; k < la.n.size(); ++k) {
    const double nd = static_cast<double>(la.n[k]);
    while (at < la.n[k]) {
      upow *= u;
      ++at;
    }
    const double lm = la.log_mag[k] + nd * lz + shift;
    if (lm < -745.0) continue;
    acc += std::exp(lm) * la.phase[k] * upow;
  }
  return std::norm(acc) / (2.0 * pi);
}

// B(n, m) = sqrt(binom(n+m, n) / 2^(n+m)); shared across calls of equal dim.
class KernelTable {
 public:
  explicit KernelTable(Index dim) : dim_(dim), b_(dim, dim) {
    std::vector<double> lf(static_cast<std::size_t>(2 * dim));
    for (std::size_t k = 0; k < lf.size(); ++k) lf[k] = std::lgamma(static_cast<double>(k) + 1.0);
    const double ln2 = std::log(2.0);
    for (Index n = 0; n < dim; ++n)
      for (Index m = 0; m < dim; ++m) {
        const auto s = static_cast<std::size_t>(n + m);
        b_(n, m) = std::exp(0.5 * (lf[s] - lf[static_cast<std::size_t>(n)] - lf[static_cast<std::size_t>(m)] -
                                   static_cast<double>(s) * ln2));
      }
  }
  Index dim() const { return dim_; }
  double operator()(Index n, Index m) const { return b_(n, m); }

 private:
  Index dim_;
  Eigen::MatrixXd b_;
};

std::shared_ptr<const KernelTable> kernel_for(Index dim) {
  static std::mutex mu;
  static std::shared_ptr<const KernelTable> cached;
  std::lock_guard lock(mu);
  if (!cached || cached->dim() < dim) cached = std::make_shared<const KernelTable>(dim);
  return cached;
}

}  // namespace

double husimi_at(const StateVector& state, double q, double p) {
  return husimi_point(log_amplitudes(state), q, p);
}

HusimiGrid husimi_eval(const StateVector& state, const GridSpec& grid) {
  grid.validate();
  const LogAmplitudes la = log_amplitudes(state);
  HusimiGrid out;
  out.spec = grid;
  out.values.resize(grid.nq, grid.np);
  for (Index i = 0; i < grid.nq; ++i)
    for (Index j = 0; j < grid.np; ++j) out.values(i, j) = husimi_point(la, grid.q(i), grid.p(j));
  out.riemann_mass = out.values.sum() * grid.dq() * grid.dp();
  out.tail_outside = std::max(0.0, 1.0 - out.riemann_mass);
  out.coarse = grid.dq() > 0.5 || grid.dp() > 0.5;
  return out;
}

double m2_exact(const StateVector& state) {
  const Eigen::VectorXcd& c = state.amplitudes;
  const double cmax = c.cwiseAbs().maxCoeff();
  if (cmax == 0.0) throw DomainError("M2 of the zero vector");
  // Drop the negligible tail; its contribution is O(|C|^4) below 1e-36.
  Index d = c.size();
  while (d > 1 && std::abs(c(d - 1)) < 1e-18 * cmax) --d;
  const auto table = kernel_for(d);
  const KernelTable& B = *table;

  double total = 0.0;
  for (Index s = 0; s <= 2 * (d - 1); ++s) {
    const Index lo = std::max<Index>(0, s - (d - 1));
    const Index hi = s / 2;
    Complex acc = 0.0;
    for (Index n = lo; n <= hi; ++n) {
      const Index m = s - n;
      const Complex term = c(n) * c(m) * B(n, m);
      acc += (n == m) ? term : 2.0 * term;
    }
    total += std::norm(acc);
  }
  const double n2 = c.squaredNorm();
  return 0.5 * total / (n2 * n2);
}

double m2_quadrature(const StateVector& state, const GridSpec& grid) {
  grid.validate();
  if (grid.dq() > 0.25 || grid.dp() > 0.25) throw DomainError("grid too coarse for the M2 oracle (need spacing <= 0.25)");
  const HusimiGrid h = husimi_eval(state, grid);
  const double norm2 = state.amplitudes.squaredNorm();
  if (std::abs(h.riemann_mass - norm2) > 1e-8 * norm2)
    throw DomainError("grid misses more than 1e-8 of the Husimi mass");
  return 2.0 * pi * h.values.array().square().sum() * grid.dq() * grid.dp();
}

double husimi_entropy(const StateVector& state) { return -std::log(m2_exact(state)); }

GridSpec default_grid(const StateVector& state, double xi, Index n) {
  double mean_n = 0.0;
  for (Index k = 0; k < state.dim(); ++k) mean_n += static_cast<double>(k) * std::norm(state.amplitudes(k));
  const double half = std::max({4.0 * std::sqrt(std::max(0.0, xi)), 4.0 * std::sqrt(mean_n), 6.0});
  return GridSpec::square(half, n);
}

}  // namespace kerr::phasespace
