#pragma once

#include "kerr/types.hpp"

namespace kerr::phasespace {

/// Rectangular sampling of the (q, p) plane, endpoints included.
struct GridSpec {
  double q_min = -6.0, q_max = 6.0;
  double p_min = -6.0, p_max = 6.0;
  Index nq = 512, np = 512;

  double dq() const { return (q_max - q_min) / static_cast<double>(nq - 1); }
  double dp() const { return (p_max - p_min) / static_cast<double>(np - 1); }
  double q(Index i) const { return q_min + dq() * static_cast<double>(i); }
  double p(Index j) const { return p_min + dp() * static_cast<double>(j); }

  static GridSpec square(double half_width, Index n) { return {-half_width, half_width, -half_width, half_width, n, n}; }
  /// Throws InvalidParams for degenerate extents or fewer than 2 samples per axis.
  void validate() const;
};

/// Q(q, p) sampled on a grid; values(i, j) belongs to (q(i), p(j)).
struct HusimiGrid {
  GridSpec spec;
  Eigen::MatrixXd values;
  double riemann_mass = 0.0;   // sum Q dq dp
  double tail_outside = 0.0;   // max(0, 1 - riemann_mass)
  bool coarse = false;         // dq or dp above 0.5

  /// Location of the largest sample.
  std::pair<double, double> argmax() const;
};

/// Q(q,p) = (1/2pi) |sum_n C_n e^{-(q^2+p^2)/4} (q - ip)^n / sqrt(2^n n!)|^2,
/// each term built in the log domain.
double husimi_at(const StateVector& state, double q, double p);
HusimiGrid husimi_eval(const StateVector& state, const GridSpec& grid);

/// Closed-form second moment (1/pi) int |<alpha|psi>|^4 d^2 alpha, contracted
/// over the total index s = n + m in O(dim^2), for the normalized state.
/// Coherent states give 1/2.
double m2_exact(const StateVector& state);

/// Riemann-sum oracle 2pi sum Q^2 dq dp. Throws DomainError unless
/// dq, dp <= 0.25 and the grid holds at least 1 - 1e-8 of the Husimi mass.
double m2_quadrature(const StateVector& state, const GridSpec& grid);

/// S_H2 = -ln m2_exact.
double husimi_entropy(const StateVector& state);

/// Half-width max(4 sqrt(xi), 4 sqrt(<n>), 6) with n x n samples.
GridSpec default_grid(const StateVector& state, double xi, Index n = 512);

}  // namespace kerr::phasespace
