#pragma once

#include "kerr/fit.hpp"
#include "kerr/types.hpp"

#include <array>
#include <vector>

namespace kerr::classical {

/// Parameters of H_cl = K_cl [ (q^2+p^2)^2 / 4 - xi_cl (q^2 - p^2) ].
struct ClassicalParams {
  double K_cl = 1.0;
  double xi_cl = 0.0;

  /// K_cl = K n_eff^2, xi_cl = xi / n_eff.
  static ClassicalParams from_model(const ModelParams& p) {
    return {p.kerr_K * p.n_eff * p.n_eff, p.xi / p.n_eff};
  }
  double lambda() const { return 2.0 * K_cl * xi_cl; }
  double e_min() const { return -K_cl * xi_cl * xi_cl; }
};

struct PhasePoint {
  double q = 0.0;
  double p = 0.0;
};

double h_cl(PhasePoint x, const ClassicalParams& cp);
/// (dH/dq, dH/dp)
std::array<double, 2> gradient(PhasePoint x, const ClassicalParams& cp);
/// Hamilton's equations: (dH/dp, -dH/dq).
PhasePoint velocity(PhasePoint x, const ClassicalParams& cp);

enum class PointKind { center, saddle, degenerate };

struct StationaryPoint {
  PhasePoint point;
  double energy = 0.0;
  PointKind kind = PointKind::degenerate;
};

struct StationaryPointSet {
  std::vector<StationaryPoint> points;
  std::vector<StationaryPoint> centers() const;
  /// The hyperbolic point when xi_cl > 0.
  const StationaryPoint* saddle() const;
};

/// Centers (+-sqrt(2 xi_cl), 0) at -K_cl xi_cl^2 and the saddle at the origin;
/// xi_cl = 0 yields the single degenerate minimum at the origin.
StationaryPointSet stationary_points(const ClassicalParams& cp);

struct Linearization {
  Eigen::Matrix2d jacobian;
  std::array<Complex, 2> eigenvalues;
  PointKind kind = PointKind::degenerate;
  /// False when the point is not stationary; the matrix is still valid,
  /// the classification is not.
  bool stationary = true;
};

Linearization linearize(PhasePoint x, const ClassicalParams& cp);

/// lambda = 2 K_cl xi_cl.
double lyapunov_origin(const ClassicalParams& cp);

/// Linearized flow from pt0: c1 e^{lambda t}(1,1) + c2 e^{-lambda t}(-1,1).
/// (1,1) is the unstable (repelling) direction, (-1,1) the stable one.
PhasePoint saddle_mode_decomposition(PhasePoint pt0, const ClassicalParams& cp, double t);

/// Samples of the H_cl = 0 lemniscate r^2 = 4 xi_cl cos(2 phi), split evenly
/// over both lobes, with the origin itself excluded.
std::vector<PhasePoint> separatrix_points(const ClassicalParams& cp, Index samples);

/// Level-set samples of H_cl = E on a uniform polar-angle grid (phi = 0 included).
std::vector<PhasePoint> contour_points(double E, const ClassicalParams& cp, Index samples);

struct Trajectory {
  std::vector<double> t;
  std::vector<PhasePoint> x;
  std::vector<double> energy;
  double relative_drift = 0.0;  // max |E(t)-E(0)| / max(|E(0)|, K_cl xi_cl^2, K_cl)
};

/// Fixed-step RK4 on Hamilton's equations. Records every `stride`-th step and
/// the final step. Throws NumericalError when the drift exceeds max_drift.
Trajectory integrate_trajectory(PhasePoint pt0, const ClassicalParams& cp, double t_max,
                                double dt, Index stride = 1, double max_drift = 1e-6);

/// Smooth (Weyl) level density nu(E) = (1/2pi) int delta(H_cl - E) dq dp,
/// evaluated as a level-set line integral over both p-branches. Zero below
/// E_min; throws SingularInput at E = E_hyp (and at E = 0 for xi_cl = 0).
double semiclassical_dos(double E, const ClassicalParams& cp);

/// The one-branch reduced integrand (1/2pi) int dq / (2 sqrt(s u)) with
/// u = E - E_min + lambda q^2, integrated directly in q. Equals
/// semiclassical_dos / 2; kept as an independent cross-check.
double semiclassical_dos_reduced(double E, const ClassicalParams& cp);

/// Unit-area semiclassical density averaged over each bin of E' = E - E_min,
/// normalized over [edges.front(), edges.back()].
std::vector<double> semiclassical_bin_density(const ClassicalParams& cp, const std::vector<double>& edges);

struct DosComparison {
  double l1 = 0.0;  // sum |h_i - s_i| w_i over included bins
  std::size_t bins_used = 0;
  std::vector<bool> excluded;
};

/// L1 distance between two unit-area binned densities on shared edges,
/// skipping bins that overlap (center - halfwidth, center + halfwidth).
DosComparison compare_dos(const std::vector<double>& edges, const std::vector<double>& quantum,
                          const std::vector<double>& semiclassical, double center, double halfwidth);

/// Fits nu against ln|E - E_hyp| on samples log-spaced in
/// |E| in [lo, hi] * K_cl xi_cl^2, separately below and above the saddle.
struct LogSingularityFit {
  LinearFit below;
  LinearFit above;
};
LogSingularityFit log_singularity_fit(const ClassicalParams& cp, double lo = 1e-4, double hi = 1e-2,
                                      Index samples = 24);

}  // namespace kerr::classical
