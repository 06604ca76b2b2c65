#include "kerr/classical.hpp"

#include "kerr/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kerr::classical {

using std::numbers::pi;

double h_cl(PhasePoint x, const ClassicalParams& cp) {
  const double r2 = x.q * x.q + x.p * x.p;
  return cp.K_cl * (0.25 * r2 * r2 - cp.xi_cl * (x.q * x.q - x.p * x.p));
}

std::array<double, 2> gradient(PhasePoint x, const ClassicalParams& cp) {
  const double r2 = x.q * x.q + x.p * x.p;
  return {cp.K_cl * (x.q * r2 - 2.0 * cp.xi_cl * x.q), cp.K_cl * (x.p * r2 + 2.0 * cp.xi_cl * x.p)};
}

PhasePoint velocity(PhasePoint x, const ClassicalParams& cp) {
  const auto g = gradient(x, cp);
  return {g[1], -g[0]};
}

std::vector<StationaryPoint> StationaryPointSet::centers() const {
  std::vector<StationaryPoint> c;
  for (const auto& s : points)
    if (s.kind != PointKind::saddle) c.push_back(s);
  return c;
}

const StationaryPoint* StationaryPointSet::saddle() const {
  for (const auto& s : points)
    if (s.kind == PointKind::saddle) return &s;
  return nullptr;
}

StationaryPointSet stationary_points(const ClassicalParams& cp) {
  StationaryPointSet set;
  if (cp.xi_cl <= 0.0) {
    set.points.push_back({{0.0, 0.0}, 0.0, PointKind::degenerate});
    return set;
  }
  const double qc = std::sqrt(2.0 * cp.xi_cl);
  const double emin = cp.e_min();
  set.points.push_back({{-qc, 0.0}, emin, PointKind::center});
  set.points.push_back({{0.0, 0.0}, 0.0, PointKind::saddle});
  set.points.push_back({{qc, 0.0}, emin, PointKind::center});
  return set;
}

Linearization linearize(PhasePoint x, const ClassicalParams& cp) {
  const double K = cp.K_cl, xi = cp.xi_cl, q = x.q, p = x.p;
  Linearization lin;
  // d/d(q,p) of (dH/dp, -dH/dq).
  lin.jacobian << 2.0 * K * q * p, K * (2.0 * xi + q * q + 3.0 * p * p),
      K * (2.0 * xi - 3.0 * q * q - p * p), -2.0 * K * q * p;
  // Traceless 2x2: eigenvalues +-sqrt(-det).
  const double det = lin.jacobian.determinant();
  const Complex root = std::sqrt(Complex(-det, 0.0));
  lin.eigenvalues = {root, -root};

  const auto g = gradient(x, cp);
  const double scale = K * std::max(1.0, xi * xi);
  lin.stationary = std::hypot(g[0], g[1]) <= 1e-12 * scale;
  const double tiny = 1e-14 * K * std::max(1.0, xi * xi);
  if (std::abs(det) <= tiny)
    lin.kind = PointKind::degenerate;
  else
    lin.kind = det < 0.0 ? PointKind::saddle : PointKind::center;
  return lin;
}

double lyapunov_origin(const ClassicalParams& cp) { return cp.lambda(); }

PhasePoint saddle_mode_decomposition(PhasePoint pt0, const ClassicalParams& cp, double t) {
  const double lam = cp.lambda();
  const double c1 = 0.5 * (pt0.q + pt0.p);
  const double c2 = 0.5 * (pt0.p - pt0.q);
  const double grow = c1 * std::exp(lam * t);
  const double decay = c2 * std::exp(-lam * t);
  return {grow - decay, grow + decay};
}

std::vector<PhasePoint> separatrix_points(const ClassicalParams& cp, Index samples) {
  if (cp.xi_cl <= 0.0) throw DomainError("no separatrix for xi_cl = 0");
  if (samples < 2) throw InvalidParams("separatrix needs >= 2 samples");
  const Index per_lobe = samples / 2;
  std::vector<PhasePoint> pts;
  pts.reserve(static_cast<std::size_t>(2 * per_lobe));
  for (int lobe = 0; lobe < 2; ++lobe) {
    for (Index j = 0; j < per_lobe; ++j) {
      const double phi = -pi / 4.0 + (static_cast<double>(j) + 0.5) * (pi / 2.0) / static_cast<double>(per_lobe);
      const double r = 2.0 * std::sqrt(cp.xi_cl * std::max(0.0, std::cos(2.0 * phi)));
      const double ang = phi + (lobe == 0 ? 0.0 : pi);
      pts.push_back({r * std::cos(ang), r * std::sin(ang)});
    }
  }
  return pts;
}

std::vector<PhasePoint> contour_points(double E, const ClassicalParams& cp, Index samples) {
  if (samples < 1) throw InvalidParams("contour needs >= 1 sample");
  const double e = E / cp.K_cl;
  const double xi = cp.xi_cl;
  std::vector<PhasePoint> pts;
  for (Index j = 0; j < samples; ++j) {
    const double phi = 2.0 * pi * static_cast<double>(j) / static_cast<double>(samples);
    const double c = std::cos(2.0 * phi);
    // r^4/4 - xi c r^2 - e = 0  =>  r^2 = 2 xi c +- 2 sqrt(xi^2 c^2 + e)
    const double disc = xi * xi * c * c + e;
    if (disc < 0.0) continue;
    const double sq = 2.0 * std::sqrt(disc);
    for (double r2 : {2.0 * xi * c + sq, 2.0 * xi * c - sq}) {
      if (r2 <= 0.0) continue;
      const double r = std::sqrt(r2);
      pts.push_back({r * std::cos(phi), r * std::sin(phi)});
      if (sq == 0.0) break;
    }
  }
  return pts;
}

Trajectory integrate_trajectory(PhasePoint pt0, const ClassicalParams& cp, double t_max, double dt,
                                Index stride, double max_drift) {
  if (!(dt > 0.0) || !(t_max >= 0.0)) throw InvalidParams("need dt > 0 and t_max >= 0");
  if (stride < 1) stride = 1;
  const auto steps = static_cast<Index>(std::ceil(t_max / dt - 1e-9));
  Trajectory tr;
  const double e0 = h_cl(pt0, cp);
  const double scale = std::max({std::abs(e0), cp.K_cl * cp.xi_cl * cp.xi_cl, cp.K_cl});
  auto record = [&](double t, PhasePoint x) {
    tr.t.push_back(t);
    tr.x.push_back(x);
    const double e = h_cl(x, cp);
    tr.energy.push_back(e);
    tr.relative_drift = std::max(tr.relative_drift, std::abs(e - e0) / scale);
  };
  auto axpy = [](PhasePoint a, double h, PhasePoint k) { return PhasePoint{a.q + h * k.q, a.p + h * k.p}; };

  PhasePoint x = pt0;
  record(0.0, x);
  for (Index s = 1; s <= steps; ++s) {
    const double h = (s == steps) ? t_max - dt * static_cast<double>(steps - 1) : dt;
    const PhasePoint k1 = velocity(x, cp);
    const PhasePoint k2 = velocity(axpy(x, 0.5 * h, k1), cp);
    const PhasePoint k3 = velocity(axpy(x, 0.5 * h, k2), cp);
    const PhasePoint k4 = velocity(axpy(x, h, k3), cp);
    x.q += h / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q);
    x.p += h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
    if (s % stride == 0 || s == steps) {
      record(s == steps ? t_max : dt * static_cast<double>(s), x);
    } else {
      const double e = h_cl(x, cp);
      tr.relative_drift = std::max(tr.relative_drift, std::abs(e - e0) / scale);
    }
  }
  if (tr.relative_drift > max_drift)
    throw NumericalError("RK4 energy drift " + std::to_string(tr.relative_drift) +
                         " exceeds tolerance; reduce dt");
  return tr;
}

namespace {

// q-intervals (q >= 0 half for E < 0) where H_cl(q,p) = E has real p, in
// reduced units e = E/K. Roots of q^4 - 4 xi q^2 - 4e = 0 in q^2.
struct LevelSetGeometry {
  double x1;  // lower root in q^2 (negative above the saddle)
  double x2;  // upper root in q^2
};

LevelSetGeometry geometry(double e, double xi) {
  const double r = 2.0 * std::sqrt(std::max(0.0, xi * xi + e));
  return {2.0 * xi - r, 2.0 * xi + r};
}

void check_dos_input(double E, const ClassicalParams& cp) {
  if (!(cp.K_cl > 0.0)) throw InvalidParams("semiclassical DOS needs K_cl > 0");
  if (!std::isfinite(E)) throw InvalidParams("non-finite energy");
  const double scale = cp.K_cl * std::max(1.0, cp.xi_cl * cp.xi_cl);
  if (std::abs(E) <= 1e-14 * scale)
    throw SingularInput("semiclassical DOS evaluated at the hyperbolic energy");
}

}  // namespace

double semiclassical_dos(double E, const ClassicalParams& cp) {
  check_dos_input(E, cp);
  const double K = cp.K_cl, xi = cp.xi_cl;
  const double e = E / K;
  if (e < -xi * xi) return 0.0;
  const auto [x1, x2] = geometry(e, xi);
  const double b = std::sqrt(x2);

  // sum over +-p of 1/|dH/dp| = 1/(sqrt(s) sqrt(D)), D = xi^2 + 2 xi q^2 + e and
  // s = p^2 = (x2 - q^2)(q^2 - x1) / (2 sqrt(D) + 2 xi + q^2).
  // q = m + h sin(theta) absorbs the inverse-square-root turning points.
  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  double total = 0.0;
  if (x1 > 0.0) {
    const double a = std::sqrt(x1);
    const double m = 0.5 * (a + b), h = 0.5 * (b - a);
    auto f = [&](double th) {
      const double q = m + h * std::sin(th);
      const double D = xi * xi + 2.0 * xi * q * q + e;
      const double den = 2.0 * std::sqrt(D) + 2.0 * xi + q * q;
      return std::sqrt(den / ((b + q) * (q + a))) / std::sqrt(D);
    };
    // Two mirror-image intervals +-[a, b].
    total = 2.0 * Quad::integrate(f, -pi / 2.0, pi / 2.0, 20, 1e-13);
  } else {
    auto f = [&](double th) {
      const double q = b * std::sin(th);
      const double D = xi * xi + 2.0 * xi * q * q + e;
      const double den = 2.0 * std::sqrt(D) + 2.0 * xi + q * q;
      return std::sqrt(den / (q * q - x1)) / std::sqrt(D);
    };
    // Peak at theta = 0 sharpens as E -> 0+, so split there.
    total = 2.0 * Quad::integrate(f, 0.0, pi / 2.0, 20, 1e-13);
  }
  return total / (2.0 * pi * K);
}

double semiclassical_dos_reduced(double E, const ClassicalParams& cp) {
  check_dos_input(E, cp);
  const double K = cp.K_cl, xi = cp.xi_cl;
  const double lambda = cp.lambda();
  if (E < cp.e_min()) return 0.0;
  const auto [x1, x2] = geometry(E / K, xi);
  auto integrand = [&](double q) {
    const double u = E - cp.e_min() + lambda * q * q;
    const double s = 2.0 * std::sqrt(K * u) - (lambda + K * q * q);
    if (s <= 0.0 || u <= 0.0) return 0.0;
    return 1.0 / (2.0 * std::sqrt(s * u));
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  double total = 0.0;
  const double b = std::sqrt(x2);
  if (x1 > 0.0) {
    total = 2.0 * ts.integrate(integrand, std::sqrt(x1), b);
  } else {
    total = 2.0 * ts.integrate(integrand, 0.0, b);
  }
  return total / (2.0 * pi);
}

std::vector<double> semiclassical_bin_density(const ClassicalParams& cp, const std::vector<double>& edges) {
  if (edges.size() < 2) throw InvalidParams("need at least one bin");
  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double emin = cp.e_min();
  auto nu = [&](double e_prime) { return semiclassical_dos(emin + e_prime, cp); };
  const double singular = -emin;  // E' of the saddle
  std::vector<double> mass(edges.size() - 1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = std::max(0.0, edges[i]), b = edges[i + 1];
    double m = 0.0;
    if (b > a) {
      if (cp.xi_cl > 0.0 && a < singular && singular < b)
        m = Quad::integrate(nu, a, singular, 12, 1e-8) + Quad::integrate(nu, singular, b, 12, 1e-8);
      else
        m = Quad::integrate(nu, a, b, 12, 1e-8);
    }
    mass[i] = m;
    total += m;
  }
  if (!(total > 0.0)) throw NumericalError("semiclassical density vanishes on the requested range");
  std::vector<double> density(mass.size());
  for (std::size_t i = 0; i < mass.size(); ++i) density[i] = mass[i] / total / (edges[i + 1] - edges[i]);
  return density;
}

DosComparison compare_dos(const std::vector<double>& edges, const std::vector<double>& quantum,
                          const std::vector<double>& semiclassical, double center, double halfwidth) {
  if (quantum.size() + 1 != edges.size() || semiclassical.size() + 1 != edges.size())
    throw InvalidParams("density and edge counts disagree");
  DosComparison c;
  c.excluded.resize(quantum.size());
  for (std::size_t i = 0; i < quantum.size(); ++i) {
    const bool overlap = edges[i] < center + halfwidth && edges[i + 1] > center - halfwidth;
    c.excluded[i] = overlap;
    if (overlap) continue;
    c.l1 += std::abs(quantum[i] - semiclassical[i]) * (edges[i + 1] - edges[i]);
    ++c.bins_used;
  }
  return c;
}

LogSingularityFit log_singularity_fit(const ClassicalParams& cp, double lo, double hi, Index samples) {
  if (!(cp.xi_cl > 0.0)) throw DomainError("no saddle for xi_cl = 0");
  const double scale = cp.K_cl * cp.xi_cl * cp.xi_cl;
  LogSingularityFit out;
  for (int side : {-1, 1}) {
    std::vector<double> x, y;
    for (Index k = 0; k < samples; ++k) {
      const double f = lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(samples - 1));
      x.push_back(std::log(f * scale));
      y.push_back(semiclassical_dos(side * f * scale, cp));
    }
    (side < 0 ? out.below : out.above) = fit_line(x, y);
  }
  return out;
}

}  // namespace kerr::classical
