#include "kerr/dynamics.hpp"

#include "kerr/errors.hpp"
#include "kerr/fock.hpp"
#include "kerr/phasespace.hpp"

#include <algorithm>
#include <cmath>

namespace kerr::dynamics {

using spectral::Parity;
using spectral::SpectralDecomposition;

void TimeGrid::validate() const {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || times[i] < 0.0) throw InvalidParams("time grid must be finite and nonnegative");
    if (i > 0 && !(times[i] > times[i - 1])) throw InvalidParams("time grid must be strictly increasing");
  }
}

TimeGrid TimeGrid::uniform(double t0, double t1, std::size_t count) {
  if (count < 2 || !(t1 > t0)) throw InvalidParams("uniform grid needs count >= 2 and t1 > t0");
  TimeGrid g;
  g.times.resize(count);
  const double h = (t1 - t0) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) g.times[i] = t0 + h * static_cast<double>(i);
  g.times.back() = t1;
  return g;
}

TimeGrid TimeGrid::logarithmic(double t0, double t1, std::size_t count) {
  if (count < 2 || !(t0 > 0.0) || !(t1 > t0)) throw InvalidParams("log grid needs 0 < t0 < t1 and count >= 2");
  TimeGrid g;
  g.times.resize(count);
  const double ratio = std::log(t1 / t0);
  for (std::size_t i = 0; i < count; ++i)
    g.times[i] = t0 * std::exp(ratio * static_cast<double>(i) / static_cast<double>(count - 1));
  g.times.back() = t1;
  return g;
}

TimeGrid TimeGrid::merge(const TimeGrid& a, const TimeGrid& b) {
  std::vector<double> all = a.times;
  all.insert(all.end(), b.times.begin(), b.times.end());
  std::sort(all.begin(), all.end());
  TimeGrid g;
  for (double t : all)
    if (g.times.empty() || t - g.times.back() > 1e-15 * std::max(1.0, std::abs(t))) g.times.push_back(t);
  return g;
}

TimeGrid TimeGrid::default_grid(double kerr_K) {
  TimeGrid g = merge(uniform(0.0, 0.15 / kerr_K, 2000), logarithmic(1e-5 / kerr_K, 1e-3 / kerr_K, 200));
  return g;
}

EnergyDistribution energy_distribution(const StateVector& psi0, const SpectralDecomposition& spec,
                                       double completeness_tol) {
  const Eigen::VectorXcd c = spec.expand(psi0);
  EnergyDistribution d;
  d.weights = c.cwiseAbs2();
  d.completeness = d.weights.sum();
  if (d.completeness < 1.0 - completeness_tol)
    throw TruncationTooSmall("eigen-expansion completeness " + std::to_string(d.completeness) + " below 1 - " +
                             std::to_string(completeness_tol));
  d.weights /= d.completeness;
  d.energies = spec.params().sign_factor() * spec.eigenvalues();
  d.mean = d.weights.dot(d.energies);
  d.variance = d.weights.dot((d.energies.array() - d.mean).square().matrix());
  return d;
}

Evolution::Evolution(const SpectralDecomposition& spec, Eigen::VectorXcd coefficients, TimeGrid grid,
                     Eigen::MatrixXcd states)
    : spec_(&spec), coeffs_(std::move(coefficients)), grid_(std::move(grid)), states_(std::move(states)) {}

StateVector Evolution::state(std::size_t i) const {
  return StateVector{states_.col(static_cast<Index>(i))};
}

StateVector Evolution::initial() const { return StateVector{spec_->synthesize(coeffs_)}; }

Evolution evolve(const StateVector& psi0, const SpectralDecomposition& spec, const TimeGrid& grid,
                 double completeness_tol) {
  grid.validate();
  if (grid.size() == 0) throw InvalidParams("empty time grid");
  const Eigen::VectorXcd c = spec.expand(psi0);
  const double completeness = c.squaredNorm();
  if (completeness < (1.0 - completeness_tol) * psi0.amplitudes.squaredNorm())
    throw TruncationTooSmall("eigen-expansion completeness " + std::to_string(completeness) + " below tolerance");

  const double sigma = spec.params().sign_factor();
  const auto T = static_cast<Index>(grid.size());
  Eigen::MatrixXcd states = Eigen::MatrixXcd::Zero(spec.params().dim_N, T);

  // Per parity block: psi_block(t) = V (c o e^{-i sigma E t}); V is real, so the
  // real and imaginary parts go through two real GEMMs.
  for (Parity par : {Parity::even, Parity::odd}) {
    const Eigen::MatrixXd& V = spec.block_vectors(par);
    const Index nb = V.cols();
    if (nb == 0) continue;
    Eigen::MatrixXd re(nb, T), im(nb, T);
    for (Index k : spec.sector_levels(par)) {
      const Index col = spec.block_column(k);
      const double e = spec.eigenvalues()(k);
      for (Index j = 0; j < T; ++j) {
        const Complex v = c(k) * std::polar(1.0, -sigma * e * grid.times[static_cast<std::size_t>(j)]);
        re(col, j) = v.real();
        im(col, j) = v.imag();
      }
    }
    const Eigen::MatrixXd pr = V * re;
    const Eigen::MatrixXd pi = V * im;
    const Index offset = par == Parity::even ? 0 : 1;
    for (Index r = 0; r < V.rows(); ++r)
      for (Index j = 0; j < T; ++j) states(2 * r + offset, j) = Complex(pr(r, j), pi(r, j));
  }
  return Evolution(spec, c, grid, std::move(states));
}

TimeSeries survival_probability(const Evolution& ev) {
  const SpectralDecomposition& spec = ev.spectrum();
  const Eigen::VectorXd w = ev.coefficients().cwiseAbs2();
  const double sigma = spec.params().sign_factor();
  TimeSeries s{ev.grid(), {}, "survival_probability"};
  s.values.reserve(ev.grid().size());
  for (double t : ev.grid().times) {
    Complex acc = 0.0;
    for (Index k = 0; k < w.size(); ++k) acc += w(k) * std::polar(1.0, -sigma * spec.eigenvalues()(k) * t);
    s.values.push_back(std::norm(acc));
  }
  return s;
}

TimeSeries survival_probability_direct(const Evolution& ev) {
  const Eigen::VectorXcd psi0 = ev.initial().amplitudes;
  TimeSeries s{ev.grid(), {}, "survival_probability_direct"};
  for (Index j = 0; j < ev.states().cols(); ++j) s.values.push_back(std::norm(psi0.dot(ev.states().col(j))));
  return s;
}

double fotoc_value(const StateVector& s, double n_eff) {
  const double n = fock::expectation_n(s);
  const Complex a = fock::expectation_a(s);
  // sigma_q^2 + sigma_p^2 = (2<n> + 1 - 2|<a>|^2) / n_eff; the a^2 terms cancel.
  return (2.0 * n + s.amplitudes.squaredNorm() - 2.0 * std::norm(a)) / n_eff;
}

TimeSeries fotoc(const Evolution& ev) {
  const double n_eff = ev.spectrum().params().n_eff;
  TimeSeries s{ev.grid(), {}, "fotoc"};
  for (std::size_t j = 0; j < ev.grid().size(); ++j) s.values.push_back(fotoc_value(ev.state(j), n_eff));
  return s;
}

TimeSeries husimi_entropy_series(const Evolution& ev) {
  TimeSeries s{ev.grid(), {}, "husimi_entropy"};
  for (std::size_t j = 0; j < ev.grid().size(); ++j) s.values.push_back(phasespace::husimi_entropy(ev.state(j)));
  return s;
}

std::pair<TimeSeries, TimeSeries> quadrature_means(const Evolution& ev) {
  const double scale = std::sqrt(2.0 / ev.spectrum().params().n_eff);
  TimeSeries q{ev.grid(), {}, "q_mean"}, p{ev.grid(), {}, "p_mean"};
  for (std::size_t j = 0; j < ev.grid().size(); ++j) {
    const Complex a = fock::expectation_a(ev.state(j));
    q.values.push_back(scale * a.real());
    p.values.push_back(scale * a.imag());
  }
  return {q, p};
}

double ConservationReport::max() const { return std::max({norm_drift, energy_drift, energy2_drift, parity_drift}); }

ConservationReport conservation_drifts(const Evolution& ev) {
  const ModelParams& params = ev.spectrum().params();
  const double escale = std::abs(params.kerr_K) * std::max(1.0, params.xi * params.xi);
  ConservationReport r;
  double n0 = 0, e0 = 0, h0 = 0, p0 = 0;
  for (std::size_t j = 0; j < ev.grid().size(); ++j) {
    const StateVector s = ev.state(j);
    const double n = s.norm();
    const double e = fock::expectation_energy(s, params);
    const double h2 = fock::expectation_energy_squared(s, params);
    const double par = fock::expectation_parity(s);
    if (j == 0) {
      n0 = n, e0 = e, h0 = h2, p0 = par;
      continue;
    }
    r.norm_drift = std::max(r.norm_drift, std::abs(n - n0) / std::max(std::abs(n0), 1.0));
    r.energy_drift = std::max(r.energy_drift, std::abs(e - e0) / std::max(std::abs(e0), escale));
    r.energy2_drift = std::max(r.energy2_drift, std::abs(h2 - h0) / std::max(std::abs(h0), escale * escale));
    r.parity_drift = std::max(r.parity_drift, std::abs(par - p0) / std::max(std::abs(p0), 1.0));
  }
  return r;
}

double short_time_window(ShortTimeLaw law, double xi, double kerr_K) {
  if (xi <= 0.0) return std::numeric_limits<double>::infinity();
  const double k = law == ShortTimeLaw::survival ? std::sqrt(2.0) : std::sqrt(8.0);
  return 0.1 / (k * xi * std::abs(kerr_K));
}

double short_time_closed_form(ShortTimeLaw law, double xi, double kerr_K) {
  const double base = xi * xi * kerr_K * kerr_K;
  return law == ShortTimeLaw::survival ? 2.0 * base : 8.0 * base;
}

ShortTimeFit short_time_coefficients(const TimeSeries& series, ShortTimeLaw law, double xi, double kerr_K,
                                     double expected) {
  const auto& t = series.grid.times;
  if (t.empty() || series.values.size() != t.size()) throw InvalidParams("malformed time series");
  double y0 = 1.0;
  if (law == ShortTimeLaw::fotoc) {
    if (t.front() != 0.0) throw NumericalError("FOTOC short-time fit needs the t = 0 sample");
    y0 = series.values.front();
  }
  ShortTimeFit f;
  f.window = short_time_window(law, xi, kerr_K);
  f.expected = expected;
  std::vector<double> tw, dy;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] <= 0.0 || t[i] > f.window) continue;
    tw.push_back(t[i]);
    dy.push_back(law == ShortTimeLaw::survival ? y0 - series.values[i] : series.values[i] - y0);
  }
  f.points = tw.size();
  if (f.points < 20)
    throw NumericalError("short-time window holds " + std::to_string(f.points) + " samples; need >= 20");
  f.coefficient = fit_quadratic_coefficient(tw, dy);
  if (expected != 0.0) {
    f.relative_deviation = std::abs(f.coefficient - expected) / std::abs(expected);
    for (std::size_t i = 0; i < tw.size(); ++i) {
      const double law_val = expected * tw[i] * tw[i];
      f.max_pointwise_deviation = std::max(f.max_pointwise_deviation, std::abs(dy[i] - law_val) / std::abs(law_val));
    }
  } else {
    f.relative_deviation = std::abs(f.coefficient);
  }
  return f;
}

double ehrenfest_formula(double xi, double kerr_K) {
  if (!(xi > 0.0)) throw DomainError("Ehrenfest formula needs xi > 0");
  return (-0.0027 + std::log(xi) / (2.0 * xi)) / kerr_K;
}

double ehrenfest_time(const TimeSeries& series) {
  const auto& v = series.values;
  if (v.size() < 3) throw NumericalError("series too short for a maximum");
  const double gmax = *std::max_element(v.begin(), v.end());
  for (std::size_t i = 1; i + 1 < v.size(); ++i)
    if (v[i] >= v[i - 1] && v[i] >= v[i + 1] && v[i] >= 0.9 * gmax) return series.grid.times[i];
  throw NumericalError("no interior FOTOC maximum in the sampled window");
}

std::pair<double, double> lyapunov_window(double xi, double kerr_K) {
  const double tau = 1.0 / (std::sqrt(8.0) * xi * kerr_K);
  return {2.0 * tau, 0.8 * ehrenfest_formula(xi, kerr_K)};
}

LinearFit growth_fit(const TimeSeries& series, double t1, double t2, bool log_values) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    const double t = series.grid.times[i];
    if (t < t1 || t > t2) continue;
    const double v = series.values[i];
    if (log_values && !(v > 0.0)) throw NumericalError("log fit of a nonpositive value");
    x.push_back(t);
    y.push_back(log_values ? std::log(v) : v);
  }
  return fit_line(x, y);
}

double long_time_average(const TimeSeries& series, double t1, double t2, double min_span) {
  if (t2 - t1 < min_span) throw DomainError("averaging window shorter than the required span");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    const double t = series.grid.times[i];
    if (t >= t1 && t <= t2) {
      sum += series.values[i];
      ++n;
    }
  }
  if (n == 0) throw DomainError("averaging window holds no samples");
  return sum / static_cast<double>(n);
}

double characteristic_span(double xi, double kerr_K) { return 50.0 / (kerr_K * xi); }

const std::vector<Preset>& presets() {
  // C sits on the p axis: the tabulated q axis placement would put it inside
  // the separatrix lobe, opposite in energy to B.
  static const std::vector<Preset> table = {
      {PresetId::O, 'O', 0.0, 0.0, 0.0},
      {PresetId::A, 'A', 16.9143, 0.0, -3.1034e4},
      {PresetId::B, 'B', 1.2533, 0.0, -0.0282e4},
      {PresetId::C, 'C', 0.0, 1.2506, 0.0282e4},
      {PresetId::D, 'D', 0.0, 8.4443, 1.4106e4},
      {PresetId::E, 'E', 28.1302, 0.0, 1.4106e4},
  };
  return table;
}

PresetId preset_from_string(const std::string& s) {
  if (s.size() == 1)
    for (const auto& p : presets())
      if (p.name == s[0] || p.name == std::toupper(static_cast<unsigned char>(s[0]))) return p.id;
  throw DomainError("unknown preset state id '" + s + "'");
}

const Preset& preset(PresetId id) {
  for (const auto& p : presets())
    if (p.id == id) return p;
  throw DomainError("unknown preset state id");
}

StateVector preset_state(PresetId id, const ModelParams& params) {
  if (std::abs(params.xi - 180.0) > 1e-9)
    throw DomainError("preset states are tabulated for xi = 180; pass explicit (q, p) otherwise");
  const Preset& p = preset(id);
  return fock::coherent_state(p.q, p.p, params);
}

}  // namespace kerr::dynamics
