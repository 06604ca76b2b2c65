#include "kerr/spectral.hpp"

#include "kerr/errors.hpp"
#include "kerr/fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace kerr::spectral {

SpectralDecomposition::SpectralDecomposition(ModelParams params, Eigen::VectorXd even_values,
                                             Eigen::MatrixXd even_vectors,
                                             Eigen::VectorXd odd_values,
                                             Eigen::MatrixXd odd_vectors)
    : params_(params),
      even_values_(std::move(even_values)),
      odd_values_(std::move(odd_values)),
      even_vectors_(std::move(even_vectors)),
      odd_vectors_(std::move(odd_vectors)) {
  struct Level {
    double e;
    Parity p;
    Index col;
  };
  std::vector<Level> levels;
  levels.reserve(static_cast<std::size_t>(even_values_.size() + odd_values_.size()));
  for (Index i = 0; i < even_values_.size(); ++i) levels.push_back({even_values_(i), Parity::even, i});
  for (Index i = 0; i < odd_values_.size(); ++i) levels.push_back({odd_values_(i), Parity::odd, i});
  // Even first on exact ties keeps the order deterministic.
  std::stable_sort(levels.begin(), levels.end(),
                   [](const Level& a, const Level& b) { return a.e < b.e; });

  eigenvalues_.resize(static_cast<Index>(levels.size()));
  for (std::size_t k = 0; k < levels.size(); ++k) {
    eigenvalues_(static_cast<Index>(k)) = levels[k].e;
    parity_.push_back(levels[k].p);
    block_column_.push_back(levels[k].col);
    (levels[k].p == Parity::even ? even_levels_ : odd_levels_).push_back(static_cast<Index>(k));
  }
}

Eigen::VectorXd SpectralDecomposition::excitation_energies() const {
  return eigenvalues_.array() - eigenvalues_(0);
}

StateVector SpectralDecomposition::eigenvector(Index k) const {
  StateVector s;
  s.amplitudes = Eigen::VectorXcd::Zero(params_.dim_N);
  const auto ku = static_cast<std::size_t>(k);
  const Eigen::MatrixXd& V = block_vectors(parity_[ku]);
  const Index offset = parity_[ku] == Parity::even ? 0 : 1;
  for (Index r = 0; r < V.rows(); ++r) s.amplitudes(2 * r + offset) = V(r, block_column_[ku]);
  return s;
}

Eigen::VectorXcd SpectralDecomposition::expand(const StateVector& psi) const {
  if (psi.dim() != params_.dim_N) throw InvalidParams("state dimension does not match spectrum");
  const Index ne = even_vectors_.rows();
  const Index no = odd_vectors_.rows();
  Eigen::VectorXcd pe(ne), po(no);
  for (Index r = 0; r < ne; ++r) pe(r) = psi.amplitudes(2 * r);
  for (Index r = 0; r < no; ++r) po(r) = psi.amplitudes(2 * r + 1);
  const Eigen::VectorXcd ce = even_vectors_.transpose().cast<Complex>() * pe;
  const Eigen::VectorXcd co = odd_vectors_.transpose().cast<Complex>() * po;
  Eigen::VectorXcd c(size());
  for (Index k = 0; k < size(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    c(k) = parity_[ku] == Parity::even ? ce(block_column_[ku]) : co(block_column_[ku]);
  }
  return c;
}

Eigen::VectorXcd SpectralDecomposition::synthesize(const Eigen::VectorXcd& coeffs) const {
  Eigen::VectorXcd ce = Eigen::VectorXcd::Zero(even_vectors_.cols());
  Eigen::VectorXcd co = Eigen::VectorXcd::Zero(odd_vectors_.cols());
  for (Index k = 0; k < size(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    (parity_[ku] == Parity::even ? ce : co)(block_column_[ku]) = coeffs(k);
  }
  const Eigen::VectorXcd pe = even_vectors_.cast<Complex>() * ce;
  const Eigen::VectorXcd po = odd_vectors_.cast<Complex>() * co;
  Eigen::VectorXcd psi(params_.dim_N);
  for (Index r = 0; r < pe.size(); ++r) psi(2 * r) = pe(r);
  for (Index r = 0; r < po.size(); ++r) psi(2 * r + 1) = po(r);
  return psi;
}

double SpectralDecomposition::max_relative_residual() const {
  const fock::ParityBlocks blocks =
      fock::parity_split(fock::build_hamiltonian(params_.with_dim(params_.dim_N)));
  // Residuals are evaluated against the canonical matrix the eigenvalues refer to.
  const double sgn = params_.sign_factor();
  const double norm = std::max(std::abs(eigenvalues_(0)), std::abs(eigenvalues_(size() - 1)));
  if (norm == 0.0) return 0.0;
  double worst = 0.0;
  auto check = [&](const Eigen::MatrixXd& Hb, const Eigen::VectorXd& vals, const Eigen::MatrixXd& V) {
    const Eigen::MatrixXd R = sgn * Hb * V - V * vals.asDiagonal();
    for (Index c = 0; c < R.cols(); ++c) worst = std::max(worst, R.col(c).norm() / norm);
  };
  check(blocks.even.entries.real(), even_values_, even_vectors_);
  check(blocks.odd.entries.real(), odd_values_, odd_vectors_);
  return worst;
}

SpectralDecomposition diagonalize(const ModelParams& params) {
  ModelParams canonical = params;
  canonical.sign = SignConvention::main_text;
  const fock::ParityBlocks blocks = fock::parity_split(fock::build_hamiltonian(canonical));

  auto solve = [](const OperatorMatrix& blk, const char* name) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(blk.entries.real());
    if (es.info() != Eigen::Success)
      throw NumericalError(std::string("eigensolver failed on the ") + name + " parity block");
    return es;
  };
  const auto even = solve(blocks.even, "even");
  const auto odd = solve(blocks.odd, "odd");

  SpectralDecomposition spec(params, even.eigenvalues(), even.eigenvectors(), odd.eigenvalues(),
                             odd.eigenvectors());
  const double residual = spec.max_relative_residual();
  if (!(residual <= 1e-9))
    throw NumericalError("eigenpair residual " + std::to_string(residual) + " exceeds 1e-9 ||H||");
  return spec;
}

double esqpt_energy(const ModelParams& params) { return params.kerr_K * params.xi * params.xi; }

std::vector<double> KissingSeries::log_gap() const {
  std::vector<double> out;
  out.reserve(gap.size());
  for (double g : gap) out.push_back(g > 0.0 ? std::log(g) : -std::numeric_limits<double>::infinity());
  return out;
}

std::vector<KissingSeries> kissing_gaps(const std::vector<double>& xi_grid, Index pairs,
                                        const ModelParams& params_template,
                                        double convergence_threshold) {
  if (pairs <= 0) throw InvalidParams("pairs must be positive");
  if (2 * pairs > params_template.dim_N) throw InvalidTruncation("dim_N too small for requested pairs");
  std::vector<KissingSeries> out(static_cast<std::size_t>(pairs));
  for (Index k = 0; k < pairs; ++k) out[static_cast<std::size_t>(k)].pair = k;

  for (double xi : xi_grid) {
    const ModelParams p = params_template.with_xi(xi);
    const SpectralDecomposition spec = diagonalize(p);
    const bool ok = fock::truncation_check_spectrum(p, 2 * pairs, convergence_threshold).converged;
    const double e0 = spec.ground_energy();
    for (Index k = 0; k < pairs; ++k) {
      KissingSeries& s = out[static_cast<std::size_t>(k)];
      const double even = spec.block_values(Parity::even)(k);
      const double odd = spec.block_values(Parity::odd)(k);
      s.xi.push_back(xi);
      s.gap.push_back(odd - even);
      s.converged.push_back(ok);
      s.below_esqpt.push_back(even - e0 < esqpt_energy(p));
    }
  }
  return out;
}

KissingFit fit_log_gap(const KissingSeries& s, double kerr_K, double lower, double upper_factor) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < s.xi.size(); ++i) {
    const double g = s.gap[i];
    if (!s.converged[i]) continue;
    if (g > lower * kerr_K && g < upper_factor * kerr_K * s.xi[i] * s.xi[i]) {
      x.push_back(s.xi[i]);
      y.push_back(std::log(g));
    }
  }
  KissingFit out;
  out.points = static_cast<Index>(x.size());
  if (x.size() >= 3) out.fit = fit_line(x, y);
  return out;
}

bool is_kissed(double gap, const ModelParams& params) {
  return gap < 1e-10 * std::max(params.kerr_K, esqpt_energy(params));
}

std::size_t DosHistogram::peak_bin() const {
  return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

double DosHistogram::peak_interpolated() const {
  const std::size_t j = peak_bin();
  if (j == 0 || j + 1 >= counts.size()) return center(j);
  const double a = counts[j - 1], b = counts[j], c = counts[j + 1];
  const double den = a - 2.0 * b + c;
  if (den == 0.0) return center(j);
  const double delta = std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
  return center(j) + delta * bin_width();
}

double DosHistogram::area() const {
  double a = 0.0;
  for (double d : density) a += d * bin_width();
  return a;
}

std::pair<double, double> default_dos_range(const SpectralDecomposition& spec) {
  const double ec = esqpt_energy(spec.params());
  if (ec > 0.0) return {0.0, 2.0 * ec};
  const Eigen::VectorXd ex = spec.excitation_energies();
  return {0.0, ex(ex.size() - 1)};
}

DosHistogram dos_histogram(const SpectralDecomposition& spec, Index bins,
                           std::pair<double, double> range, std::optional<Parity> sector) {
  const auto [lo, hi] = range;
  if (!(hi > lo)) throw DomainError("empty DOS range");
  const Eigen::VectorXd ex = spec.excitation_energies();
  std::vector<double> inside;
  for (Index k = 0; k < ex.size(); ++k) {
    if (sector && spec.parity()[static_cast<std::size_t>(k)] != *sector) continue;
    if (ex(k) >= lo && ex(k) <= hi) inside.push_back(ex(k));
  }
  if (inside.size() < 2) throw DomainError("fewer than 2 levels in DOS range");
  if (bins <= 0) bins = 2 * static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(inside.size()))));

  DosHistogram h;
  const auto nb = static_cast<std::size_t>(bins);
  const double w = (hi - lo) / static_cast<double>(bins);
  h.edges.resize(nb + 1);
  for (std::size_t i = 0; i <= nb; ++i) h.edges[i] = lo + w * static_cast<double>(i);
  h.edges[nb] = hi;
  h.counts.assign(nb, 0.0);
  for (double e : inside) {
    auto i = static_cast<std::size_t>((e - lo) / w);
    if (i >= nb) i = nb - 1;
    h.counts[i] += 1.0;
  }
  const double total = static_cast<double>(inside.size());
  h.density.resize(nb);
  for (std::size_t i = 0; i < nb; ++i) h.density[i] = h.counts[i] / (total * w);
  return h;
}

double participation_ratio(const StateVector& state) {
  const double n2 = state.amplitudes.squaredNorm();
  if (n2 == 0.0) throw DomainError("participation ratio of the zero vector");
  double s4 = 0.0;
  for (Index n = 0; n < state.dim(); ++n) {
    const double w = std::norm(state.amplitudes(n));
    s4 += w * w;
  }
  return n2 * n2 / s4;
}

double occupation_expectation(const StateVector& state) { return fock::expectation_n(state); }

Index count_levels_below(const SpectralDecomposition& spec, double e_prime, Parity sector) {
  const double e0 = spec.ground_energy();
  Index c = 0;
  for (Index k : spec.sector_levels(sector))
    if (spec.eigenvalues()(k) - e0 < e_prime) ++c;
  return c;
}

EsqptEstimates locate_esqpt(const SpectralDecomposition& spec) {
  const double ec = esqpt_energy(spec.params());
  if (!(ec > 0.0)) throw DomainError("no ESQPT at xi = 0");
  const Eigen::VectorXd ex = spec.excitation_energies();
  if (!(ex(ex.size() - 1) > 2.0 * ec))
    throw DomainError("spectrum does not bracket K xi^2 (raise dim_N)");

  EsqptEstimates est;
  est.target = ec;
  const double hi = 2.0 * ec;

  std::vector<Index> window;
  for (Index k : spec.sector_levels(Parity::even))
    if (ex(k) <= hi) window.push_back(k);
  if (window.size() < 3) throw DomainError("too few even levels below 2 K xi^2");

  double best_spacing = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < window.size(); ++i) {
    const double d = ex(window[i + 1]) - ex(window[i]);
    if (d < best_spacing) {
      best_spacing = d;
      est.E_peak_dos = 0.5 * (ex(window[i + 1]) + ex(window[i]));
    }
  }

  double best_pr = std::numeric_limits<double>::infinity();
  double best_occ = std::numeric_limits<double>::infinity();
  for (Index k : window) {
    const StateVector v = spec.eigenvector(k);
    const double pr = participation_ratio(v);
    const double occ = occupation_expectation(v);
    if (pr < best_pr) {
      best_pr = pr;
      est.E_dip_pr = ex(k);
      est.level_dip_pr = k;
    }
    if (occ < best_occ) {
      best_occ = occ;
      est.E_dip_occ = ex(k);
    }
  }

  const DosHistogram h = dos_histogram(spec, 0, {0.0, hi});
  est.E_hist_peak = h.center(h.peak_bin());
  est.E_hist_peak_interp = h.peak_interpolated();

  const auto [mn, mx] = std::minmax({est.E_peak_dos, est.E_dip_pr, est.E_dip_occ});
  est.spread = mx - mn;
  return est;
}

}  // namespace kerr::spectral
