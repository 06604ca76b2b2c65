#pragma once

#include "kerr/fit.hpp"
#include "kerr/types.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace kerr::spectral {

enum class Parity { even, odd };

/// Sorted spectrum of one Hamiltonian, obtained block by block in the two
/// parity sectors and merged. Eigenvalues are stored in the canonical
/// main_text convention; reported_energy() applies the lab_frame negation.
/// Immutable after construction.
class SpectralDecomposition {
 public:
  SpectralDecomposition(ModelParams params, Eigen::VectorXd even_values, Eigen::MatrixXd even_vectors,
                        Eigen::VectorXd odd_values, Eigen::MatrixXd odd_vectors);

  const ModelParams& params() const { return params_; }
  Index size() const { return eigenvalues_.size(); }

  /// Ascending main_text eigenvalues (units of the model's K, hbar = 1).
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const std::vector<Parity>& parity() const { return parity_; }
  double ground_energy() const { return eigenvalues_(0); }
  /// E'_k = E_k - E_0 >= 0. Identical in both sign conventions.
  Eigen::VectorXd excitation_energies() const;
  /// E_k in the params' sign convention.
  double reported_energy(Index k) const { return params_.sign_factor() * eigenvalues_(k); }

  /// Full Fock-basis eigenvector of merged level k.
  StateVector eigenvector(Index k) const;

  const Eigen::MatrixXd& block_vectors(Parity p) const {
    return p == Parity::even ? even_vectors_ : odd_vectors_;
  }
  const Eigen::VectorXd& block_values(Parity p) const {
    return p == Parity::even ? even_values_ : odd_values_;
  }
  /// Column of merged level k inside its parity block.
  Index block_column(Index k) const { return block_column_[static_cast<std::size_t>(k)]; }
  /// Merged indices of one sector, in ascending energy.
  const std::vector<Index>& sector_levels(Parity p) const {
    return p == Parity::even ? even_levels_ : odd_levels_;
  }

  /// C_k = <E_k|psi>, in merged order.
  Eigen::VectorXcd expand(const StateVector& psi) const;
  /// sum_k c_k |E_k> in the Fock basis.
  Eigen::VectorXcd synthesize(const Eigen::VectorXcd& coeffs) const;

  /// max_k ||H v_k - E_k v_k|| / ||H||.
  double max_relative_residual() const;

 private:
  ModelParams params_;
  Eigen::VectorXd even_values_, odd_values_;
  Eigen::MatrixXd even_vectors_, odd_vectors_;
  Eigen::VectorXd eigenvalues_;
  std::vector<Parity> parity_;
  std::vector<Index> block_column_;
  std::vector<Index> even_levels_, odd_levels_;
};

/// Per-parity dense eigensolve, merged and sorted. Throws NumericalError when
/// a block fails or a residual exceeds 1e-9 ||H||.
SpectralDecomposition diagonalize(const ModelParams& params);

/// Critical excitation energy K xi^2.
double esqpt_energy(const ModelParams& params);

struct KissingSeries {
  Index pair = 0;
  std::vector<double> xi;
  std::vector<double> gap;  // E'(odd k-th) - E'(even k-th)
  std::vector<bool> converged;
  std::vector<bool> below_esqpt;  // even member below K xi^2

  std::vector<double> log_gap() const;
};

/// Gap of the k-th even / k-th odd pair (counted from the ground pair, k = 0)
/// for k < pairs along xi_grid. The template supplies K, n_eff, dim_N.
std::vector<KissingSeries> kissing_gaps(const std::vector<double>& xi_grid, Index pairs,
                                        const ModelParams& params_template,
                                        double convergence_threshold = 1e-8);

/// Least-squares fit of ln(gap) vs xi over converged points with
/// lower*K < gap < upper_factor*K*xi^2.
struct KissingFit {
  LinearFit fit;
  Index points = 0;
};
KissingFit fit_log_gap(const KissingSeries& s, double kerr_K, double lower = 1e-12,
                       double upper_factor = 1e-2);

/// Kissed-pair test: gap < 1e-10 max(K, K xi^2).
bool is_kissed(double gap, const ModelParams& params);

struct DosHistogram {
  std::vector<double> edges;
  std::vector<double> counts;
  std::vector<double> density;  // unit area

  double bin_width() const { return edges[1] - edges[0]; }
  std::size_t bins() const { return counts.size(); }
  double center(std::size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }
  std::size_t peak_bin() const;
  /// Peak position refined by a parabola through the peak bin and its neighbours.
  double peak_interpolated() const;
  double area() const;
};

/// Default comparison window [0, 2 K xi^2] (whole spectrum when xi = 0).
std::pair<double, double> default_dos_range(const SpectralDecomposition& spec);

/// Unit-area histogram of E' over range; bins = 0 selects 2 ceil(sqrt(count)).
/// parity restricts to one sector when set.
DosHistogram dos_histogram(const SpectralDecomposition& spec, Index bins,
                           std::pair<double, double> range,
                           std::optional<Parity> sector = std::nullopt);

/// 1 / sum |C_n|^4 (state normalized first). Throws DomainError on zero vector.
double participation_ratio(const StateVector& state);
/// sum n |C_n|^2.
double occupation_expectation(const StateVector& state);

/// Levels of one parity with E' strictly below the given energy.
Index count_levels_below(const SpectralDecomposition& spec, double e_prime, Parity sector);

struct EsqptEstimates {
  double target = 0.0;          // K xi^2
  double E_peak_dos = 0.0;      // level-spacing density maximum, even sector
  double E_dip_pr = 0.0;        // participation-ratio minimum, even sector
  double E_dip_occ = 0.0;       // <n> minimum, even sector
  double E_hist_peak = 0.0;     // peak bin center of the default histogram
  double E_hist_peak_interp = 0.0;
  Index level_dip_pr = 0;       // merged index of the PR minimum
  double spread = 0.0;          // max - min of the three primary estimates
};

/// Three independent estimates of the critical energy from diagnostics on
/// E' in [0, 2 K xi^2]. Throws DomainError for xi = 0 or unbracketed spectra.
EsqptEstimates locate_esqpt(const SpectralDecomposition& spec);

}  // namespace kerr::spectral
