#pragma once

#include "kerr/fit.hpp"
#include "kerr/spectral.hpp"
#include "kerr/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace kerr::dynamics {

/// Sample times in units of 1/K, strictly increasing, t_0 >= 0.
struct TimeGrid {
  std::vector<double> times;

  std::size_t size() const { return times.size(); }
  /// Throws InvalidParams unless strictly increasing and nonnegative.
  void validate() const;

  static TimeGrid uniform(double t0, double t1, std::size_t count);
  static TimeGrid logarithmic(double t0, double t1, std::size_t count);
  /// Sorted union; points closer than 1e-15 relative collapse to one.
  static TimeGrid merge(const TimeGrid& a, const TimeGrid& b);
  /// 2000 uniform samples on [0, 0.15] plus 200 log-spaced on [1e-5, 1e-3].
  static TimeGrid default_grid(double kerr_K = 1.0);
};

struct TimeSeries {
  TimeGrid grid;
  std::vector<double> values;
  std::string label;
};

struct EnergyDistribution {
  Eigen::VectorXd energies;  // reported convention, merged order
  Eigen::VectorXd weights;   // |C_k|^2
  double mean = 0.0;
  double variance = 0.0;     // sum w_k (E_k - mean)^2
  double completeness = 0.0; // sum w_k before renormalization

  double width() const { return std::sqrt(variance); }
};

/// Throws TruncationTooSmall when sum |C_k|^2 < 1 - completeness_tol.
EnergyDistribution energy_distribution(const StateVector& psi0, const spectral::SpectralDecomposition& spec,
                                       double completeness_tol = 1e-8);

/// Exact propagation |psi(t)> = sum_k C_k e^{-i E_k t} |E_k>, all sample
/// times stored as columns.
class Evolution {
 public:
  Evolution(const spectral::SpectralDecomposition& spec, Eigen::VectorXcd coefficients, TimeGrid grid,
            Eigen::MatrixXcd states);

  const spectral::SpectralDecomposition& spectrum() const { return *spec_; }
  const TimeGrid& grid() const { return grid_; }
  const Eigen::VectorXcd& coefficients() const { return coeffs_; }
  /// Fock-basis states, one column per sample time.
  const Eigen::MatrixXcd& states() const { return states_; }
  StateVector state(std::size_t i) const;
  /// The eigenbasis projection of the initial state (equals psi0 up to the
  /// truncation completeness).
  StateVector initial() const;

 private:
  const spectral::SpectralDecomposition* spec_;
  Eigen::VectorXcd coeffs_;
  TimeGrid grid_;
  Eigen::MatrixXcd states_;
};

/// Throws TruncationTooSmall on completeness failure. The decomposition must
/// outlive the returned Evolution.
Evolution evolve(const StateVector& psi0, const spectral::SpectralDecomposition& spec, const TimeGrid& grid,
                 double completeness_tol = 1e-8);

/// S_p(t) = |sum_k |C_k|^2 e^{-i E_k t}|^2 from the eigen-expansion.
TimeSeries survival_probability(const Evolution& ev);
/// |<psi(0)|psi(t)>|^2 by direct inner products on the evolved states.
TimeSeries survival_probability_direct(const Evolution& ev);

/// sigma_q^2 + sigma_p^2 from O(dim) moments of a, a^2 and n.
TimeSeries fotoc(const Evolution& ev);
double fotoc_value(const StateVector& s, double n_eff = 1.0);

/// S_H2(t) = -ln M2(t) through the closed form.
TimeSeries husimi_entropy_series(const Evolution& ev);

/// <q>(t) and <p>(t).
std::pair<TimeSeries, TimeSeries> quadrature_means(const Evolution& ev);

struct ConservationReport {
  double norm_drift = 0.0;
  double energy_drift = 0.0;
  double energy2_drift = 0.0;
  double parity_drift = 0.0;

  double max() const;
};

/// Relative drifts |x(t) - x(0)| / max(|x(0)|, scale) of norm, <H>, <H^2> and
/// <(-1)^n>. Energy scales are max(K, K xi^2) and its square.
ConservationReport conservation_drifts(const Evolution& ev);

enum class ShortTimeLaw { survival, fotoc };

struct ShortTimeFit {
  double coefficient = 0.0;        // c in |y(t) - y(0)| ~ c t^2
  double expected = 0.0;
  double relative_deviation = 0.0; // |c - expected| / expected
  double max_pointwise_deviation = 0.0;  // max |dy - expected t^2| / (expected t^2)
  double window = 0.0;
  std::size_t points = 0;
};

/// Quadratic-law window: 0.1/(sqrt(2) xi K) for survival, 0.1/(sqrt(8) xi K)
/// for the FOTOC (whole series when xi = 0).
double short_time_window(ShortTimeLaw law, double xi, double kerr_K);

/// Fits 1 - S_p or F - F(0) against t^2 inside the window (0, window].
/// Throws NumericalError with fewer than 20 samples there.
ShortTimeFit short_time_coefficients(const TimeSeries& series, ShortTimeLaw law, double xi, double kerr_K,
                                     double expected);

/// 2 xi^2 K^2 for the survival of the origin state; 8 xi^2 K^2 for its FOTOC.
double short_time_closed_form(ShortTimeLaw law, double xi, double kerr_K);

/// -0.0027 + ln(xi)/(2 xi), divided by K.
double ehrenfest_formula(double xi, double kerr_K);

/// Time of the first interior local maximum reaching 0.9 of the global
/// maximum. Throws NumericalError when none exists.
double ehrenfest_time(const TimeSeries& series);

/// Growth window [2 tau, 0.8 T] with tau = 1/(sqrt(8) xi K).
std::pair<double, double> lyapunov_window(double xi, double kerr_K);

/// Line fit of values (or ln values when log_values) over t in [t1, t2].
LinearFit growth_fit(const TimeSeries& series, double t1, double t2, bool log_values);

/// Mean over samples with t in [t1, t2]. Throws DomainError when
/// t2 - t1 < min_span or the window holds no sample.
double long_time_average(const TimeSeries& series, double t1, double t2, double min_span = 0.0);

/// 50 / (K xi): the minimum averaging span.
double characteristic_span(double xi, double kerr_K);

enum class PresetId { O, A, B, C, D, E };

struct Preset {
  PresetId id;
  char name;
  double q;
  double p;
  double tabulated_energy;  // classical energy / K_cl at xi_cl = 180
};

const std::vector<Preset>& presets();
PresetId preset_from_string(const std::string& s);
const Preset& preset(PresetId id);

/// Coherent state at the tabulated point. Throws DomainError unless xi = 180.
StateVector preset_state(PresetId id, const ModelParams& params);

}  // namespace kerr::dynamics
