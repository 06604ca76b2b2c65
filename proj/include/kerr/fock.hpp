#pragma once

#include "kerr/types.hpp"

#include <vector>

namespace kerr::fock {

/// Hamiltonian matrix of the squeeze-driven Kerr oscillator.
///
/// main_text: <n|H|n> = K n(n-1), <n+2|H|n> = -K xi sqrt((n+1)(n+2)).
/// lab_frame: the global negation, -K a^+2 a^2 + epsilon2 (a^+2 + a^2).
OperatorMatrix build_hamiltonian(const ModelParams& params);

struct LadderSet {
  OperatorMatrix a;
  OperatorMatrix a_dag;
  OperatorMatrix n_op;
  OperatorMatrix q_op;  // (a + a^+) / sqrt(2 n_eff)
  OperatorMatrix p_op;  // i (a^+ - a) / sqrt(2 n_eff)
};

LadderSet ladder_matrices(const ModelParams& params);

/// Parity operator diag((-1)^n).
OperatorMatrix parity_operator(Index dim);

/// The two parity blocks of a matrix coupling only n <-> n, n +- 2.
/// even_index[i] is the Fock index of row i of the even block (likewise odd).
struct ParityBlocks {
  OperatorMatrix even;
  OperatorMatrix odd;
  std::vector<Index> even_index;
  std::vector<Index> odd_index;

  OperatorMatrix reassemble() const;
};

/// Throws ParityViolation if any cross-parity entry exceeds tol.
ParityBlocks parity_split(const OperatorMatrix& H, double tol = 1e-14);

/// Result of building a Glauber coherent state in the truncated basis.
struct CoherentState {
  StateVector state;
  Complex alpha;
  double tail_mass = 0.0;  // mass of the untruncated state beyond dim_N
};

/// |alpha> with alpha = sqrt(n_eff/2)(q + ip), renormalized over dim_N levels.
/// Throws TruncationTooSmall when the tail mass exceeds max_tail.
CoherentState coherent_state_with_tail(double q, double p, const ModelParams& params,
                                       double max_tail = 1e-8);

StateVector coherent_state(double q, double p, const ModelParams& params);

/// Mass of the exact coherent state |alpha> on Fock levels n >= dim.
double coherent_tail_mass(Complex alpha, Index dim);

/// dim_N >= |alpha|^2 + 10 |alpha| + 20.
Index recommended_truncation(double q, double p, double n_eff = 1.0);

struct KerrMap {
  double K = 0.0;
  double epsilon2 = 0.0;
  double xi = 0.0;
};

/// K = -(3/2) g4 + 20 g3^2 / (3 omega_d), epsilon2 = 4 g3 Omega_d / (3 omega_d).
/// Throws KerrFreePoint at K = 0 and InvalidParams for omega_d <= 0.
KerrMap microscopic_map(const MicroscopicParams& mp);

/// K / (2 pi), for displaying a rate in frequency units.
inline double display_frequency(double rate) { return rate / (2.0 * 3.14159265358979323846); }

struct ConvergenceReport {
  Index dim_N = 0;
  Index dim_probe = 0;
  double max_drift = 0.0;
  bool converged = true;
  std::string quantity;
};

/// Lowest `levels` eigenvalues at dim_N and dim_N + Delta, Delta = max(32, dim_N/8).
/// Drift is measured in units of max(K, K xi^2).
ConvergenceReport truncation_check_spectrum(const ModelParams& params, Index levels,
                                            double threshold = 1e-8);

/// Tail mass of the exact coherent state beyond dim_N, and the change in <n>
/// against dim_N + Delta.
ConvergenceReport truncation_check_coherent(const ModelParams& params, double q, double p,
                                            double threshold = 1e-8);

Index truncation_increment(Index dim_N);

// Expectation helpers on Fock-basis states.
double expectation_n(const StateVector& s);
Complex expectation_a(const StateVector& s);
Complex expectation_a2(const StateVector& s);
double expectation_parity(const StateVector& s);
/// <psi|H|psi> with H applied as a banded matrix (no dense product).
double expectation_energy(const StateVector& s, const ModelParams& params);
double expectation_energy_squared(const StateVector& s, const ModelParams& params);
/// H|psi> using the banded structure.
Eigen::VectorXcd apply_hamiltonian(const ModelParams& params, const Eigen::VectorXcd& psi);

}  // namespace kerr::fock
