#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <string_view>

namespace kerr {

using Index = Eigen::Index;
using Complex = std::complex<double>;

/// Overall sign of the Hamiltonian. main_text is H/K = n(n-1) - xi(a^2 + a^+2),
/// whose ground state sits at the bottom of the double well; lab_frame is its
/// negation (the effective Hamiltonian as derived from the driven circuit).
enum class SignConvention { main_text, lab_frame };

std::string_view to_string(SignConvention s);
SignConvention sign_convention_from_string(std::string_view s);

/// Parameters of the squeeze-driven Kerr oscillator in hbar = 1 units.
/// Energies are in units of kerr_K; epsilon2 is derived and never stored.
struct ModelParams {
  double kerr_K = 1.0;
  double xi = 0.0;
  double n_eff = 1.0;
  Index dim_N = 64;
  SignConvention sign = SignConvention::main_text;

  double epsilon2() const { return kerr_K * xi; }
  /// +1 for main_text, -1 for lab_frame.
  double sign_factor() const { return sign == SignConvention::main_text ? 1.0 : -1.0; }

  /// Throws InvalidParams / InvalidTruncation.
  void validate() const;

  ModelParams with_dim(Index n) const {
    ModelParams p = *this;
    p.dim_N = n;
    return p;
  }
  ModelParams with_xi(double x) const {
    ModelParams p = *this;
    p.xi = x;
    return p;
  }
};

/// Circuit-level coefficients feeding the effective Kerr/squeezing map.
struct MicroscopicParams {
  double g3 = 0.0;
  double g4 = 0.0;
  double omega_d = 1.0;  // drive frequency
  double Omega_d = 0.0;  // drive amplitude
};

/// Dense operator in the truncated Fock basis.
struct OperatorMatrix {
  Eigen::MatrixXcd entries;
  bool hermitian = false;

  Index dim() const { return entries.rows(); }
  /// max|A - A^+| <= tol * max|A|.
  bool check_hermitian(double tol = 1e-12) const;
};

/// Complex amplitudes C_n over Fock states |0>, ..., |dim-1>.
struct StateVector {
  Eigen::VectorXcd amplitudes;

  Index dim() const { return amplitudes.size(); }
  double norm() const { return amplitudes.norm(); }

  static StateVector fock(Index dim, Index n);
};

}  // namespace kerr
