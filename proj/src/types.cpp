#include "kerr/types.hpp"

#include "kerr/errors.hpp"

#include <cmath>

namespace kerr {

std::string_view to_string(SignConvention s) {
  return s == SignConvention::main_text ? "main_text" : "lab_frame";
}

SignConvention sign_convention_from_string(std::string_view s) {
  if (s == "main_text") return SignConvention::main_text;
  if (s == "lab_frame") return SignConvention::lab_frame;
  throw InvalidParams("unknown sign convention '" + std::string(s) + "'");
}

void ModelParams::validate() const {
  if (!std::isfinite(kerr_K) || !std::isfinite(xi) || !std::isfinite(n_eff))
    throw InvalidParams("model parameters must be finite");
  if (xi < 0.0) throw InvalidParams("xi must be >= 0");
  if (n_eff <= 0.0) throw InvalidParams("n_eff must be > 0");
  if (dim_N < 4)
    throw InvalidTruncation("dim_N must be >= 4 (got " + std::to_string(dim_N) + ")");
}

bool OperatorMatrix::check_hermitian(double tol) const {
  if (entries.rows() != entries.cols()) return false;
  const double scale = entries.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  const double asym = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
  return asym <= tol * scale;
}

StateVector StateVector::fock(Index dim, Index n) {
  if (n < 0 || n >= dim) throw InvalidParams("Fock index out of range");
  StateVector s;
  s.amplitudes = Eigen::VectorXcd::Zero(dim);
  s.amplitudes(n) = 1.0;
  return s;
}

}  // namespace kerr
