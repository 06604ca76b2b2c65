#pragma once

#include "kerr/spectral.hpp"

namespace kerr::testing {

inline ModelParams model(double xi, Index dim, double K = 1.0) {
  ModelParams p;
  p.kerr_K = K;
  p.xi = xi;
  p.dim_N = dim;
  return p;
}

/// The xi = 180, dim 900 spectrum shared by the heavier tests.
inline const spectral::SpectralDecomposition& spectrum_180() {
  static const spectral::SpectralDecomposition spec = spectral::diagonalize(model(180.0, 900));
  return spec;
}

}  // namespace kerr::testing
