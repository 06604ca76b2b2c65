#pragma once

#include <stdexcept>
#include <string>

namespace kerr {

/// Base of every error raised by the library. Each subclass corresponds to a
/// declared failure mode; the CLI maps them onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model parameters outside their domain (negative xi, non-positive n_eff, ...).
class InvalidParams : public Error {
 public:
  using Error::Error;
};

/// Fock truncation too small for the parity split / two-photon coupling.
class InvalidTruncation : public Error {
 public:
  using Error::Error;
};

/// A matrix expected to conserve (-1)^n couples the two parity sectors.
class ParityViolation : public Error {
 public:
  using Error::Error;
};

/// Truncated state or spectrum carries more mass beyond dim_N than allowed.
class TruncationTooSmall : public Error {
 public:
  using Error::Error;
};

/// Microscopic parameters sit at the Kerr-free point (K = 0), so xi is undefined.
class KerrFreePoint : public Error {
 public:
  using Error::Error;
};

/// Eigensolver failure, step-size failure, fit failure and similar.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Input lands on a singularity of the evaluated function (e.g. DOS at E_hyp).
class SingularInput : public Error {
 public:
  using Error::Error;
};

/// Well-formed input for which the requested quantity does not exist
/// (no ESQPT at xi = 0, empty histogram range, unknown preset id, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace kerr
