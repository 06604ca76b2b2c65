#include "kerr/fock.hpp"

#include "kerr/errors.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>

namespace kerr::fock {

namespace {

// Cheapest route to the sorted eigenvalues: one real symmetric solve per parity block.
Eigen::VectorXd sorted_eigenvalues(const ModelParams& params) {
  const OperatorMatrix H = build_hamiltonian(params.with_dim(params.dim_N));
  const ParityBlocks blocks = parity_split(H);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> even(blocks.even.entries.real(),
                                                      Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> odd(blocks.odd.entries.real(),
                                                     Eigen::EigenvaluesOnly);
  if (even.info() != Eigen::Success || odd.info() != Eigen::Success)
    throw NumericalError("eigenvalue solve failed during truncation check");
  Eigen::VectorXd all(H.dim());
  all << even.eigenvalues(), odd.eigenvalues();
  std::sort(all.data(), all.data() + all.size());
  return all;
}

}  // namespace

OperatorMatrix build_hamiltonian(const ModelParams& params) {
  params.validate();
  const Index N = params.dim_N;
  const double s = params.sign_factor() * params.kerr_K;
  OperatorMatrix H;
  H.entries = Eigen::MatrixXcd::Zero(N, N);
  for (Index n = 0; n < N; ++n) {
    const double nd = static_cast<double>(n);
    H.entries(n, n) = s * nd * (nd - 1.0);
    if (n + 2 < N) {
      const double c = -s * params.xi * std::sqrt((nd + 1.0) * (nd + 2.0));
      H.entries(n + 2, n) = c;
      H.entries(n, n + 2) = c;
    }
  }
  H.hermitian = true;
  return H;
}

LadderSet ladder_matrices(const ModelParams& params) {
  params.validate();
  const Index N = params.dim_N;
  LadderSet L;
  L.a.entries = Eigen::MatrixXcd::Zero(N, N);
  for (Index n = 1; n < N; ++n) L.a.entries(n - 1, n) = std::sqrt(static_cast<double>(n));
  L.a_dag.entries = L.a.entries.adjoint();
  L.n_op.entries = Eigen::MatrixXcd::Zero(N, N);
  for (Index n = 0; n < N; ++n) L.n_op.entries(n, n) = static_cast<double>(n);
  const double scale = 1.0 / std::sqrt(2.0 * params.n_eff);
  L.q_op.entries = scale * (L.a.entries + L.a_dag.entries);
  L.p_op.entries = Complex(0.0, scale) * (L.a_dag.entries - L.a.entries);
  L.n_op.hermitian = L.q_op.hermitian = L.p_op.hermitian = true;
  return L;
}

OperatorMatrix parity_operator(Index dim) {
  OperatorMatrix P;
  P.entries = Eigen::MatrixXcd::Zero(dim, dim);
  for (Index n = 0; n < dim; ++n) P.entries(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
  P.hermitian = true;
  return P;
}

ParityBlocks parity_split(const OperatorMatrix& H, double tol) {
  const Index N = H.dim();
  ParityBlocks b;
  for (Index n = 0; n < N; ++n) (n % 2 == 0 ? b.even_index : b.odd_index).push_back(n);

  for (Index i = 0; i < N; ++i)
    for (Index j = (i % 2 == 0) ? 1 : 0; j < N; j += 2)
      if (std::abs(H.entries(i, j)) > tol)
        throw ParityViolation("cross-parity entry at (" + std::to_string(i) + "," +
                              std::to_string(j) + ")");

  auto extract = [&](const std::vector<Index>& idx) {
    OperatorMatrix m;
    const auto n = static_cast<Index>(idx.size());
    m.entries.resize(n, n);
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c) m.entries(r, c) = H.entries(idx[r], idx[c]);
    m.hermitian = H.hermitian;
    return m;
  };
  b.even = extract(b.even_index);
  b.odd = extract(b.odd_index);
  return b;
}

OperatorMatrix ParityBlocks::reassemble() const {
  const auto N = static_cast<Index>(even_index.size() + odd_index.size());
  OperatorMatrix H;
  H.entries = Eigen::MatrixXcd::Zero(N, N);
  auto place = [&](const OperatorMatrix& blk, const std::vector<Index>& idx) {
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t c = 0; c < idx.size(); ++c)
        H.entries(idx[r], idx[c]) = blk.entries(static_cast<Index>(r), static_cast<Index>(c));
  };
  place(even, even_index);
  place(odd, odd_index);
  H.hermitian = even.hermitian && odd.hermitian;
  return H;
}

double coherent_tail_mass(Complex alpha, Index dim) {
  const double mean = std::norm(alpha);
  if (mean == 0.0) return 0.0;
  // P(Poisson(mean) >= dim) is the lower regularized incomplete gamma function.
  return boost::math::gamma_p(static_cast<double>(dim), mean);
}

Index recommended_truncation(double q, double p, double n_eff) {
  const double mean = 0.5 * n_eff * (q * q + p * p);
  return static_cast<Index>(std::ceil(mean + 10.0 * std::sqrt(mean) + 20.0));
}

CoherentState coherent_state_with_tail(double q, double p, const ModelParams& params,
                                       double max_tail) {
  params.validate();
  if (!std::isfinite(q) || !std::isfinite(p)) throw InvalidParams("non-finite phase point");
  const Index N = params.dim_N;
  const Complex alpha = std::sqrt(0.5 * params.n_eff) * Complex(q, p);
  CoherentState out;
  out.alpha = alpha;
  out.state.amplitudes = Eigen::VectorXcd::Zero(N);
  const double r = std::abs(alpha);
  if (r == 0.0) {
    out.state.amplitudes(0) = 1.0;
    return out;
  }
  out.tail_mass = coherent_tail_mass(alpha, N);
  if (out.tail_mass > max_tail)
    throw TruncationTooSmall("coherent state at (q,p)=(" + std::to_string(q) + "," +
                             std::to_string(p) + ") loses tail mass " +
                             std::to_string(out.tail_mass) + " beyond dim_N=" +
                             std::to_string(N));
  const double log_r = std::log(r);
  const double theta = std::arg(alpha);
  const double half_mean = 0.5 * r * r;
  for (Index n = 0; n < N; ++n) {
    const double nd = static_cast<double>(n);
    const double log_mag = nd * log_r - half_mean - 0.5 * std::lgamma(nd + 1.0);
    out.state.amplitudes(n) = std::polar(std::exp(log_mag), nd * theta);
  }
  out.state.amplitudes /= out.state.amplitudes.norm();
  return out;
}

StateVector coherent_state(double q, double p, const ModelParams& params) {
  return coherent_state_with_tail(q, p, params).state;
}

KerrMap microscopic_map(const MicroscopicParams& mp) {
  if (!(mp.omega_d > 0.0)) throw InvalidParams("omega_d must be > 0");
  const double kerr_term = -1.5 * mp.g4;
  const double cubic_term = 20.0 * mp.g3 * mp.g3 / (3.0 * mp.omega_d);
  KerrMap m;
  m.K = kerr_term + cubic_term;
  m.epsilon2 = 4.0 * mp.g3 * mp.Omega_d / (3.0 * mp.omega_d);
  const double scale = std::abs(kerr_term) + std::abs(cubic_term);
  if (m.K == 0.0 || std::abs(m.K) <= 1e-14 * scale)
    throw KerrFreePoint("Kerr-free point: K = 0, xi = epsilon2/K is undefined");
  m.xi = m.epsilon2 / m.K;
  return m;
}

Index truncation_increment(Index dim_N) { return std::max<Index>(32, dim_N / 8); }

ConvergenceReport truncation_check_spectrum(const ModelParams& params, Index levels,
                                            double threshold) {
  ConvergenceReport rep;
  rep.quantity = "lowest " + std::to_string(levels) + " eigenvalues";
  rep.dim_N = params.dim_N;
  rep.dim_probe = params.dim_N + truncation_increment(params.dim_N);
  const Eigen::VectorXd base = sorted_eigenvalues(params);
  const Eigen::VectorXd probe = sorted_eigenvalues(params.with_dim(rep.dim_probe));
  const Index m = std::min<Index>(levels, base.size());
  const double scale = std::max(params.kerr_K, params.kerr_K * params.xi * params.xi);
  for (Index k = 0; k < m; ++k)
    rep.max_drift = std::max(rep.max_drift, std::abs(base(k) - probe(k)) / scale);
  rep.converged = rep.max_drift <= threshold;
  return rep;
}

ConvergenceReport truncation_check_coherent(const ModelParams& params, double q, double p,
                                            double threshold) {
  params.validate();
  ConvergenceReport rep;
  rep.quantity = "coherent state tail mass";
  rep.dim_N = params.dim_N;
  rep.dim_probe = params.dim_N + truncation_increment(params.dim_N);
  const Complex alpha = std::sqrt(0.5 * params.n_eff) * Complex(q, p);
  rep.max_drift = coherent_tail_mass(alpha, params.dim_N);
  // When the tail is small the renormalized states also agree in <n>.
  if (rep.max_drift <= 1e-3) {
    const double mean = std::norm(alpha);
    const StateVector a = coherent_state_with_tail(q, p, params, 1.0).state;
    const StateVector b = coherent_state_with_tail(q, p, params.with_dim(rep.dim_probe), 1.0).state;
    const double dn = std::abs(expectation_n(a) - expectation_n(b)) / std::max(1.0, mean);
    rep.max_drift = std::max(rep.max_drift, dn);
  }
  rep.converged = rep.max_drift <= threshold;
  return rep;
}

double expectation_n(const StateVector& s) {
  double acc = 0.0;
  for (Index n = 0; n < s.dim(); ++n) acc += static_cast<double>(n) * std::norm(s.amplitudes(n));
  return acc;
}

Complex expectation_a(const StateVector& s) {
  Complex acc = 0.0;
  for (Index n = 1; n < s.dim(); ++n)
    acc += std::conj(s.amplitudes(n - 1)) * std::sqrt(static_cast<double>(n)) * s.amplitudes(n);
  return acc;
}

Complex expectation_a2(const StateVector& s) {
  Complex acc = 0.0;
  for (Index n = 2; n < s.dim(); ++n) {
    const double nd = static_cast<double>(n);
    acc += std::conj(s.amplitudes(n - 2)) * std::sqrt(nd * (nd - 1.0)) * s.amplitudes(n);
  }
  return acc;
}

double expectation_parity(const StateVector& s) {
  double acc = 0.0;
  for (Index n = 0; n < s.dim(); ++n)
    acc += ((n % 2 == 0) ? 1.0 : -1.0) * std::norm(s.amplitudes(n));
  return acc;
}

Eigen::VectorXcd apply_hamiltonian(const ModelParams& params, const Eigen::VectorXcd& psi) {
  const Index N = psi.size();
  const double s = params.sign_factor() * params.kerr_K;
  Eigen::VectorXcd out(N);
  for (Index n = 0; n < N; ++n) {
    const double nd = static_cast<double>(n);
    Complex v = nd * (nd - 1.0) * psi(n);
    if (n >= 2) v -= params.xi * std::sqrt(nd * (nd - 1.0)) * psi(n - 2);
    if (n + 2 < N) v -= params.xi * std::sqrt((nd + 1.0) * (nd + 2.0)) * psi(n + 2);
    out(n) = s * v;
  }
  return out;
}

double expectation_energy(const StateVector& s, const ModelParams& params) {
  return s.amplitudes.dot(apply_hamiltonian(params, s.amplitudes)).real();
}

double expectation_energy_squared(const StateVector& s, const ModelParams& params) {
  return apply_hamiltonian(params, s.amplitudes).squaredNorm();
}

}  // namespace kerr::fock
