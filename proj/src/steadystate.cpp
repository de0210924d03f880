#include "fbdiss/steadystate.hpp"

#include <algorithm>
#include <cmath>

#include "fbdiss/errors.hpp"
#include "fbdiss/linalg.hpp"

namespace fbdiss {

namespace {

constexpr int kSpectralDimLimit = 60;  // Auto picks spectral up to this D

Matrix scaled_to_density(const Matrix& hermitian_part) {
  const double tr = hermitian_part.trace().real();
  if (std::abs(tr) < 1e-10) throw NumericalFailure("steady-state candidate has zero trace");
  return hermitian_part / tr;  // flips sign when the trace is negative
}

// Hermitian, HS-orthonormal basis of the span of the given vectorized modes.
std::vector<Matrix> hermitian_basis(const Matrix& modes, int dim) {
  std::vector<Matrix> basis;
  const int want = static_cast<int>(modes.cols());
  for (int k = 0; k < modes.cols() && static_cast<int>(basis.size()) < want; ++k) {
    const Matrix x = linalg::unvectorize(modes.col(k), dim);
    for (const Matrix& cand :
         {Matrix(0.5 * (x + x.adjoint())), Matrix(0.5 * kImag * (x - x.adjoint()))}) {
      if (static_cast<int>(basis.size()) >= want) break;
      Matrix y = cand;
      for (const auto& b : basis) y -= (b.conjugate().cwiseProduct(y)).sum() * b;
      const double n = y.norm();
      if (n > 1e-8) basis.push_back(y / n);
    }
  }
  return basis;
}

double residual_of(const Superoperator& superop, const Matrix& rho) {
  return (superop.matrix * linalg::vectorize(rho)).norm();
}

template <typename Jumps>
Matrix evolve_impl(const Matrix& h, const Jumps& jumps, const Matrix& rho0,
                   const SolveOptions& opts) {
  if (rho0.rows() != h.rows() || rho0.cols() != h.cols())
    throw DimensionMismatch("initial state dimension does not match the Hamiltonian");
  double gamma_sum = 0.0;
  for (const auto& j : jumps) gamma_sum += j.gamma;
  const double h_max = h.size() ? h.cwiseAbs().maxCoeff() : 0.0;
  const double scale = std::max({gamma_sum, h_max, 1e-6});
  const double dt = opts.dt > 0.0 ? opts.dt : 0.05 / scale;
  const auto rhs = [&](const Matrix& r) { return apply_lindblad(h, jumps, r); };

  Matrix rho = linalg::hermitize(rho0);
  double residual = rhs(rho).norm();
  double t = 0.0;
  const int check_every = 25;
  int since_check = 0;
  while (residual >= opts.conv_tol && t < opts.t_max) {
    const Matrix k1 = rhs(rho);
    const Matrix k2 = rhs(Matrix(rho + 0.5 * dt * k1));
    const Matrix k3 = rhs(Matrix(rho + 0.5 * dt * k2));
    const Matrix k4 = rhs(Matrix(rho + dt * k3));
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += dt;
    if (++since_check >= check_every) {
      since_check = 0;
      rho = linalg::hermitize(rho);
      residual = rhs(rho).norm();
    }
  }
  rho = linalg::hermitize(rho);
  residual = rhs(rho).norm();
  if (residual >= opts.conv_tol)
    throw NotConverged("evolution reached t_max=" + std::to_string(opts.t_max) +
                       " with residual " + std::to_string(residual));
  return rho / rho.trace().real();
}

template <typename Jumps>
SteadyStateSet solve_impl(const Matrix& h, const Jumps& jumps, SolveMethod method,
                          const SolveOptions& opts) {
  const int d = static_cast<int>(h.rows());
  if (method == SolveMethod::Auto)
    method = d <= kSpectralDimLimit ? SolveMethod::Spectral : SolveMethod::Direct;
  if (method == SolveMethod::Evolve) {
    SteadyStateSet out;
    const Matrix rho0 = initial_state(d, opts);
    out.canonical = steady_state_evolve(h, jumps, rho0, opts);
    out.count = 1;
    out.states = {out.canonical};
    out.method = "evolve";
    out.canonical_residual = apply_lindblad(h, jumps, out.canonical).norm();
    out.residuals = {out.canonical_residual};
    return out;
  }
  const Superoperator superop = assemble_superoperator(h, jumps, opts.dim_cap);
  if (method == SolveMethod::Direct) return steady_state_direct(superop, opts);
  const Matrix rho0 = initial_state(d, opts);
  return steady_state_spectral(superop, opts, &rho0);
}

}  // namespace

SolveMethod solve_method_from_string(const std::string& name) {
  if (name == "auto") return SolveMethod::Auto;
  if (name == "spectral") return SolveMethod::Spectral;
  if (name == "direct") return SolveMethod::Direct;
  if (name == "evolve") return SolveMethod::Evolve;
  throw InvalidParam("unknown solver method: " + name);
}

std::string to_string(SolveMethod method) {
  switch (method) {
    case SolveMethod::Auto: return "auto";
    case SolveMethod::Spectral: return "spectral";
    case SolveMethod::Direct: return "direct";
    case SolveMethod::Evolve: return "evolve";
  }
  return "unknown";
}

Matrix initial_state(int dim, const SolveOptions& opts) {
  if (opts.initial == InitialState::MaximallyMixed)
    return Matrix::Identity(dim, dim) / double(dim);
  const Vector psi = linalg::random_state(dim, opts.seed);
  return psi * psi.adjoint();
}

SteadyStateSet steady_state_spectral(const Superoperator& superop, const SolveOptions& opts,
                                     const Matrix* rho0) {
  const int d = superop.dim;
  const auto spectrum = superoperator_spectrum(superop, /*want_vectors=*/true,
                                               /*want_left=*/true);
  SteadyStateSet out;
  out.method = "spectral";
  out.liouvillian_eigs = spectrum.values;
  for (Eigen::Index k = 0; k < spectrum.values.size(); ++k)
    if (std::abs(spectrum.values(k).real()) < opts.zero_tol) ++out.count;

  std::vector<Eigen::Index> zero_modes;  // strict zero modes: |lambda| small
  for (Eigen::Index k = 0; k < spectrum.values.size(); ++k)
    if (std::abs(spectrum.values(k)) < opts.zero_tol) zero_modes.push_back(k);
  if (zero_modes.empty())
    throw NoZeroEigenvalue("no Liouvillian eigenvalue within zero_tol=" +
                           std::to_string(opts.zero_tol) + "; smallest |Re| is " +
                           std::to_string(std::abs(spectrum.values(0).real())));

  const int k = static_cast<int>(zero_modes.size());
  Matrix right(spectrum.right.rows(), k), left(spectrum.left.rows(), k);
  for (int i = 0; i < k; ++i) {
    right.col(i) = spectrum.right.col(zero_modes[i]);
    left.col(i) = spectrum.left.col(zero_modes[i]);
  }

  out.basis = hermitian_basis(right, d);
  for (const auto& b : out.basis) {
    if (std::abs(b.trace().real()) < 1e-6) continue;
    Matrix candidate = scaled_to_density(b);
    Eigen::SelfAdjointEigenSolver<Matrix> es(candidate, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() > -1e-8) {
      out.states.push_back(std::move(candidate));
      out.residuals.push_back(residual_of(superop, out.states.back()));
    }
  }

  // Canonical state: the time-averaged asymptotic limit of rho0, i.e. the
  // spectral projection onto the strict zero modes (zero eigenvalues of the
  // generator are semisimple, so left/right biorthogonalization is valid).
  const Matrix rho_init =
      rho0 ? *rho0 : Matrix(Matrix::Identity(d, d) / double(d));
  const Matrix overlap = left.adjoint() * right;  // k x k
  const Vector coeffs =
      overlap.partialPivLu().solve(left.adjoint() * linalg::vectorize(rho_init));
  Matrix projected = linalg::unvectorize(right * coeffs, d);
  Matrix herm = linalg::hermitize(projected);
  if (std::abs(herm.trace().real()) < 1e-8) {
    const Matrix alt = linalg::hermitize(Matrix(kImag * projected));
    if (std::abs(alt.trace().real()) > std::abs(herm.trace().real())) herm = alt;
  }
  out.canonical = scaled_to_density(herm);
  out.canonical_residual = residual_of(superop, out.canonical);
  validate_density_matrix(out.canonical, 1e-8, 1e-8, 1e-6);
  return out;
}

SteadyStateSet steady_state_direct(const Superoperator& superop, const SolveOptions& opts) {
  const int d = superop.dim;
  const Eigen::Index n = superop.matrix.rows();
  Matrix a = superop.matrix;
  // Trace preservation makes the rows at diagonal positions linearly
  // dependent; replacing the (0,0) row with the trace functional pins
  // tr(rho) = 1 and leaves a nonsingular system when the steady state is
  // unique.
  a.row(0).setZero();
  for (int i = 0; i < d; ++i) a(0, Eigen::Index(i) * d + i) = 1.0;
  Vector b = Vector::Zero(n);
  b(0) = 1.0;
  Vector x;
  try {
    x = linalg::lu_solve_inplace(a, b);
  } catch (const NumericalFailure&) {
    throw NumericalFailure(
        "direct steady-state solve failed: the zero eigenvalue is likely degenerate; "
        "use the spectral or evolve solver");
  }
  SteadyStateSet out;
  out.method = "direct";
  out.count = 1;
  Matrix rho = linalg::hermitize(linalg::unvectorize(x, d));
  rho /= rho.trace().real();
  const double residual = residual_of(superop, rho);
  const double tol = 1e-8 * std::max(opts.gamma_total, 1.0);
  if (residual > tol)
    throw NumericalFailure("direct steady-state residual " + std::to_string(residual) +
                           " exceeds tolerance; the steady state may be degenerate");
  validate_density_matrix(rho, 1e-8, 1e-8, 1e-6);
  out.canonical = rho;
  out.canonical_residual = residual;
  out.states = {std::move(rho)};
  out.residuals = {residual};
  return out;
}

Matrix steady_state_evolve(const Matrix& h, std::span<const JumpOperator> jumps,
                           const Matrix& rho0, const SolveOptions& opts) {
  return evolve_impl(h, jumps, rho0, opts);
}

Matrix steady_state_evolve(const Matrix& h, std::span<const GenericJump> jumps,
                           const Matrix& rho0, const SolveOptions& opts) {
  return evolve_impl(h, jumps, rho0, opts);
}

SteadyStateSet solve_steady_state(const Matrix& h, std::span<const JumpOperator> jumps,
                                  SolveMethod method, const SolveOptions& opts) {
  return solve_impl(h, jumps, method, opts);
}

SteadyStateSet solve_steady_state(const Matrix& h, std::span<const GenericJump> jumps,
                                  SolveMethod method, const SolveOptions& opts) {
  return solve_impl(h, jumps, method, opts);
}

void validate_density_matrix(const Matrix& rho, double herm_tol, double trace_tol,
                             double psd_tol) {
  if (rho.rows() != rho.cols()) throw DimensionMismatch("density matrix must be square");
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > herm_tol)
    throw NumericalFailure("density matrix not Hermitian: deviation " + std::to_string(herm));
  const double tr_dev = std::abs(rho.trace() - Complex(1.0, 0.0));
  if (tr_dev > trace_tol)
    throw NumericalFailure("density matrix trace deviates by " + std::to_string(tr_dev));
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -psd_tol)
    throw NumericalFailure("density matrix not PSD: min eigenvalue " +
                           std::to_string(es.eigenvalues().minCoeff()));
}

Matrix project_eigenbasis(const Matrix& rho, const EigenSystem& eig) {
  if (rho.rows() != eig.states.rows())
    throw DimensionMismatch("project_eigenbasis: dimension mismatch");
  return eig.states.adjoint() * rho * eig.states;
}

double fb_occupation(const Matrix& rho_mn, const BandWindows& windows) {
  const auto& fb = windows.fb();
  double sum = 0.0;
  for (int i = fb.lo; i <= fb.hi; ++i) sum += rho_mn(i, i).real();
  if (sum < -1e-8 || sum > 1.0 + 1e-8)
    throw NumericalFailure("flat-band occupation " + std::to_string(sum) +
                           " outside [0,1] beyond tolerance");
  return std::clamp(sum, 0.0, 1.0);
}

double occupation_P(const Matrix& rho_mn, int n_top) {
  const int d = static_cast<int>(rho_mn.rows());
  if (n_top < 0 || n_top > d)
    throw BadWindow("occupation window " + std::to_string(n_top) + " exceeds dimension " +
                    std::to_string(d));
  double sum = 0.0;
  for (int i = d - n_top; i < d; ++i) sum += std::abs(rho_mn(i, i));
  return std::clamp(sum, 0.0, 1.0);
}

RealVector purity_spectrum(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
  RealVector vals = es.eigenvalues();
  std::sort(vals.data(), vals.data() + vals.size(), std::greater<double>());
  return vals;
}

bool is_pure(const RealVector& purity, double tol) {
  return purity.size() > 0 && purity(0) >= 1.0 - tol;
}

RealspaceProfile realspace_profile(const Matrix& rho, bool want_amplitudes) {
  RealspaceProfile out;
  out.occupations = rho.diagonal().real();
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  const Eigen::Index top = es.eigenvalues().size() - 1;
  out.pure = es.eigenvalues()(top) >= 1.0 - 1e-6;
  if (want_amplitudes) {
    if (!out.pure)
      throw NotPure("amplitudes requested for a mixed state (largest eigenvalue " +
                    std::to_string(es.eigenvalues()(top)) + ")");
    Vector amp = es.eigenvectors().col(top);
    for (Eigen::Index s = 0; s < amp.size(); ++s)
      if (std::abs(amp(s)) > 1e-6) {
        amp *= std::conj(amp(s)) / std::abs(amp(s));
        break;
      }
    out.amplitudes = std::move(amp);
  }
  return out;
}

RealspaceProfile realspace_profile(const Vector& state) {
  RealspaceProfile out;
  out.pure = true;
  out.occupations = state.cwiseAbs2();
  Vector amp = state;
  for (Eigen::Index s = 0; s < amp.size(); ++s)
    if (std::abs(amp(s)) > 1e-6) {
      amp *= std::conj(amp(s)) / std::abs(amp(s));
      break;
    }
  out.amplitudes = std::move(amp);
  return out;
}

double unitary_diagonal_drift(const Matrix& rho_mn, const EigenSystem& eig,
                              std::span<const double> t_samples) {
  if (rho_mn.rows() != eig.energies.size())
    throw DimensionMismatch("unitary_diagonal_drift: dimension mismatch");
  double drift = 0.0;
  for (const double t : t_samples)
    for (Eigen::Index n = 0; n < rho_mn.rows(); ++n) {
      const Complex phase = std::exp(-kImag * ((eig.energies(n) - eig.energies(n)) * t));
      drift = std::max(drift, std::abs(phase * rho_mn(n, n) - rho_mn(n, n)));
    }
  return drift;
}

double fidelity(const Matrix& rho, const Matrix& sigma) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  RealVector vals = es.eigenvalues().cwiseMax(0.0);
  const Matrix sqrt_rho =
      es.eigenvectors() * vals.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
  Eigen::SelfAdjointEigenSolver<Matrix> inner(Matrix(sqrt_rho * sigma * sqrt_rho),
                                              Eigen::EigenvaluesOnly);
  const double sum = inner.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return sum * sum;
}

double state_fidelity(const Vector& psi, const Matrix& rho) {
  if (psi.size() != rho.rows()) throw DimensionMismatch("state_fidelity: dimension mismatch");
  return (psi.adjoint() * rho * psi)(0).real();
}

double weight_outside_fb(const Matrix& rho_mn, const BandWindows& windows) {
  const auto& fb = windows.fb();
  double inside = 0.0;
  const double total = rho_mn.cwiseAbs().sum();
  for (int m = fb.lo; m <= fb.hi; ++m)
    for (int n = fb.lo; n <= fb.hi; ++n) inside += std::abs(rho_mn(m, n));
  if (total <= 0.0) return 0.0;
  return (total - inside) / total;
}

}  // namespace fbdiss
