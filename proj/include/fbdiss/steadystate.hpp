#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fbdiss/lattice.hpp"
#include "fbdiss/liouvillian.hpp"
#include "fbdiss/types.hpp"

namespace fbdiss {

enum class SolveMethod { Auto, Spectral, Direct, Evolve };
enum class InitialState { MaximallyMixed, RandomPure };

SolveMethod solve_method_from_string(const std::string& name);
std::string to_string(SolveMethod method);

struct SolveOptions {
  double zero_tol = 1e-8;
  double dt = 0.0;  // 0 = auto: 0.05 / max(total rate, max |H_ij|)
  double t_max = 1e4;
  double conv_tol = 1e-10;
  InitialState initial = InitialState::MaximallyMixed;
  std::uint64_t seed = 0;
  int dim_cap = 100;          // hard cap on D for dense superoperators
  double gamma_total = 1.0;   // total dissipation rate, used in residual scales
};

struct SteadyStateSet {
  int count = 0;                 // Liouvillian eigenvalues with |Re| < zero_tol
  std::vector<Matrix> basis;     // Hermitian HS-orthonormal basis of the zero modes
  std::vector<Matrix> states;    // basis members normalizable to valid density matrices
  Matrix canonical;              // asymptotic (time-averaged) state of rho0
  double canonical_residual = 0.0;
  Vector liouvillian_eigs;       // full spectrum, |Re| ascending (spectral method)
  std::string method;
  std::vector<double> residuals;  // ||L[state]||_F aligned with `states`
};

/// Initial density matrix per options: I/D or a seeded random pure state.
Matrix initial_state(int dim, const SolveOptions& opts);

/// Steady states from the full superoperator eigendecomposition.
SteadyStateSet steady_state_spectral(const Superoperator& superop, const SolveOptions& opts = {},
                                     const Matrix* rho0 = nullptr);

/// Unique steady state from one LU solve of the trace-fixed linear system.
/// Fails when the steady subspace is degenerate.
SteadyStateSet steady_state_direct(const Superoperator& superop, const SolveOptions& opts = {});

/// Fixed-step RK4 integration of d(rho)/dt = L[rho] until ||L[rho]||_F falls
/// below conv_tol.
Matrix steady_state_evolve(const Matrix& h, std::span<const JumpOperator> jumps,
                           const Matrix& rho0, const SolveOptions& opts = {});
Matrix steady_state_evolve(const Matrix& h, std::span<const GenericJump> jumps,
                           const Matrix& rho0, const SolveOptions& opts = {});

/// Dispatches on method (Auto: spectral for D <= 60, direct above).
SteadyStateSet solve_steady_state(const Matrix& h, std::span<const JumpOperator> jumps,
                                  SolveMethod method, const SolveOptions& opts);
SteadyStateSet solve_steady_state(const Matrix& h, std::span<const GenericJump> jumps,
                                  SolveMethod method, const SolveOptions& opts);

/// Throws NumericalFailure unless rho is Hermitian, unit-trace and PSD within
/// the stated tolerances.
void validate_density_matrix(const Matrix& rho, double herm_tol = 1e-10,
                             double trace_tol = 1e-10, double psd_tol = 1e-8);

/// rho in the Hamiltonian eigenbasis: V^dag rho V, energies ascending.
Matrix project_eigenbasis(const Matrix& rho, const EigenSystem& eig);

/// Sum of real diagonal elements over the flat-band window, clipped to [0,1].
double fb_occupation(const Matrix& rho_mn, const BandWindows& windows);

/// Sum of |rho_ii| over the top n_top eigenstates (ascending energy order).
double occupation_P(const Matrix& rho_mn, int n_top);

/// Eigenvalues of rho, descending.
RealVector purity_spectrum(const Matrix& rho);
bool is_pure(const RealVector& purity, double tol = 1e-6);

struct RealspaceProfile {
  bool pure = false;
  Vector amplitudes;       // pure states only; global phase fixed
  RealVector occupations;  // diagonal of rho in the site basis
};

/// Per-site profile of a state. Throws NotPure when amplitudes are requested
/// for a mixed state.
RealspaceProfile realspace_profile(const Matrix& rho, bool want_amplitudes);
RealspaceProfile realspace_profile(const Vector& state);

/// Max over t-samples of the diagonal drift of rho under dissipation-free
/// unitary evolution in the eigenbasis. Analytically zero.
double unitary_diagonal_drift(const Matrix& rho_mn, const EigenSystem& eig,
                              std::span<const double> t_samples);

/// Uhlmann fidelity between density matrices.
double fidelity(const Matrix& rho, const Matrix& sigma);

/// <psi| rho |psi>.
double state_fidelity(const Vector& psi, const Matrix& rho);

/// Total |rho_mn| weight outside the flat-band window, normalized by the
/// total |rho_mn| weight.
double weight_outside_fb(const Matrix& rho_mn, const BandWindows& windows);

}  // namespace fbdiss
