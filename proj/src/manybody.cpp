#include "fbdiss/manybody.hpp"

#include <algorithm>
#include <bit>

#include "fbdiss/errors.hpp"

namespace fbdiss {

namespace {

int parity_below(std::uint32_t pattern, int site) {
  const std::uint32_t mask = (std::uint32_t{1} << site) - 1;
  return std::popcount(pattern & mask) & 1;
}

}  // namespace

int FockBasis::index_of(std::uint32_t pattern) const {
  const auto it = std::lower_bound(states.begin(), states.end(), pattern);
  if (it == states.end() || *it != pattern)
    throw IndexOutOfRange("occupation pattern not in the basis");
  return static_cast<int>(it - states.begin());
}

FockBasis fock_basis(int n_sites, int n_particles) {
  if (n_sites < 1 || n_sites > 30) throw BadCount("site count out of range");
  if (n_particles < 1 || n_particles > n_sites)
    throw BadCount("particle number must lie in 1..n_sites");
  FockBasis basis{n_sites, n_particles, {}};
  for (std::uint32_t pattern = 0; pattern < (std::uint32_t{1} << n_sites); ++pattern)
    if (std::popcount(pattern) == n_particles) basis.states.push_back(pattern);
  return basis;
}

Matrix mode_bilinear(const FockBasis& basis, int p, int r, Statistics stats) {
  if (p < 0 || p >= basis.n_sites || r < 0 || r >= basis.n_sites)
    throw IndexOutOfRange("bilinear mode index outside the lattice");
  const int dim = basis.size();
  Matrix out = Matrix::Zero(dim, dim);
  for (int b = 0; b < dim; ++b) {
    const std::uint32_t n = basis.states[b];
    if (!(n & (std::uint32_t{1} << r))) continue;
    const std::uint32_t m = n & ~(std::uint32_t{1} << r);
    if (m & (std::uint32_t{1} << p)) continue;
    const std::uint32_t n2 = m | (std::uint32_t{1} << p);
    int sign = 1;
    if (stats == Statistics::Fermion && (parity_below(n, r) ^ parity_below(m, p))) sign = -1;
    out(basis.index_of(n2), b) += double(sign);
  }
  return out;
}

Matrix fermion_bilinear(const FockBasis& basis, int p, int r) {
  return mode_bilinear(basis, p, r, Statistics::Fermion);
}

Matrix mb_hamiltonian(const SingleParticleSystem& system, double v_int, const FockBasis& basis,
                      Statistics stats) {
  const int d = system.dim();
  if (d != basis.n_sites)
    throw DimensionMismatch("Fock basis site count does not match the lattice");
  const int dim = basis.size();
  Matrix h = Matrix::Zero(dim, dim);
  for (int p = 0; p < d; ++p)
    for (int r = 0; r < d; ++r) {
      const Complex amp = system.hamiltonian(p, r);
      if (amp == Complex(0.0, 0.0)) continue;
      h += amp * mode_bilinear(basis, p, r, stats);
    }
  if (v_int != 0.0) {
    const bool periodic = system.model.boundary == Boundary::Periodic;
    const int last = periodic ? d : d - 1;
    for (int b = 0; b < dim; ++b) {
      const std::uint32_t n = basis.states[b];
      double e = 0.0;
      for (int j = 0; j < last; ++j) {
        const int k = (j + 1) % d;
        if ((n >> j & 1) && (n >> k & 1)) e += v_int;
      }
      h(b, b) += e;
    }
  }
  const double herm = (h - h.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-12) throw NumericalFailure("many-body Hamiltonian is not Hermitian");
  return h;
}

std::vector<GenericJump> mb_jump_operators(std::span<const DissipationChannel> channels,
                                           const FockBasis& basis, Statistics stats) {
  std::vector<GenericJump> out;
  for (const auto& ch : channels) {
    if (ch.gamma == 0.0) continue;
    for (const auto& [i, j] : ch.site_pairs) {
      if (i < 0 || i >= basis.n_sites || j < 0 || j >= basis.n_sites)
        throw IndexOutOfRange("jump operator site pair outside the lattice");
      const double a = double(ch.a);
      Matrix op = mode_bilinear(basis, i, i, stats) - mode_bilinear(basis, j, j, stats) -
                  a * mode_bilinear(basis, i, j, stats) + a * mode_bilinear(basis, j, i, stats);
      out.push_back({std::move(op), ch.gamma});
    }
  }
  return out;
}

Vector two_particle_slater(const FockBasis& basis, const Vector& orb1, const Vector& orb2) {
  if (basis.n_particles != 2) throw BadCount("Slater helper is for two-particle bases");
  if (orb1.size() != basis.n_sites || orb2.size() != basis.n_sites)
    throw DimensionMismatch("orbital dimension does not match the basis");
  Vector out = Vector::Zero(basis.size());
  for (int b = 0; b < basis.size(); ++b) {
    const std::uint32_t n = basis.states[b];
    const int p = std::countr_zero(n);
    const int q = 31 - std::countl_zero(n);
    out(b) = orb1(p) * orb2(q) - orb1(q) * orb2(p);
  }
  const double norm = out.norm();
  if (norm < 1e-12) throw NumericalFailure("Slater determinant vanished");
  return out / norm;
}

InteractingResult interacting_pipeline(const SingleParticleSystem& system,
                                       std::span<const DissipationChannel> channels,
                                       int particles, double v_int, SolveMethod method,
                                       const SolveOptions& opts, const BandPolicy& np_policy,
                                       Statistics stats) {
  InteractingResult result;
  result.basis = fock_basis(system.dim(), particles);
  if (result.basis.size() > opts.dim_cap)
    throw DimensionTooLarge("many-body dimension " + std::to_string(result.basis.size()) +
                            " exceeds the superoperator cap");

  const Matrix h = mb_hamiltonian(system, v_int, result.basis, stats);
  result.eig = eigendecompose_hermitian(h);

  // Top-cluster count N_p from the noninteracting spectrum, held fixed in V.
  const Matrix h0 = v_int == 0.0 ? h : mb_hamiltonian(system, 0.0, result.basis, stats);
  const EigenSystem eig0 = eigendecompose_hermitian(h0);
  const BandWindows w0 = band_windows(eig0, np_policy);
  result.n_top = result.basis.size() - w0.fb().lo;
  result.windows =
      band_windows(result.eig, BandPolicy::explicit_window(result.basis.size() - result.n_top,
                                                           result.basis.size() - 1));

  const auto jumps = mb_jump_operators(channels, result.basis, stats);
  SolveOptions mb_opts = opts;
  mb_opts.gamma_total = 0.0;
  for (const auto& j : jumps) mb_opts.gamma_total += j.gamma;
  result.steady = solve_steady_state(h, std::span<const GenericJump>(jumps), method, mb_opts);
  result.rho_mn = project_eigenbasis(result.steady.canonical, result.eig);
  result.p_top = occupation_P(result.rho_mn, result.n_top);
  return result;
}

}  // namespace fbdiss
