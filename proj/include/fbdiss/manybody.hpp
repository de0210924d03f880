#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fbdiss/dissipation.hpp"
#include "fbdiss/lattice.hpp"
#include "fbdiss/liouvillian.hpp"
#include "fbdiss/steadystate.hpp"
#include "fbdiss/types.hpp"

namespace fbdiss {

/// Fixed particle-number occupation basis; patterns sorted ascending as
/// integers, mode order = flat site index.
struct FockBasis {
  int n_sites = 0;
  int n_particles = 0;
  std::vector<std::uint32_t> states;

  int size() const { return static_cast<int>(states.size()); }
  int index_of(std::uint32_t pattern) const;
};

FockBasis fock_basis(int n_sites, int n_particles);

/// Particle statistics for the fixed-N sector: fermions carry Jordan-Wigner
/// signs in flat order, hard-core bosons none.
enum class Statistics { Fermion, HardCoreBoson };

/// c^dag_p c_r in the fixed-N sector.
Matrix fermion_bilinear(const FockBasis& basis, int p, int r);
Matrix mode_bilinear(const FockBasis& basis, int p, int r, Statistics stats);

/// Hopping from the single-particle Hamiltonian plus nearest-neighbor
/// interaction v_int * sum_j n_j n_{j+1} over consecutive flat indices
/// (wrapping under periodic boundaries).
Matrix mb_hamiltonian(const SingleParticleSystem& system, double v_int, const FockBasis& basis,
                      Statistics stats = Statistics::Fermion);

std::vector<GenericJump> mb_jump_operators(std::span<const DissipationChannel> channels,
                                           const FockBasis& basis,
                                           Statistics stats = Statistics::Fermion);

/// Antisymmetrized two-particle state built from two orbitals.
Vector two_particle_slater(const FockBasis& basis, const Vector& orb1, const Vector& orb2);

struct InteractingResult {
  FockBasis basis;
  EigenSystem eig;       // many-body spectrum
  BandWindows windows;   // top-cluster window held fixed across V
  SteadyStateSet steady;
  Matrix rho_mn;
  int n_top = 0;         // number of noninteracting top-cluster states
  double p_top = 0.0;    // occupation P over the top n_top states
};

/// Full interacting pipeline: many-body Hamiltonian and jumps, steady state,
/// eigenbasis projection and top-cluster occupation. The top-cluster size is
/// detected at v_int = 0 and held fixed.
InteractingResult interacting_pipeline(const SingleParticleSystem& system,
                                       std::span<const DissipationChannel> channels,
                                       int particles, double v_int, SolveMethod method,
                                       const SolveOptions& opts, const BandPolicy& np_policy,
                                       Statistics stats = Statistics::Fermion);

}  // namespace fbdiss
