#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fbdiss/lattice.hpp"
#include "fbdiss/types.hpp"

namespace fbdiss {

/// Bond dissipation acting on site pairs (j, j+q) along one chain.
struct DissipationChannel {
  std::string chain;
  int q_sites = 1;
  int a = 1;  // +1 favors in-phase pairs, -1 out-of-phase
  double gamma = 0.0;
  int sites_per_cell = 1;
  std::vector<std::pair<int, int>> site_pairs;
};

/// Rank-1 jump operator (|i> + a|j>)(<i| - a<j|) with rate gamma.
struct JumpOperator {
  Vector v;  // creation pattern
  Vector w;  // annihilation pattern
  double gamma = 1.0;
  int site_i = -1;
  int site_j = -1;
  int a = 1;

  Matrix dense() const { return v * w.adjoint(); }
  Vector apply(const Vector& x) const { return v * w.dot(x); }
};

struct ConditionReport {
  bool satisfied = false;
  std::optional<int> kappa;
  std::vector<std::string> violations;
};

/// Builds the channel for one chain with an explicit site offset.
DissipationChannel make_channel(const LatticeChain& chain, int q_sites, int a, double gamma);

/// One channel per chain with q spanning kappa*U unit cells on each chain.
/// Chains missing from gamma_per_chain get gamma = 0; keys match either the
/// full chain name or its prefix before ':'.
std::vector<DissipationChannel> channels_from_unit_cells(
    const SingleParticleSystem& system, int kappa, int a,
    const std::map<std::string, double>& gamma_per_chain, std::string_view direction = {});

std::vector<JumpOperator> jump_operators(const SingleParticleSystem& system,
                                         std::span<const DissipationChannel> channels);

/// Checks the flat-band steady-state conditions: q an integer multiple of U
/// (in unit cells) on every dissipating chain, with identical (a, q) across
/// those chains. Report-only; gamma values need not match.
ConditionReport validate_fb_conditions(const SingleParticleSystem& system,
                                       std::span<const DissipationChannel> channels);

/// CLS superposition sum_t c_t |phi_CLS^(offset + t*kappa)> with c_t = 1 for
/// a=+1 and (-1)^t for a=-1, normalized. For 2D Lieb the alternation runs
/// along `direction` and kappa must be 1.
Vector dark_state(const SingleParticleSystem& system, int a, int kappa, int offset = 0,
                  std::string_view direction = "x");

/// Maximum norm of O_j |state> over all jump operators; dark iff < 1e-10.
double verify_dark(const Vector& state, std::span<const JumpOperator> jumps);

}  // namespace fbdiss
