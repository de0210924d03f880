#pragma once

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "fbdiss/types.hpp"

namespace fbdiss {

enum class ModelKind { CrossStitch, Sawtooth, Lieb1D, Lieb2D, TwistedBilayerSquare, Checkerboard };
enum class Boundary { Open, Periodic };

std::string to_string(ModelKind kind);
std::string to_string(Boundary boundary);

struct CrossStitchParams {
  int cells = 2;
  double t0 = 0.0;  // intra-cell hopping amplitude
  double t1 = 1.0;  // inter-cell hopping amplitude
};

/// Sawtooth chain with the flat-band hopping ratio: diagonal bonds -sqrt(2),
/// baseline bonds -1.
struct SawtoothParams {
  int cells = 4;
};

/// Three-chain 1D Lieb lattice, five sites per cell, uniform hopping +1.
struct Lieb1DParams {
  int cells = 4;
};

/// 2D Lieb lattice, three sites per cell (A corner, B x-edge, C y-edge),
/// uniform hopping +1.
struct Lieb2DParams {
  int cells_x = 4;
  int cells_y = 4;
};

/// Two n x n square lattices, layer 2 rotated by theta about the lattice site
/// nearest the patch center. Staggered potential +delta on layer 1, -delta on
/// layer 2; intralayer hopping -t; interlayer Gaussian coupling
/// -t_perp * exp(-S^2 / (4 l0^2)) with S the in-plane distance.
struct TwistedBilayerParams {
  int n = 7;
  double t = 1.0;
  double t_perp = 10.0;
  double delta = 10.0;
  double l0 = 0.15;
  double theta_deg = 36.87;
};

/// Checkerboard lattice with complex nearest-neighbor hopping -j*exp(+-i*phi),
/// sign-alternating second-neighbor hoppings and third-neighbor hopping along
/// the sublattice diagonals. Defaults put the nearly flat band on top.
struct CheckerboardParams {
  int cells_x = 6;
  int cells_y = 6;
  double j = 1.0;
  double phi = 0.78539816339744831;       // pi/4
  double j_nnn_solid = 0.29289321881345248;   // 1/(2+sqrt(2))
  double j_nnn_dashed = -0.29289321881345248;  // -1/(2+sqrt(2))
  double j_nnnn = 0.20710678118654752;    // 1/(2+2*sqrt(2))
};

using ModelParams = std::variant<CrossStitchParams, SawtoothParams, Lieb1DParams, Lieb2DParams,
                                 TwistedBilayerParams, CheckerboardParams>;

struct ModelSpec {
  ModelParams params = CrossStitchParams{};
  Boundary boundary = Boundary::Open;

  ModelKind kind() const;
};

struct SiteIndex {
  int flat = 0;
  std::array<int, 2> cell{0, 0};
  std::string chain;
  Vec2 position{0.0, 0.0};
};

struct SingleParticleSystem {
  ModelSpec model;
  std::vector<SiteIndex> sites;
  Matrix hamiltonian;

  int dim() const { return static_cast<int>(sites.size()); }
};

struct EigenSystem {
  RealVector energies;  // ascending
  Matrix states;        // orthonormal columns aligned with energies

  int dim() const { return static_cast<int>(energies.size()); }
};

struct ClsVector {
  Vector amplitudes;  // normalized, support confined to span_cells cells
  int anchor_cell = 0;
  std::array<int, 2> anchor{0, 0};  // 2D models; anchor[0] == anchor_cell in 1D
  int span_cells = 1;
};

struct BandWindow {
  std::string label;
  int lo = 0;
  int hi = 0;  // inclusive

  int count() const { return hi - lo + 1; }
};

struct BandWindows {
  std::vector<BandWindow> windows;
  int fb_index = -1;

  const BandWindow& fb() const { return windows.at(fb_index); }
};

struct BandPolicy {
  // Explicit window when fb_lo >= 0; otherwise split the sorted spectrum at
  // every gap above gap_threshold and pick the flat band by score.
  int fb_lo = -1;
  int fb_hi = -1;
  double gap_threshold = 0.25;

  static BandPolicy explicit_window(int lo, int hi);
  static BandPolicy gap_detect(double threshold);
};

/// An ordered run of sites along which bond dissipation can act.
struct LatticeChain {
  std::string name;
  std::vector<int> sites;  // flat indices, ordered along the chain
  int sites_per_cell = 1;
  bool periodic = false;
};

SingleParticleSystem build_model(const ModelSpec& spec);
SingleParticleSystem build_twisted_bilayer(const TwistedBilayerParams& params);

/// Coinciding (layer-1, layer-2) site pairs of a twisted bilayer, sorted along
/// the two superlattice directions.
std::vector<std::pair<int, int>> superlattice_sites(const SingleParticleSystem& system,
                                                    double coincidence_tol = 1e-6);

/// The two superlattice direction vectors (minimal coincidence-lattice
/// displacements); first has polar angle in [0, 90), second in [90, 180).
std::pair<Vec2, Vec2> superlattice_directions(const SingleParticleSystem& system,
                                              double coincidence_tol = 1e-6);

EigenSystem eigendecompose(const SingleParticleSystem& system);
EigenSystem eigendecompose_hermitian(const Matrix& h);

std::vector<ClsVector> cls_states(const SingleParticleSystem& system);

BandWindows band_windows(const EigenSystem& eig, const BandPolicy& policy);

/// Chains available for bond dissipation. `direction` selects among the
/// model's directions: "" for 1D chains, "x"/"y" for Lieb2D and checkerboard
/// sublattice rows/columns, "green"/"yellow" for bilayer superlattice rows.
std::vector<LatticeChain> lattice_chains(const SingleParticleSystem& system,
                                         std::string_view direction = {});

/// Minimum number of unit cells spanned by the model's CLS. Throws NoExactCls
/// for models without one.
int cls_class_u(ModelKind kind);

/// Flat-band energy of the exact-FB models.
double fb_energy(const SingleParticleSystem& system);

}  // namespace fbdiss
