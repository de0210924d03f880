#include "fbdiss/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fbdiss/errors.hpp"

namespace fbdiss {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

void add_hop(Matrix& h, int i, int j, Complex amp) {
  h(i, j) += amp;
  h(j, i) += std::conj(amp);
}

void check_hermitian(const Matrix& h) {
  const double dev = (h - h.adjoint()).cwiseAbs().maxCoeff();
  if (dev >= 1e-12) throw NumericalFailure("built Hamiltonian is not Hermitian");
}

SingleParticleSystem build_cross_stitch(const CrossStitchParams& p, Boundary bc) {
  if (p.cells < 1) throw SizeTooSmall("cross-stitch needs at least one unit cell");
  if (bc == Boundary::Periodic && p.cells < 2)
    throw SizeTooSmall("periodic cross-stitch needs at least two unit cells");
  if (!std::isfinite(p.t0) || !std::isfinite(p.t1)) throw InvalidParam("non-finite hopping");
  const int l = p.cells;
  SingleParticleSystem sys;
  sys.sites.reserve(2 * l);
  for (int j = 0; j < l; ++j) {
    sys.sites.push_back({2 * j, {j, 0}, "upper", {double(j), 0.5}});
    sys.sites.push_back({2 * j + 1, {j, 0}, "lower", {double(j), -0.5}});
  }
  Matrix h = Matrix::Zero(2 * l, 2 * l);
  for (int j = 0; j < l; ++j) {
    add_hop(h, 2 * j, 2 * j + 1, -p.t0);
    const bool last = (j == l - 1);
    if (last && bc == Boundary::Open) continue;
    const int k = last ? 0 : j + 1;
    add_hop(h, 2 * j, 2 * k, -p.t1);
    add_hop(h, 2 * j, 2 * k + 1, -p.t1);
    add_hop(h, 2 * j + 1, 2 * k, -p.t1);
    add_hop(h, 2 * j + 1, 2 * k + 1, -p.t1);
  }
  sys.hamiltonian = std::move(h);
  return sys;
}

SingleParticleSystem build_sawtooth(const SawtoothParams& p, Boundary bc) {
  if (p.cells < 2) throw SizeTooSmall("sawtooth needs at least two unit cells");
  const int l = p.cells;
  SingleParticleSystem sys;
  sys.sites.reserve(2 * l);
  for (int j = 0; j < l; ++j) {
    sys.sites.push_back({2 * j, {j, 0}, "upper", {j + 0.5, 1.0}});
    sys.sites.push_back({2 * j + 1, {j, 0}, "lower", {double(j), 0.0}});
  }
  Matrix h = Matrix::Zero(2 * l, 2 * l);
  for (int j = 0; j < l; ++j) {
    add_hop(h, 2 * j, 2 * j + 1, -kSqrt2);  // apex to baseline within the cell
    const bool last = (j == l - 1);
    if (last && bc == Boundary::Open) continue;
    const int k = last ? 0 : j + 1;
    add_hop(h, 2 * j, 2 * k + 1, -kSqrt2);      // apex to next baseline
    add_hop(h, 2 * j + 1, 2 * k + 1, -1.0);     // baseline chain
  }
  sys.hamiltonian = std::move(h);
  return sys;
}

// Site order within a Lieb cell: u1, u2, m, l1, l2 (middle site is the third,
// matching the flat-index position 5(z-1)+3 in 1-based counting).
SingleParticleSystem build_lieb1d(const Lieb1DParams& p, Boundary bc) {
  if (p.cells < 2) throw SizeTooSmall("1D Lieb needs at least two unit cells");
  const int l = p.cells;
  SingleParticleSystem sys;
  sys.sites.reserve(5 * l);
  for (int n = 0; n < l; ++n) {
    const double x = 2.0 * n;
    sys.sites.push_back({5 * n + 0, {n, 0}, "upper", {x, 1.0}});
    sys.sites.push_back({5 * n + 1, {n, 0}, "upper", {x + 1.0, 1.0}});
    sys.sites.push_back({5 * n + 2, {n, 0}, "middle", {x, 0.0}});
    sys.sites.push_back({5 * n + 3, {n, 0}, "lower", {x, -1.0}});
    sys.sites.push_back({5 * n + 4, {n, 0}, "lower", {x + 1.0, -1.0}});
  }
  Matrix h = Matrix::Zero(5 * l, 5 * l);
  for (int n = 0; n < l; ++n) {
    const int b = 5 * n;
    add_hop(h, b + 0, b + 1, 1.0);  // u1 - u2
    add_hop(h, b + 0, b + 2, 1.0);  // u1 - m
    add_hop(h, b + 3, b + 4, 1.0);  // l1 - l2
    add_hop(h, b + 3, b + 2, 1.0);  // l1 - m
    const bool last = (n == l - 1);
    if (last && bc == Boundary::Open) continue;
    const int nb = last ? 0 : 5 * (n + 1);
    add_hop(h, b + 1, nb + 0, 1.0);  // u2 - next u1
    add_hop(h, b + 4, nb + 3, 1.0);  // l2 - next l1
  }
  sys.hamiltonian = std::move(h);
  return sys;
}

SingleParticleSystem build_lieb2d(const Lieb2DParams& p, Boundary bc) {
  if (p.cells_x < 2 || p.cells_y < 2) throw SizeTooSmall("2D Lieb needs at least 2x2 cells");
  const int lx = p.cells_x, ly = p.cells_y;
  const auto idx = [lx](int x, int y, int s) { return 3 * (y * lx + x) + s; };
  SingleParticleSystem sys;
  sys.sites.reserve(3 * lx * ly);
  for (int y = 0; y < ly; ++y)
    for (int x = 0; x < lx; ++x) {
      sys.sites.push_back({idx(x, y, 0), {x, y}, "A", {double(x), double(y)}});
      sys.sites.push_back({idx(x, y, 1), {x, y}, "B", {x + 0.5, double(y)}});
      sys.sites.push_back({idx(x, y, 2), {x, y}, "C", {double(x), y + 0.5}});
    }
  Matrix h = Matrix::Zero(3 * lx * ly, 3 * lx * ly);
  for (int y = 0; y < ly; ++y)
    for (int x = 0; x < lx; ++x) {
      add_hop(h, idx(x, y, 0), idx(x, y, 1), 1.0);  // A - B
      add_hop(h, idx(x, y, 0), idx(x, y, 2), 1.0);  // A - C
      if (x + 1 < lx)
        add_hop(h, idx(x, y, 1), idx(x + 1, y, 0), 1.0);
      else if (bc == Boundary::Periodic)
        add_hop(h, idx(x, y, 1), idx(0, y, 0), 1.0);
      if (y + 1 < ly)
        add_hop(h, idx(x, y, 2), idx(x, y + 1, 0), 1.0);
      else if (bc == Boundary::Periodic)
        add_hop(h, idx(x, y, 2), idx(x, 0, 0), 1.0);
    }
  sys.hamiltonian = std::move(h);
  return sys;
}

// Checkerboard: sublattice A at integer points, B offset by (1/2, 1/2).
// NN phase +phi on A->B bonds pointing into the (+x+y) and (-x-y) quadrants,
// -phi otherwise. Second-neighbor amplitude j_nnn_solid along x for A and
// along y for B, j_nnn_dashed on the other axis. Third-neighbor j_nnnn along
// both sublattice diagonals. This orientation puts the nearly flat band at
// the top of the spectrum with the default parameters.
SingleParticleSystem build_checkerboard(const CheckerboardParams& p, Boundary bc) {
  if (p.cells_x < 2 || p.cells_y < 2) throw SizeTooSmall("checkerboard needs at least 2x2 cells");
  if (bc == Boundary::Periodic && (p.cells_x < 3 || p.cells_y < 3))
    throw SizeTooSmall("periodic checkerboard needs at least 3x3 cells");
  const int lx = p.cells_x, ly = p.cells_y;
  const auto cell = [&](int x, int y) {
    if (bc == Boundary::Periodic) {
      x = (x % lx + lx) % lx;
      y = (y % ly + ly) % ly;
    } else if (x < 0 || x >= lx || y < 0 || y >= ly) {
      return -1;
    }
    return 2 * (y * lx + x);
  };
  SingleParticleSystem sys;
  sys.sites.reserve(2 * lx * ly);
  for (int y = 0; y < ly; ++y)
    for (int x = 0; x < lx; ++x) {
      sys.sites.push_back({cell(x, y), {x, y}, "A", {double(x), double(y)}});
      sys.sites.push_back({cell(x, y) + 1, {x, y}, "B", {x + 0.5, y + 0.5}});
    }
  const int dim = 2 * lx * ly;
  Matrix h = Matrix::Zero(dim, dim);
  const Complex phase_pp = -p.j * std::exp(kImag * p.phi);   // A->B along (+,+)/(-,-)
  const Complex phase_pm = -p.j * std::exp(-kImag * p.phi);  // A->B along (+,-)/(-,+)
  for (int y = 0; y < ly; ++y)
    for (int x = 0; x < lx; ++x) {
      const int a = cell(x, y);
      // NN bonds from A(x,y) to the four surrounding B sites.
      const struct { int dx, dy; Complex amp; } nn[4] = {
          {0, 0, phase_pp},    // B at (+1/2, +1/2)
          {-1, -1, phase_pp},  // B at (-1/2, -1/2)
          {-1, 0, phase_pm},   // B at (-1/2, +1/2)
          {0, -1, phase_pm},   // B at (+1/2, -1/2)
      };
      for (const auto& b : nn) {
        const int c = cell(x + b.dx, y + b.dy);
        if (c >= 0) add_hop(h, c + 1, a, b.amp);
      }
      // NNN: axis bonds within each sublattice (forward only to avoid
      // double counting).
      const int ax = cell(x + 1, y), ay = cell(x, y + 1);
      if (ax >= 0) {
        add_hop(h, a, ax, -p.j_nnn_solid);
        add_hop(h, a + 1, ax + 1, -p.j_nnn_dashed);
      }
      if (ay >= 0) {
        add_hop(h, a, ay, -p.j_nnn_dashed);
        add_hop(h, a + 1, ay + 1, -p.j_nnn_solid);
      }
      // NNNN: diagonal bonds within each sublattice.
      for (const auto [dx, dy] : {std::pair{1, 1}, std::pair{1, -1}}) {
        const int c = cell(x + dx, y + dy);
        if (c >= 0) {
          add_hop(h, a, c, -p.j_nnnn);
          add_hop(h, a + 1, c + 1, -p.j_nnnn);
        }
      }
    }
  sys.hamiltonian = std::move(h);
  return sys;
}

bool is_bilayer(const SingleParticleSystem& sys) {
  return sys.model.kind() == ModelKind::TwistedBilayerSquare;
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::CrossStitch: return "cross_stitch";
    case ModelKind::Sawtooth: return "sawtooth";
    case ModelKind::Lieb1D: return "lieb1d";
    case ModelKind::Lieb2D: return "lieb2d";
    case ModelKind::TwistedBilayerSquare: return "twisted_bilayer";
    case ModelKind::Checkerboard: return "checkerboard";
  }
  return "unknown";
}

std::string to_string(Boundary boundary) {
  return boundary == Boundary::Open ? "obc" : "pbc";
}

ModelKind ModelSpec::kind() const {
  return static_cast<ModelKind>(params.index());
}

BandPolicy BandPolicy::explicit_window(int lo, int hi) {
  BandPolicy p;
  p.fb_lo = lo;
  p.fb_hi = hi;
  return p;
}

BandPolicy BandPolicy::gap_detect(double threshold) {
  BandPolicy p;
  p.gap_threshold = threshold;
  return p;
}

SingleParticleSystem build_twisted_bilayer(const TwistedBilayerParams& p) {
  if (p.n < 2) throw SizeTooSmall("bilayer needs at least a 2x2 patch per layer");
  if (p.l0 <= 0.0) throw InvalidParam("bilayer Gaussian width l0 must be positive");
  if (!std::isfinite(p.t) || !std::isfinite(p.t_perp) || !std::isfinite(p.delta))
    throw InvalidParam("non-finite bilayer parameter");
  const int n = p.n;
  const int per_layer = n * n;
  const double theta = p.theta_deg * M_PI / 180.0;
  // Rotation center: the lattice site nearest the patch center.
  const double c = std::floor((n - 1) / 2.0 + 0.5);
  const Eigen::Rotation2D<double> rot(theta);

  SingleParticleSystem sys;
  sys.sites.reserve(2 * per_layer);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      sys.sites.push_back({y * n + x, {x, y}, "layer1", {double(x), double(y)}});
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      Vec2 pos = rot * (Vec2(x, y) - Vec2(c, c)) + Vec2(c, c);
      sys.sites.push_back({per_layer + y * n + x, {x, y}, "layer2", pos});
    }

  const int dim = 2 * per_layer;
  Matrix h = Matrix::Zero(dim, dim);
  for (int i = 0; i < per_layer; ++i) {
    h(i, i) = p.delta;                          // -delta * (-1)^1
    h(per_layer + i, per_layer + i) = -p.delta; // -delta * (-1)^2
  }
  for (int layer = 0; layer < 2; ++layer) {
    const int base = layer * per_layer;
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        if (x + 1 < n) add_hop(h, base + y * n + x, base + y * n + x + 1, -p.t);
        if (y + 1 < n) add_hop(h, base + y * n + x, base + (y + 1) * n + x, -p.t);
      }
  }
  const double gauss_cut = 1e-12;
  for (int i = 0; i < per_layer; ++i)
    for (int j = 0; j < per_layer; ++j) {
      const double s2 = (sys.sites[i].position - sys.sites[per_layer + j].position).squaredNorm();
      const double w = std::exp(-s2 / (4.0 * p.l0 * p.l0));
      if (w >= gauss_cut) add_hop(h, i, per_layer + j, -p.t_perp * w);
    }
  sys.hamiltonian = std::move(h);
  sys.model.params = p;
  sys.model.boundary = Boundary::Open;
  check_hermitian(sys.hamiltonian);
  return sys;
}

SingleParticleSystem build_model(const ModelSpec& spec) {
  SingleParticleSystem sys = std::visit(
      [&](const auto& p) -> SingleParticleSystem {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, CrossStitchParams>) {
          return build_cross_stitch(p, spec.boundary);
        } else if constexpr (std::is_same_v<T, SawtoothParams>) {
          return build_sawtooth(p, spec.boundary);
        } else if constexpr (std::is_same_v<T, Lieb1DParams>) {
          return build_lieb1d(p, spec.boundary);
        } else if constexpr (std::is_same_v<T, Lieb2DParams>) {
          return build_lieb2d(p, spec.boundary);
        } else if constexpr (std::is_same_v<T, TwistedBilayerParams>) {
          if (spec.boundary == Boundary::Periodic)
            throw InvalidParam("twisted bilayer supports open boundaries only");
          return build_twisted_bilayer(p);
        } else {
          return build_checkerboard(p, spec.boundary);
        }
      },
      spec.params);
  sys.model = spec;
  check_hermitian(sys.hamiltonian);
  return sys;
}

std::vector<std::pair<int, int>> superlattice_sites(const SingleParticleSystem& system,
                                                    double coincidence_tol) {
  if (!is_bilayer(system)) throw NotBilayer("superlattice_sites: not a twisted bilayer");
  const int per_layer = system.dim() / 2;
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < per_layer; ++i)
    for (int j = 0; j < per_layer; ++j)
      if ((system.sites[i].position - system.sites[per_layer + j].position).norm() <
          coincidence_tol)
        pairs.emplace_back(i, per_layer + j);
  if (pairs.size() >= 2) {
    const auto [d1, d2] = superlattice_directions(system, coincidence_tol);
    Eigen::Matrix2d basis;
    basis.col(0) = d1;
    basis.col(1) = d2;
    const Eigen::Matrix2d inv = basis.inverse();
    const Vec2 origin = system.sites[pairs.front().first].position;
    std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& a, const auto& b) {
      const Vec2 pa = inv * (system.sites[a.first].position - origin);
      const Vec2 pb = inv * (system.sites[b.first].position - origin);
      if (std::abs(pa.y() - pb.y()) > 1e-9) return pa.y() < pb.y();
      return pa.x() < pb.x();
    });
  }
  return pairs;
}

std::pair<Vec2, Vec2> superlattice_directions(const SingleParticleSystem& system,
                                              double coincidence_tol) {
  if (!is_bilayer(system)) throw NotBilayer("superlattice_directions: not a twisted bilayer");
  const int per_layer = system.dim() / 2;
  std::vector<Vec2> points;
  for (int i = 0; i < per_layer; ++i)
    for (int j = 0; j < per_layer; ++j)
      if ((system.sites[i].position - system.sites[per_layer + j].position).norm() <
          coincidence_tol)
        points.push_back(system.sites[i].position);
  if (points.size() < 2)
    throw InvalidParam("superlattice_directions: fewer than two coincidence points");
  double min_norm = 1e300;
  for (size_t a = 0; a < points.size(); ++a)
    for (size_t b = a + 1; b < points.size(); ++b)
      min_norm = std::min(min_norm, (points[b] - points[a]).norm());
  Vec2 d1 = Vec2::Zero(), d2 = Vec2::Zero();
  bool have1 = false, have2 = false;
  for (size_t a = 0; a < points.size(); ++a)
    for (size_t b = 0; b < points.size(); ++b) {
      if (a == b) continue;
      const Vec2 d = points[b] - points[a];
      if (d.norm() > min_norm * (1.0 + 1e-9)) continue;
      const double ang = std::atan2(d.y(), d.x());
      if (ang >= -1e-12 && ang < M_PI / 2 - 1e-12 && !have1) {
        d1 = d;
        have1 = true;
      } else if (ang >= M_PI / 2 - 1e-12 && ang < M_PI - 1e-12 && !have2) {
        d2 = d;
        have2 = true;
      }
    }
  if (!have1 || !have2)
    throw InvalidParam("superlattice_directions: could not identify two directions");
  return {d1, d2};
}

EigenSystem eigendecompose_hermitian(const Matrix& h) {
  if (h.rows() != h.cols()) throw DimensionMismatch("eigendecompose: matrix not square");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success)
    throw NumericalFailure("Hermitian eigendecomposition did not converge");
  EigenSystem eig{solver.eigenvalues(), solver.eigenvectors()};
  const int d = eig.dim();
  constexpr double cluster_tol = 1e-8;
  constexpr double amp_tol = 1e-6;
  const auto fix_phase = [&](int col) {
    for (int s = 0; s < d; ++s) {
      const Complex a = eig.states(s, col);
      if (std::abs(a) > amp_tol) {
        eig.states.col(col) *= std::conj(a) / std::abs(a);
        break;
      }
    }
  };
  // Degenerate clusters get a canonical basis: sweep the site basis in flat
  // order and keep the projected directions. This makes the ordering (and the
  // resulting rho_mn plots) reproducible across runs.
  int i = 0;
  while (i < d) {
    int j = i;
    while (j + 1 < d && eig.energies(j + 1) - eig.energies(j) < cluster_tol) ++j;
    const int size = j - i + 1;
    if (size > 1) {
      const Matrix cluster = eig.states.middleCols(i, size);
      Matrix basis(d, size);
      int found = 0;
      for (int s = 0; s < d && found < size; ++s) {
        Vector w = cluster * cluster.row(s).adjoint();
        if (found > 0)
          w -= basis.leftCols(found) * (basis.leftCols(found).adjoint() * w);
        if (w.norm() > amp_tol) basis.col(found++) = w.normalized();
      }
      for (int k = 0; found < size; ++k) {  // fallback, never expected to fire
        Vector w = cluster.col(k % size);
        if (found > 0)
          w -= basis.leftCols(found) * (basis.leftCols(found).adjoint() * w);
        if (w.norm() > 1e-9) basis.col(found++) = w.normalized();
      }
      eig.states.middleCols(i, size) = basis;
    }
    for (int k = i; k <= j; ++k) fix_phase(k);
    i = j + 1;
  }
  return eig;
}

EigenSystem eigendecompose(const SingleParticleSystem& system) {
  return eigendecompose_hermitian(system.hamiltonian);
}

int cls_class_u(ModelKind kind) {
  switch (kind) {
    case ModelKind::CrossStitch: return 1;
    case ModelKind::Sawtooth: return 2;
    case ModelKind::Lieb1D: return 2;
    case ModelKind::Lieb2D: return 2;
    default:
      throw NoExactCls("model " + to_string(kind) + " has no exact CLS");
  }
}

double fb_energy(const SingleParticleSystem& system) {
  switch (system.model.kind()) {
    case ModelKind::CrossStitch:
      return std::get<CrossStitchParams>(system.model.params).t0;
    case ModelKind::Sawtooth: return 2.0;
    case ModelKind::Lieb1D: return 0.0;
    case ModelKind::Lieb2D: return 0.0;
    default:
      throw NoExactCls("model " + to_string(system.model.kind()) + " has no exact flat band");
  }
}

std::vector<ClsVector> cls_states(const SingleParticleSystem& system) {
  const ModelKind kind = system.model.kind();
  const int u = cls_class_u(kind);
  const int d = system.dim();
  std::vector<ClsVector> out;

  if (kind == ModelKind::Lieb2D) {
    const auto& p = std::get<Lieb2DParams>(system.model.params);
    if (p.cells_x < 2 * u || p.cells_y < 2 * u)
      throw SizeTooSmall("2D Lieb needs at least 2U cells per direction for CLS states");
    if (p.cells_x % u || p.cells_y % u)
      throw InvalidParam("2D Lieb cell counts must be multiples of U for the CLS tiling");
    const int lx = p.cells_x;
    const auto idx = [lx](int x, int y, int s) { return 3 * (y * lx + x) + s; };
    for (int ay = 0; ay + 1 < p.cells_y; ay += u)
      for (int ax = 0; ax + 1 < p.cells_x; ax += u) {
        Vector amp = Vector::Zero(d);
        amp(idx(ax, ay, 1)) = 0.5;       // B(ax, ay)
        amp(idx(ax, ay + 1, 1)) = 0.5;   // B(ax, ay+1)
        amp(idx(ax, ay, 2)) = -0.5;      // C(ax, ay)
        amp(idx(ax + 1, ay, 2)) = -0.5;  // C(ax+1, ay)
        const int linear = (ay / u) * (p.cells_x / u) + ax / u;
        out.push_back({std::move(amp), linear, {ax, ay}, u});
      }
    return out;
  }

  int l = 0;
  switch (kind) {
    case ModelKind::CrossStitch: l = std::get<CrossStitchParams>(system.model.params).cells; break;
    case ModelKind::Sawtooth: l = std::get<SawtoothParams>(system.model.params).cells; break;
    case ModelKind::Lieb1D: l = std::get<Lieb1DParams>(system.model.params).cells; break;
    default: throw NoExactCls("model " + to_string(kind) + " has no exact CLS");
  }
  if (l < 2 * u) throw SizeTooSmall("need at least 2U unit cells for CLS states");
  if (l % u) throw InvalidParam("cell count must be a multiple of U for the CLS tiling");

  for (int a = 0; a + u <= l; a += u) {
    Vector amp = Vector::Zero(d);
    switch (kind) {
      case ModelKind::CrossStitch:
        amp(2 * a) = M_SQRT1_2;
        amp(2 * a + 1) = -M_SQRT1_2;
        break;
      case ModelKind::Sawtooth:
        amp(2 * a) = 0.5;            // apex of first cell
        amp(2 * (a + 1)) = 0.5;      // apex of second cell
        amp(2 * (a + 1) + 1) = -kSqrt2 / 2.0;  // baseline of second cell
        break;
      case ModelKind::Lieb1D:
        amp(5 * a + 1) = 0.5;        // u2 of first cell
        amp(5 * a + 2) = -0.5;       // middle of first cell
        amp(5 * a + 4) = 0.5;        // l2 of first cell
        amp(5 * (a + 1) + 2) = -0.5; // middle of second cell
        break;
      default: break;
    }
    out.push_back({std::move(amp), a, {a, 0}, u});
  }
  return out;
}

BandWindows band_windows(const EigenSystem& eig, const BandPolicy& policy) {
  const int d = eig.dim();
  BandWindows out;
  if (policy.fb_lo >= 0) {
    if (policy.fb_lo > policy.fb_hi || policy.fb_hi >= d)
      throw BadWindow("explicit band window out of range");
    if (policy.fb_lo > 0) out.windows.push_back({"below", 0, policy.fb_lo - 1});
    out.fb_index = static_cast<int>(out.windows.size());
    out.windows.push_back({"fb", policy.fb_lo, policy.fb_hi});
    if (policy.fb_hi + 1 < d) out.windows.push_back({"above", policy.fb_hi + 1, d - 1});
    return out;
  }

  // Gap detection: split the sorted spectrum at every gap above the
  // threshold. A flat band sitting inside a dispersive continuum needs a
  // threshold below its bounding gaps; extra splits inside the dispersive
  // region are harmless because the flat-band window is selected by score.
  std::vector<int> splits;  // split between i and i+1
  for (int i = 0; i + 1 < d; ++i)
    if (eig.energies(i + 1) - eig.energies(i) > policy.gap_threshold) splits.push_back(i);
  if (splits.empty())
    throw AmbiguousBands("gap detection found no spectral gap above the threshold");
  int lo = 0;
  for (int s : splits) {
    out.windows.push_back({"band" + std::to_string(out.windows.size()), lo, s});
    lo = s + 1;
  }
  out.windows.push_back({"band" + std::to_string(out.windows.size()), lo, d - 1});

  // The flat band is the window that packs the most states into the least
  // spread.
  double best = -1.0;
  for (size_t w = 0; w < out.windows.size(); ++w) {
    const auto& win = out.windows[w];
    const double spread = eig.energies(win.hi) - eig.energies(win.lo);
    const double score = win.count() / (1.0 + spread);
    if (score > best) {
      best = score;
      out.fb_index = static_cast<int>(w);
    }
  }
  out.windows[out.fb_index].label = "fb";
  return out;
}

std::vector<LatticeChain> lattice_chains(const SingleParticleSystem& system,
                                         std::string_view direction) {
  const ModelKind kind = system.model.kind();
  const bool periodic = system.model.boundary == Boundary::Periodic;
  std::vector<LatticeChain> chains;

  switch (kind) {
    case ModelKind::CrossStitch:
    case ModelKind::Sawtooth: {
      if (!direction.empty()) throw UnknownChainStructure("1D model has no named directions");
      const int l = system.dim() / 2;
      LatticeChain upper{"upper", {}, 1, periodic}, lower{"lower", {}, 1, periodic};
      for (int j = 0; j < l; ++j) {
        upper.sites.push_back(2 * j);
        lower.sites.push_back(2 * j + 1);
      }
      chains = {std::move(upper), std::move(lower)};
      break;
    }
    case ModelKind::Lieb1D: {
      if (!direction.empty()) throw UnknownChainStructure("1D model has no named directions");
      const int l = system.dim() / 5;
      LatticeChain upper{"upper", {}, 2, periodic}, middle{"middle", {}, 1, periodic},
          lower{"lower", {}, 2, periodic};
      for (int n = 0; n < l; ++n) {
        upper.sites.push_back(5 * n);
        upper.sites.push_back(5 * n + 1);
        middle.sites.push_back(5 * n + 2);
        lower.sites.push_back(5 * n + 3);
        lower.sites.push_back(5 * n + 4);
      }
      chains = {std::move(upper), std::move(middle), std::move(lower)};
      break;
    }
    case ModelKind::Lieb2D: {
      const auto& p = std::get<Lieb2DParams>(system.model.params);
      const auto idx = [&](int x, int y, int s) { return 3 * (y * p.cells_x + x) + s; };
      if (direction == "x") {
        for (int y = 0; y < p.cells_y; ++y) {
          LatticeChain ab{"AB:row" + std::to_string(y), {}, 2, periodic};
          LatticeChain cc{"C:row" + std::to_string(y), {}, 1, periodic};
          for (int x = 0; x < p.cells_x; ++x) {
            ab.sites.push_back(idx(x, y, 0));
            ab.sites.push_back(idx(x, y, 1));
            cc.sites.push_back(idx(x, y, 2));
          }
          chains.push_back(std::move(ab));
          chains.push_back(std::move(cc));
        }
      } else if (direction == "y") {
        for (int x = 0; x < p.cells_x; ++x) {
          LatticeChain ac{"AC:col" + std::to_string(x), {}, 2, periodic};
          LatticeChain bb{"B:col" + std::to_string(x), {}, 1, periodic};
          for (int y = 0; y < p.cells_y; ++y) {
            ac.sites.push_back(idx(x, y, 0));
            ac.sites.push_back(idx(x, y, 2));
            bb.sites.push_back(idx(x, y, 1));
          }
          chains.push_back(std::move(ac));
          chains.push_back(std::move(bb));
        }
      } else {
        throw UnknownChainStructure("2D Lieb chains need direction \"x\" or \"y\"");
      }
      break;
    }
    case ModelKind::TwistedBilayerSquare: {
      if (direction != "green" && direction != "yellow")
        throw UnknownChainStructure("bilayer chains need direction \"green\" or \"yellow\"");
      const auto pairs = superlattice_sites(system);
      if (pairs.size() < 2)
        throw UnknownChainStructure("bilayer has fewer than two superlattice sites");
      const auto [green, yellow] = superlattice_directions(system);
      const Vec2 along = (direction == "green") ? green : yellow;
      const Vec2 across = (direction == "green") ? yellow : green;
      const Vec2 origin = system.sites[pairs.front().first].position;
      // Group superlattice sites into rows transverse to the chosen direction.
      std::map<long long, std::vector<std::pair<double, int>>> rows;
      for (const auto& pr : pairs) {
        const Vec2 rel = system.sites[pr.first].position - origin;
        const double t = rel.dot(across) / across.squaredNorm();
        const double s = rel.dot(along) / along.squaredNorm();
        rows[std::llround(t * 1e6)].emplace_back(s, pr.first);
      }
      int row_id = 0;
      for (auto& [key, row] : rows) {
        std::sort(row.begin(), row.end());
        LatticeChain chain{"superlattice:" + std::string(direction) + ":row" +
                               std::to_string(row_id++),
                           {}, 1, false};
        for (const auto& [s, flat] : row) chain.sites.push_back(flat);
        chains.push_back(std::move(chain));
      }
      break;
    }
    case ModelKind::Checkerboard: {
      const auto& p = std::get<CheckerboardParams>(system.model.params);
      const auto idx = [&](int x, int y, int s) { return 2 * (y * p.cells_x + x) + s; };
      if (direction == "diag_up" || direction == "diag_down") {
        // Chains of alternating A/B sites along the nearest-neighbor bond
        // directions (+1,+1)/2 and (+1,-1)/2.
        const int dy = direction == "diag_up" ? 1 : -1;
        const int lx = p.cells_x, ly = p.cells_y;
        std::vector<char> visited(lx * ly, 0);
        const auto step = [&](int& x, int& y) {
          x += 1;
          y += dy;
          if (periodic) {
            x = (x % lx + lx) % lx;
            y = (y % ly + ly) % ly;
          }
        };
        for (int y0 = 0; y0 < ly; ++y0)
          for (int x0 = 0; x0 < lx; ++x0) {
            if (visited[y0 * lx + x0]) continue;
            // Walk backwards to the open start of this diagonal.
            int x = x0, y = y0;
            if (!periodic) {
              while (x - 1 >= 0 && (dy > 0 ? y - 1 >= 0 : y + 1 < ly)) {
                x -= 1;
                y -= dy;
              }
            }
            LatticeChain chain{"nn:" + std::string(direction) + ":" + std::to_string(x) + "," +
                                   std::to_string(y),
                               {}, 2, periodic};
            int cx = x, cy = y;
            while (true) {
              if (visited[cy * lx + cx]) break;
              visited[cy * lx + cx] = 1;
              chain.sites.push_back(idx(cx, cy, 0));                    // A(cx, cy)
              const int by = dy > 0 ? cy : cy - 1;                      // B partner along the bond
              const int byw = periodic ? ((by % ly + ly) % ly) : by;
              if (byw >= 0 && byw < ly) chain.sites.push_back(idx(cx, byw, 1));
              else break;
              step(cx, cy);
              if (!periodic && (cx >= lx || cy < 0 || cy >= ly)) break;
            }
            if (chain.sites.size() >= 2) chains.push_back(std::move(chain));
          }
      } else if (direction == "x") {
        for (int y = 0; y < p.cells_y; ++y)
          for (int s = 0; s < 2; ++s) {
            LatticeChain chain{std::string(s == 0 ? "A" : "B") + ":row" + std::to_string(y),
                               {}, 1, periodic};
            for (int x = 0; x < p.cells_x; ++x) chain.sites.push_back(idx(x, y, s));
            chains.push_back(std::move(chain));
          }
      } else if (direction == "y") {
        for (int x = 0; x < p.cells_x; ++x)
          for (int s = 0; s < 2; ++s) {
            LatticeChain chain{std::string(s == 0 ? "A" : "B") + ":col" + std::to_string(x),
                               {}, 1, periodic};
            for (int y = 0; y < p.cells_y; ++y) chain.sites.push_back(idx(x, y, s));
            chains.push_back(std::move(chain));
          }
      } else {
        throw UnknownChainStructure("checkerboard chains need direction \"x\" or \"y\"");
      }
      break;
    }
  }
  return chains;
}

}  // namespace fbdiss
