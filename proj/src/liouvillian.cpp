#include "fbdiss/liouvillian.hpp"

#include <algorithm>
#include <numeric>

#include "fbdiss/errors.hpp"
#include "fbdiss/linalg.hpp"

namespace fbdiss {

namespace {

// s += coeff * (I (x) a), i.e. left multiplication vec(a * rho).
void add_left_mult(Matrix& s, const Matrix& a, Complex coeff) {
  const int d = static_cast<int>(a.rows());
  for (int c = 0; c < d; ++c) s.block(c * d, c * d, d, d) += coeff * a;
}

// s += coeff * (a^T (x) I), i.e. right multiplication vec(rho * a).
void add_right_mult(Matrix& s, const Matrix& a, Complex coeff) {
  const int d = static_cast<int>(a.rows());
  for (int c = 0; c < d; ++c)
    for (int j = 0; j < d; ++j) {
      const Complex val = coeff * a(j, c);
      if (val == Complex(0.0, 0.0)) continue;
      for (int r = 0; r < d; ++r) s(c * d + r, j * d + r) += val;
    }
}

void check_square(const Matrix& h) {
  if (h.rows() != h.cols()) throw DimensionMismatch("Hamiltonian must be square");
}

void check_rho(const Matrix& h, const Matrix& rho) {
  if (rho.rows() != rho.cols() || rho.rows() != h.rows())
    throw DimensionMismatch("density matrix dimension does not match the Hamiltonian");
}

Matrix unitary_part(const Matrix& h, const Matrix& rho) {
  return -kImag * (h * rho - rho * h);
}

LiouvillianSpectrum sorted_spectrum(linalg::ComplexEig eig, bool keep_vectors) {
  const auto n = eig.values.size();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const Complex za = eig.values(a), zb = eig.values(b);
    if (std::abs(za.real()) != std::abs(zb.real()))
      return std::abs(za.real()) < std::abs(zb.real());
    if (za.real() != zb.real()) return za.real() < zb.real();
    return za.imag() < zb.imag();
  });
  LiouvillianSpectrum out;
  out.values.resize(n);
  if (keep_vectors) {
    out.right.resize(n, n);
    if (eig.left.size() > 0) out.left.resize(n, n);
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = eig.values(order[k]);
    if (keep_vectors) {
      out.right.col(k) = eig.right.col(order[k]);
      if (eig.left.size() > 0) out.left.col(k) = eig.left.col(order[k]);
    }
  }
  return out;
}

}  // namespace

Matrix apply_lindblad(const Matrix& h, std::span<const JumpOperator> jumps, const Matrix& rho) {
  check_square(h);
  check_rho(h, rho);
  Matrix out = unitary_part(h, rho);
  for (const auto& jump : jumps) {
    const Complex overlap = jump.w.adjoint() * rho * jump.w;  // w^dag rho w
    out += jump.gamma * overlap * (jump.v * jump.v.adjoint());
    const double v2 = jump.v.squaredNorm();
    const Matrix w_rho = jump.w * (jump.w.adjoint() * rho);
    out -= 0.5 * jump.gamma * v2 * (w_rho + w_rho.adjoint());
  }
  return out;
}

Matrix apply_lindblad(const Matrix& h, std::span<const GenericJump> jumps, const Matrix& rho) {
  check_square(h);
  check_rho(h, rho);
  Matrix out = unitary_part(h, rho);
  for (const auto& jump : jumps) {
    if (jump.op.rows() != h.rows() || jump.op.cols() != h.cols())
      throw DimensionMismatch("jump operator dimension does not match the Hamiltonian");
    const Matrix ldag_l = jump.op.adjoint() * jump.op;
    out += jump.gamma * (jump.op * rho * jump.op.adjoint());
    out -= 0.5 * jump.gamma * (ldag_l * rho + rho * ldag_l);
  }
  return out;
}

Superoperator assemble_superoperator(const Matrix& h, std::span<const JumpOperator> jumps,
                                     int dim_cap) {
  check_square(h);
  const int d = static_cast<int>(h.rows());
  if (d > dim_cap)
    throw DimensionTooLarge("superoperator dimension " + std::to_string(d) + "^2 exceeds cap " +
                            std::to_string(dim_cap) + "^2");
  Superoperator s{Matrix::Zero(Eigen::Index(d) * d, Eigen::Index(d) * d), d};
  add_left_mult(s.matrix, h, -kImag);
  add_right_mult(s.matrix, h, kImag);
  Matrix k_sum = Matrix::Zero(d, d);  // sum_k gamma_k L_k^dag L_k
  for (const auto& jump : jumps) {
    if (jump.v.size() != d) throw DimensionMismatch("jump operator dimension mismatch");
    // vec(L rho L^dag) with L = v w^dag factors into an outer product.
    const Vector p = linalg::vectorize(jump.v * jump.v.adjoint());
    const Vector q = linalg::vectorize(jump.w.conjugate() * jump.w.transpose());
    s.matrix.noalias() += jump.gamma * p * q.transpose();
    k_sum += (jump.gamma * jump.v.squaredNorm()) * (jump.w * jump.w.adjoint());
  }
  add_left_mult(s.matrix, k_sum, -0.5);
  add_right_mult(s.matrix, k_sum, -0.5);
  return s;
}

Superoperator assemble_superoperator(const Matrix& h, std::span<const GenericJump> jumps,
                                     int dim_cap) {
  check_square(h);
  const int d = static_cast<int>(h.rows());
  if (d > dim_cap)
    throw DimensionTooLarge("superoperator dimension " + std::to_string(d) + "^2 exceeds cap " +
                            std::to_string(dim_cap) + "^2");
  Superoperator s{Matrix::Zero(Eigen::Index(d) * d, Eigen::Index(d) * d), d};
  add_left_mult(s.matrix, h, -kImag);
  add_right_mult(s.matrix, h, kImag);
  Matrix k_sum = Matrix::Zero(d, d);
  for (const auto& jump : jumps) {
    if (jump.op.rows() != d || jump.op.cols() != d)
      throw DimensionMismatch("jump operator dimension mismatch");
    // kron(conj(L), L) block by block.
    for (int c = 0; c < d; ++c)
      for (int j = 0; j < d; ++j) {
        const Complex val = jump.gamma * std::conj(jump.op(c, j));
        if (val == Complex(0.0, 0.0)) continue;
        s.matrix.block(c * d, j * d, d, d) += val * jump.op;
      }
    k_sum += jump.gamma * (jump.op.adjoint() * jump.op);
  }
  add_left_mult(s.matrix, k_sum, -0.5);
  add_right_mult(s.matrix, k_sum, -0.5);
  return s;
}

LiouvillianSpectrum superoperator_spectrum(const Superoperator& superop, bool want_vectors,
                                           bool want_left) {
  if (superop.matrix.rows() == 0) throw NumericalFailure("empty superoperator");
  auto eig = linalg::eig_general(superop.matrix, want_left);
  return sorted_spectrum(std::move(eig), want_vectors);
}

}  // namespace fbdiss
