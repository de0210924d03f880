#include "fbdiss/linalg.hpp"

#include <random>
#include <vector>

#include "fbdiss/errors.hpp"

#define LAPACK_COMPLEX_CUSTOM
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace fbdiss::linalg {

ComplexEig eig_general(const Matrix& a, bool want_left) {
  if (a.rows() != a.cols()) throw DimensionMismatch("eig_general: matrix not square");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  ComplexEig out;
  out.values.resize(n);
  out.right.resize(n, n);
  Matrix work = a;  // zgeev destroys its input
  if (want_left) out.left.resize(n, n);
  lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, want_left ? 'V' : 'N', 'V', n,
                                  work.data(), n, out.values.data(),
                                  want_left ? out.left.data() : nullptr, n,
                                  out.right.data(), n);
  if (info != 0)
    throw NumericalFailure("zgeev failed to converge (info=" + std::to_string(info) + ")");
  return out;
}

Vector lu_solve_inplace(Matrix& a, const Vector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size())
    throw DimensionMismatch("lu_solve: incompatible dimensions");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Vector x = b;
  std::vector<lapack_int> ipiv(n);
  lapack_int info = LAPACKE_zgesv(LAPACK_COL_MAJOR, n, 1, a.data(), n, ipiv.data(), x.data(), n);
  if (info != 0)
    throw NumericalFailure("zgesv failed (info=" + std::to_string(info) + ")");
  return x;
}

Vector vectorize(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unvectorize(const Vector& v, int dim) {
  if (v.size() != static_cast<Eigen::Index>(dim) * dim)
    throw DimensionMismatch("unvectorize: size is not dim^2");
  return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

Matrix random_hermitian(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) m(i, j) = Complex(g(rng), g(rng));
  return hermitize(m);
}

Vector random_state(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = Complex(g(rng), g(rng));
  v.normalize();
  return v;
}

}  // namespace fbdiss::linalg
