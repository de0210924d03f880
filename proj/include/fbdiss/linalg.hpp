#pragma once

#include <cstdint>

#include "fbdiss/types.hpp"

namespace fbdiss::linalg {

/// Result of a dense nonsymmetric eigendecomposition. Columns of `right`
/// (and `left`, when requested) are the eigenvectors; left eigenvectors
/// follow the LAPACK convention u† A = lambda u†.
struct ComplexEig {
  Vector values;
  Matrix right;
  Matrix left;
};

/// Full eigendecomposition of a general complex matrix (LAPACK zgeev).
ComplexEig eig_general(const Matrix& a, bool want_left = false);

/// Solves a x = b with partial-pivoted LU (LAPACK zgesv). `a` is overwritten
/// by its factorization.
Vector lu_solve_inplace(Matrix& a, const Vector& b);

/// Column-stacking vectorization and its inverse.
Vector vectorize(const Matrix& m);
Matrix unvectorize(const Vector& v, int dim);

inline Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

/// Random Hermitian matrix with entries of order one (deterministic per seed).
Matrix random_hermitian(int dim, std::uint64_t seed);

/// Random normalized complex vector (deterministic per seed).
Vector random_state(int dim, std::uint64_t seed);

}  // namespace fbdiss::linalg
