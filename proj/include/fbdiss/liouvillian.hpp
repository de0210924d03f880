#pragma once

#include <span>

#include "fbdiss/dissipation.hpp"
#include "fbdiss/types.hpp"

namespace fbdiss {

/// Dense jump operator with its rate; used for many-body jumps.
struct GenericJump {
  Matrix op;
  double gamma = 1.0;
};

/// d(rho)/dt under the Lindblad generator
/// -i[H, rho] + sum_k gamma_k (L_k rho L_k^dag - 1/2 {L_k^dag L_k, rho}).
Matrix apply_lindblad(const Matrix& h, std::span<const JumpOperator> jumps, const Matrix& rho);
Matrix apply_lindblad(const Matrix& h, std::span<const GenericJump> jumps, const Matrix& rho);

/// Dense matrix form of the generator under column-stacking vectorization:
/// matrix * vec(rho) = vec(L[rho]).
struct Superoperator {
  Matrix matrix;
  int dim = 0;  // Hilbert-space dimension D; matrix is D^2 x D^2

  Vector apply_vec(const Vector& x) const { return matrix * x; }
};

Superoperator assemble_superoperator(const Matrix& h, std::span<const JumpOperator> jumps,
                                     int dim_cap = 100);
Superoperator assemble_superoperator(const Matrix& h, std::span<const GenericJump> jumps,
                                     int dim_cap = 100);

/// Liouvillian eigenvalues sorted by |Re| ascending, with aligned right (and
/// left) eigenvector columns when requested.
struct LiouvillianSpectrum {
  Vector values;
  Matrix right;
  Matrix left;
};

LiouvillianSpectrum superoperator_spectrum(const Superoperator& superop,
                                           bool want_vectors = false,
                                           bool want_left = false);

}  // namespace fbdiss
