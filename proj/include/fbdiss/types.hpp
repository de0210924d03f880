#pragma once

#include <complex>

#include <Eigen/Dense>

namespace fbdiss {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;

inline constexpr Complex kImag{0.0, 1.0};

}  // namespace fbdiss
