#pragma once

#include <Eigen/Dense>
#include <complex>

namespace fbmc {

using Real = double;
using Complex = std::complex<double>;

using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using IMat = Eigen::MatrixXi;

inline constexpr double kPi = 3.14159265358979323846;

/// First `cols` columns of the size-n DFT matrix, F(r,c) = exp(-j*2*pi*r*c/n).
template <typename Scalar = Complex>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dft_matrix(int n, int cols) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> F(n, cols);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < cols; ++c)
      F(r, c) = std::exp(Scalar(0, -2.0 * kPi * r * c / n));
  return F;
}

}  // namespace fbmc
