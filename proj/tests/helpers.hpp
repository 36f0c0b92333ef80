// Shared helpers for the unit tests: seeded random data blocks and a couple
// of small matrix utilities used to build independent oracles.
#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

#include "qcausal/kernels.hpp"
#include "qcausal/random.hpp"

namespace test_helpers {

inline Eigen::MatrixXd random_matrix(std::uint64_t seed, int rows, int cols) {
  auto rng = qcausal::make_rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) m.col(j) = qcausal::normal_vector(rng, rows);
  return m;
}

// Centered Gaussian kernel of a random data block; a convenient source of
// nontrivial PSD matrices.
inline qcausal::KernelMatrix random_centered_kernel(std::uint64_t seed,
                                                    int rows, int cols = 1,
                                                    double width = 1.0) {
  return qcausal::center(
      qcausal::gaussian_kernel_matrix(random_matrix(seed, rows, cols),
                                      {width}));
}

// Kronecker product for complex matrices, written out directly so simulator
// tests do not depend on the code under test.
inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a,
                             const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  return (da * db).sum() /
         std::sqrt((da * da).sum() * (db * db).sum());
}

}  // namespace test_helpers
