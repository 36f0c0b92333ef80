// Kernel matrices for sample sets: Gaussian (RBF) construction, the median
// pairwise-distance bandwidth heuristic, empirical centering, and entrywise
// products for joint-variable kernels.
//
// Conventions pinned here and relied on everywhere else:
//   * Gaussian entry k(x, x') = exp(-||x - x'||^2 / (2 sigma^2)).
//   * median_heuristic_width returns sigma with sigma^2 = median of squared
//     pairwise distances (i < j only, lower median on ties) divided by 2,
//     so the heuristic exponent is -||x - x'||^2 / median_sq_dist.
//   * Product kernels are formed on uncentered factors; centering happens
//     after the product.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcausal/error.hpp"

namespace qcausal {

// Symmetric positive semi-definite kernel matrix tagged with whether it has
// been empirically centered (K~ = H K H with H = I - 11^T/n).
struct KernelMatrix {
  Eigen::MatrixXd values;
  bool centered = false;

  [[nodiscard]] int n() const { return static_cast<int>(values.rows()); }
};

struct GaussianKernelParams {
  double width = 1.0;  // sigma in exp(-d^2 / (2 sigma^2))
};

namespace detail {

inline void require_same_size(const KernelMatrix& a, const KernelMatrix& b,
                              const char* op) {
  if (a.n() != b.n())
    throw size_error(std::string(op) + ": size mismatch (" +
                     std::to_string(a.n()) + " vs " + std::to_string(b.n()) +
                     ")");
}

inline void require_finite(const Eigen::MatrixXd& data, const char* op) {
  if (!data.allFinite())
    throw input_error(std::string(op) + ": data contains non-finite values");
}

// Symmetry is always checked (O(n^2)); the eigenvalue PSD check costs O(n^3)
// and therefore only runs in debug builds, from the factory functions.
inline void check_kernel_matrix(const KernelMatrix& k, const char* op) {
  const auto& m = k.values;
  if (m.rows() != m.cols())
    throw size_error(std::string(op) + ": kernel matrix is not square");
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12)
    throw numeric_error(std::string(op) + ": kernel matrix asymmetry " +
                        std::to_string(asym) + " exceeds 1e-12");
#ifndef NDEBUG
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (lo < -1e-8 * scale)
    throw numeric_error(std::string(op) +
                        ": kernel matrix is not PSD (min eigenvalue " +
                        std::to_string(lo) + ")");
#endif
}

}  // namespace detail

inline KernelMatrix gaussian_kernel_matrix(const Eigen::MatrixXd& data,
                                           const GaussianKernelParams& params) {
  const int n = static_cast<int>(data.rows());
  if (n < 2) throw size_error("gaussian_kernel_matrix: need at least 2 rows");
  detail::require_finite(data, "gaussian_kernel_matrix");
  if (!(params.width > 0.0) || !std::isfinite(params.width))
    throw input_error("gaussian_kernel_matrix: width must be positive");

  const double inv = 1.0 / (2.0 * params.width * params.width);
  KernelMatrix k;
  k.values.resize(n, n);
  for (int i = 0; i < n; ++i) {
    k.values(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const double d2 = (data.row(i) - data.row(j)).squaredNorm();
      const double v = std::exp(-d2 * inv);
      k.values(i, j) = v;
      k.values(j, i) = v;
    }
  }
  k.centered = false;
  detail::check_kernel_matrix(k, "gaussian_kernel_matrix");
  return k;
}

// sigma such that 2 sigma^2 = lower median of the n(n-1)/2 squared pairwise
// distances.  Identical points only (median 0) cannot produce a bandwidth.
inline double median_heuristic_width(const Eigen::MatrixXd& data) {
  const int n = static_cast<int>(data.rows());
  if (n < 2) throw size_error("median_heuristic_width: need at least 2 rows");
  detail::require_finite(data, "median_heuristic_width");

  std::vector<double> d2;
  d2.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      d2.push_back((data.row(i) - data.row(j)).squaredNorm());
  const std::size_t mid = (d2.size() - 1) / 2;  // lower median
  std::nth_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(mid),
                   d2.end());
  const double med = d2[mid];
  if (med <= 0.0)
    throw degenerate_data_error(
        "median_heuristic_width: median pairwise distance is zero");
  return std::sqrt(med / 2.0);
}

// K~ = H K H computed as K minus row means minus column means plus the grand
// mean; idempotent on already centered input.
inline KernelMatrix center(const KernelMatrix& k) {
  const int n = k.n();
  if (n < 1) throw size_error("center: empty kernel matrix");
  const Eigen::VectorXd row_mean = k.values.rowwise().mean();
  const double grand = row_mean.mean();
  KernelMatrix out;
  out.values = k.values;
  out.values.colwise() -= row_mean;
  out.values.rowwise() -= row_mean.transpose();
  out.values.array() += grand;
  out.centered = true;
  return out;
}

// Entrywise product; the factors must be uncentered because joint kernels are
// centered only after multiplication.
inline KernelMatrix product_kernel(const KernelMatrix& a,
                                   const KernelMatrix& b) {
  detail::require_same_size(a, b, "product_kernel");
  if (a.centered || b.centered)
    throw input_error("product_kernel: factors must be uncentered");
  KernelMatrix out;
  out.values = a.values.cwiseProduct(b.values);
  out.centered = false;
  detail::check_kernel_matrix(out, "product_kernel");
  return out;
}

// Tr[A B] for symmetric A, B via the entrywise sum; O(n^2).
inline double trace_product(const KernelMatrix& a, const KernelMatrix& b) {
  detail::require_same_size(a, b, "trace_product");
  return (a.values.array() * b.values.array()).sum();
}

inline double trace_of(const KernelMatrix& k) { return k.values.trace(); }

// Tr[K^2] = ||K||_F^2 for symmetric K.
inline double trace_square(const KernelMatrix& k) {
  return k.values.array().square().sum();
}

}  // namespace qcausal
