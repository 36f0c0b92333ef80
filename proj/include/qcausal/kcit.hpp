// Kernel-based (conditional) independence tests.
//
// Unconditional: statistic T = (1/n) Tr[Kx~ Ky~] on centered kernel matrices,
// compared against a two-moment gamma fit of its permutation null:
//   mean = Tr[Kx~] Tr[Ky~] / n^2,  variance = 2 Tr[Kx~^2] Tr[Ky~^2] / n^4.
//
// Conditional: the joint kernel Kxz~ (centered product kernel on (X, Z)) and
// Ky~ are conjugated with the smoothing projection
//   R_z = eps (Kz~ + eps I)^{-1},
// giving residual kernels Ka = R_z Kxz~ R_z and Kb = R_z Ky~ R_z.  The
// statistic is T = (1/n) Tr[Ka Kb]; its null is a weighted chi-square sum
// whose weight matrix M has
//   Tr[M]   = (1/n)   sum_k  Ka[k][k] Kb[k][k]
//   Tr[M^2] = (1/n^2) sum_kl (Ka[k][l] Kb[k][l])^2
// so the gamma fit uses mean Tr[M] and variance 2 Tr[M^2] without ever
// forming the n^2 x n^2 tensor.
//
// Both tests optionally replace the gamma fit with Monte Carlo sampling of
// the same null (seeded, reproducible).
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "qcausal/error.hpp"
#include "qcausal/kernels.hpp"
#include "qcausal/random.hpp"

namespace qcausal {

struct CITestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool independent = true;  // p_value > alpha
  double alpha = 0.05;
  double gamma_shape = 0.0;  // k of the fitted gamma null
  double gamma_scale = 0.0;  // theta of the fitted gamma null
};

// R_z = eps (Kz~ + eps I)^{-1}, formed through the eigendecomposition of Kz~.
struct ConditionalProjection {
  double epsilon = 1e-3;
  Eigen::MatrixXd matrix;

  [[nodiscard]] int n() const { return static_cast<int>(matrix.rows()); }
};

struct MonteCarloNull {
  int draws = 1000;
  std::uint64_t seed = 0;
};

namespace detail {

// Survival function of Gamma(shape k, scale theta) at x, via Boost.Math's
// regularized upper incomplete gamma.  Double-precision implementation;
// absolute error is far below 1e-10 for shapes up to 1e4.
inline double gamma_survival(double shape, double scale, double x) {
  if (!(shape > 0.0) || !(scale > 0.0))
    throw numeric_error("gamma_survival: fitted gamma has non-positive "
                        "shape or scale");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(shape, x / scale);
}

inline void require_centered(const KernelMatrix& k, const char* op) {
  if (!k.centered)
    throw input_error(std::string(op) + ": kernel matrix must be centered");
}

inline void require_min_samples(const KernelMatrix& k, const char* op) {
  if (k.n() < 4)
    throw size_error(std::string(op) + ": need at least 4 samples, got " +
                     std::to_string(k.n()));
}

// Eigenvalues clamped to [0, inf); rejects matrices that are non-PSD beyond
// a relative tolerance instead of silently flipping signs.
inline Eigen::VectorXd psd_eigenvalues(const Eigen::MatrixXd& m,
                                       Eigen::MatrixXd* vectors,
                                       const char* op) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  if (vectors == nullptr)
    es.compute(m, Eigen::EigenvaluesOnly);
  else
    es.compute(m);
  if (es.info() != Eigen::Success)
    throw numeric_error(std::string(op) + ": eigendecomposition failed");
  Eigen::VectorXd lam = es.eigenvalues();
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  if (lam.minCoeff() < -1e-8 * scale)
    throw numeric_error(std::string(op) +
                        ": matrix is not PSD within tolerance (min eigenvalue " +
                        std::to_string(lam.minCoeff()) + ")");
  lam = lam.cwiseMax(0.0);
  if (vectors != nullptr) *vectors = es.eigenvectors();
  return lam;
}

}  // namespace detail

inline CITestResult uncond_test(const KernelMatrix& kx, const KernelMatrix& ky,
                                double alpha) {
  detail::require_same_size(kx, ky, "uncond_test");
  detail::require_centered(kx, "uncond_test");
  detail::require_centered(ky, "uncond_test");
  detail::require_min_samples(kx, "uncond_test");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw input_error("uncond_test: alpha must lie in (0, 1)");

  const double n = kx.n();
  const double tx = trace_of(kx);
  const double ty = trace_of(ky);
  if (tx <= 0.0 || ty <= 0.0)
    throw degenerate_data_error(
        "uncond_test: centered kernel has non-positive trace (constant data?)");
  const double tx2 = trace_square(kx);
  const double ty2 = trace_square(ky);

  CITestResult r;
  r.alpha = alpha;
  r.statistic = trace_product(kx, ky) / n;
  r.gamma_shape = (tx * tx * ty * ty) / (2.0 * tx2 * ty2);
  r.gamma_scale = (2.0 * tx2 * ty2) / (n * n * tx * ty);
  r.p_value = detail::gamma_survival(r.gamma_shape, r.gamma_scale, r.statistic);
  r.independent = r.p_value > alpha;
  return r;
}

// Same statistic as uncond_test, with the null sampled directly:
// T0 = (1/n^2) sum_ij lx_i ly_j z_ij^2 over the kernel spectra.
inline CITestResult uncond_test_montecarlo(const KernelMatrix& kx,
                                           const KernelMatrix& ky, double alpha,
                                           const MonteCarloNull& mc) {
  CITestResult r = uncond_test(kx, ky, alpha);
  if (mc.draws < 1)
    throw input_error("uncond_test_montecarlo: draws must be >= 1");

  Eigen::VectorXd lx = detail::psd_eigenvalues(kx.values, nullptr,
                                               "uncond_test_montecarlo");
  Eigen::VectorXd ly = detail::psd_eigenvalues(ky.values, nullptr,
                                               "uncond_test_montecarlo");
  // Drop numerically zero weights; they cannot move the sum.
  const double cx = 1e-12 * lx.maxCoeff();
  const double cy = 1e-12 * ly.maxCoeff();
  std::vector<double> wx, wy;
  for (int i = 0; i < lx.size(); ++i)
    if (lx(i) > cx) wx.push_back(lx(i));
  for (int j = 0; j < ly.size(); ++j)
    if (ly(j) > cy) wy.push_back(ly(j));

  auto rng = make_rng(mc.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double inv_n2 = 1.0 / (static_cast<double>(kx.n()) * kx.n());
  int at_least = 0;
  for (int b = 0; b < mc.draws; ++b) {
    double t = 0.0;
    for (const double li : wx) {
      double inner = 0.0;
      for (const double mj : wy) {
        const double z = gauss(rng);
        inner += mj * z * z;
      }
      t += li * inner;
    }
    if (t * inv_n2 >= r.statistic) ++at_least;
  }
  r.p_value = (1.0 + at_least) / (1.0 + mc.draws);
  r.independent = r.p_value > alpha;
  return r;
}

inline ConditionalProjection conditional_projection(const KernelMatrix& kz,
                                                    double epsilon) {
  detail::require_centered(kz, "conditional_projection");
  if (kz.n() < 1) throw size_error("conditional_projection: empty matrix");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw input_error("conditional_projection: epsilon must be positive");

  Eigen::MatrixXd v;
  const Eigen::VectorXd lam =
      detail::psd_eigenvalues(kz.values, &v, "conditional_projection");
  const Eigen::VectorXd shrink =
      (epsilon / (lam.array() + epsilon)).matrix();  // in (0, 1]
  ConditionalProjection proj;
  proj.epsilon = epsilon;
  proj.matrix.noalias() = v * shrink.asDiagonal() * v.transpose();
  return proj;
}

// Residual kernels (R_z Kxz~ R_z, R_z Ky~ R_z).  Conjugation preserves
// centering: R_z maps the all-ones vector to itself and Kxz~, Ky~ kill it.
inline std::pair<KernelMatrix, KernelMatrix> conditional_kernels(
    const KernelMatrix& kxz, const KernelMatrix& ky,
    const ConditionalProjection& proj) {
  detail::require_same_size(kxz, ky, "conditional_kernels");
  detail::require_centered(kxz, "conditional_kernels");
  detail::require_centered(ky, "conditional_kernels");
  if (proj.n() != kxz.n())
    throw size_error("conditional_kernels: projection size mismatch");

  const auto conjugate = [&proj](const KernelMatrix& k) {
    KernelMatrix out;
    Eigen::MatrixXd tmp;
    tmp.noalias() = proj.matrix * k.values;
    out.values.noalias() = tmp * proj.matrix;
    // Symmetrize away the last-bit asymmetry of the two multiplications.
    out.values = 0.5 * (out.values + out.values.transpose()).eval();
    out.centered = true;
    return out;
  };
  return {conjugate(kxz), conjugate(ky)};
}

inline std::pair<KernelMatrix, KernelMatrix> conditional_kernels(
    const KernelMatrix& kxz, const KernelMatrix& ky, const KernelMatrix& kz,
    double epsilon) {
  return conditional_kernels(kxz, ky, conditional_projection(kz, epsilon));
}

// (Tr[M], Tr[M^2]) of the null weight matrix, from the entries of the
// residual kernels alone.
inline std::pair<double, double> m_trace_stats(const KernelMatrix& ka,
                                               const KernelMatrix& kb) {
  detail::require_same_size(ka, kb, "m_trace_stats");
  const double n = ka.n();
  const double tr_m =
      (ka.values.diagonal().array() * kb.values.diagonal().array()).sum() / n;
  const double tr_m2 =
      (ka.values.array() * kb.values.array()).square().sum() / (n * n);
  return {tr_m, tr_m2};
}

inline CITestResult cond_test(const KernelMatrix& ka, const KernelMatrix& kb,
                              double alpha) {
  detail::require_same_size(ka, kb, "cond_test");
  detail::require_min_samples(ka, "cond_test");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw input_error("cond_test: alpha must lie in (0, 1)");

  const auto [tr_m, tr_m2] = m_trace_stats(ka, kb);
  if (tr_m <= 0.0)
    throw degenerate_data_error(
        "cond_test: null mean Tr[M] is non-positive (degenerate residuals)");

  CITestResult r;
  r.alpha = alpha;
  r.statistic = trace_product(ka, kb) / static_cast<double>(ka.n());
  r.gamma_shape = tr_m * tr_m / (2.0 * tr_m2);
  r.gamma_scale = 2.0 * tr_m2 / tr_m;
  r.p_value = detail::gamma_survival(r.gamma_shape, r.gamma_scale, r.statistic);
  r.independent = r.p_value > alpha;
  return r;
}

// Monte Carlo alternative for the conditional null.  The nonzero spectrum of
// the n^2 x n^2 weight matrix M equals the spectrum of (1/n) Ka .* Kb (M is a
// Gram matrix of n vectors indexed by (i, j)), so the null sum of weighted
// chi-squares is sampled from an n x n eigendecomposition.
inline CITestResult cond_test_montecarlo(const KernelMatrix& ka,
                                         const KernelMatrix& kb, double alpha,
                                         const MonteCarloNull& mc) {
  CITestResult r = cond_test(ka, kb, alpha);
  if (mc.draws < 1)
    throw input_error("cond_test_montecarlo: draws must be >= 1");

  const Eigen::MatrixXd gram =
      (ka.values.array() * kb.values.array()).matrix() /
      static_cast<double>(ka.n());
  const Eigen::MatrixXd sym = 0.5 * (gram + gram.transpose());
  Eigen::VectorXd lam =
      detail::psd_eigenvalues(sym, nullptr, "cond_test_montecarlo");
  std::vector<double> w;
  const double cut = 1e-12 * lam.maxCoeff();
  for (int i = 0; i < lam.size(); ++i)
    if (lam(i) > cut) w.push_back(lam(i));

  auto rng = make_rng(mc.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  int at_least = 0;
  for (int b = 0; b < mc.draws; ++b) {
    double t = 0.0;
    for (const double li : w) {
      const double z = gauss(rng);
      t += li * z * z;
    }
    if (t >= r.statistic) ++at_least;
  }
  r.p_value = (1.0 + at_least) / (1.0 + mc.draws);
  r.independent = r.p_value > alpha;
  return r;
}

}  // namespace qcausal
