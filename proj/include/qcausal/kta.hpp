// Kernel-target alignment (KTA) between centered kernel matrices, and the two
// hyperparameter searches built on it:
//
//   * a stochastic gradient descent on f = -log KTA over the two Gaussian
//     widths, with per-iteration moment resampling, and
//   * a bounded derivative-free golden-section search over a single scaling
//     parameter, tracking the best of every evaluation (bounds and init
//     included) so the returned point is never worse than any probed one.
//
// KTA(Ka, Kb) = Tr[Ka Kb] / sqrt(Tr[Ka^2] Tr[Kb^2]).  On kernels of paired
// data whose dependence has been destroyed (shuffle_decouple), a small KTA
// means the kernel separates signal from the independence null well, so both
// searches minimize it.
#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qcausal/error.hpp"
#include "qcausal/kernels.hpp"
#include "qcausal/random.hpp"

namespace qcausal {

struct KtaValue {
  double value = 0.0;
};

inline KtaValue kta(const KernelMatrix& ka, const KernelMatrix& kb) {
  detail::require_same_size(ka, kb, "kta");
  if (!ka.centered || !kb.centered)
    throw input_error("kta: kernel matrices must be centered");
  const double na = trace_square(ka);
  const double nb = trace_square(kb);
  if (na <= 0.0 || nb <= 0.0)
    throw degenerate_data_error("kta: zero kernel matrix");
  double v = trace_product(ka, kb) / std::sqrt(na * nb);
  if (v < -1e-8 || v > 1.0 + 1e-8)
    throw numeric_error("kta: alignment " + std::to_string(v) +
                        " outside [0, 1] beyond float tolerance");
  return KtaValue{std::clamp(v, 0.0, 1.0)};
}

// f = -log KTA; +inf when the alignment underflows to zero.
inline double neg_log_kta(const KernelMatrix& ka, const KernelMatrix& kb) {
  const double v = kta(ka, kb).value;
  if (v <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(v);
}

// Breaks the dependence between two paired columns by permuting the second
// one; the marginals are preserved exactly.
inline Eigen::MatrixXd shuffle_decouple(const Eigen::MatrixXd& data,
                                        std::uint64_t seed) {
  if (data.cols() != 2)
    throw size_error("shuffle_decouple: expected exactly 2 columns, got " +
                     std::to_string(data.cols()));
  if (data.rows() < 2)
    throw size_error("shuffle_decouple: need at least 2 rows");
  std::vector<int> perm(static_cast<std::size_t>(data.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  auto rng = make_rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd out = data;
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    out(i, 1) = data(perm[static_cast<std::size_t>(i)], 1);
  return out;
}

// d f / d(width_x, width_y) for the Gaussian family, where
// f = -log KTA(center(Kx), center(Ky)).  Uses the exact differential
//   df/dtheta = -Tr[Ky~ dKx~] / Tr[Kx~ Ky~] + Tr[Kx~ dKx~] / Tr[Kx~^2]
// with the analytic Gaussian derivative dK_ij/dsigma = K_ij d_ij^2 / sigma^3
// centered the same way as K itself.
inline std::pair<double, double> kta_gradient(const Eigen::MatrixXd& x_data,
                                              const Eigen::MatrixXd& y_data,
                                              const GaussianKernelParams& theta,
                                              const GaussianKernelParams& phi) {
  if (x_data.rows() != y_data.rows())
    throw size_error("kta_gradient: row count mismatch");

  const auto kernel_and_derivative = [](const Eigen::MatrixXd& data,
                                        double width) {
    KernelMatrix k = gaussian_kernel_matrix(data, {width});
    const int n = k.n();
    KernelMatrix dk;
    dk.values.resize(n, n);
    const double w3 = width * width * width;
    for (int i = 0; i < n; ++i) {
      dk.values(i, i) = 0.0;
      for (int j = i + 1; j < n; ++j) {
        const double d2 = (data.row(i) - data.row(j)).squaredNorm();
        const double v = k.values(i, j) * d2 / w3;
        dk.values(i, j) = v;
        dk.values(j, i) = v;
      }
    }
    return std::make_pair(center(k), center(dk));
  };

  const auto [kx, dkx] = kernel_and_derivative(x_data, theta.width);
  const auto [ky, dky] = kernel_and_derivative(y_data, phi.width);

  const double cross = trace_product(kx, ky);
  const double sx = trace_square(kx);
  const double sy = trace_square(ky);
  if (cross <= 0.0 || sx <= 0.0 || sy <= 0.0)
    throw degenerate_data_error("kta_gradient: degenerate kernel traces");

  const double d_theta =
      -trace_product(ky, dkx) / cross + trace_product(kx, dkx) / sx;
  const double d_phi =
      -trace_product(kx, dky) / cross + trace_product(ky, dky) / sy;
  return {d_theta, d_phi};
}

// Shared configuration for both searches.  `low`/`high`/`init` bound the
// scalar search; `init` also seeds the gradient widths.  `max_iters` caps
// gradient iterations and doubles as the scalar evaluation budget.
struct OptimizerConfig {
  std::string method = "scalar";  // "scalar" or "gradient"
  double low = 0.01;
  double high = 0.5;
  double init = 0.1;
  double eta = 0.05;          // gradient step size
  int resample_m = 100;       // per-iteration resample count
  double target_epsilon = 1e-3;  // stop when f <= target_epsilon
  double tol = 1e-4;          // scalar search interval tolerance
  int max_iters = 100;
  std::uint64_t seed = 0;
};

inline void validate(const OptimizerConfig& c) {
  if (c.method != "scalar" && c.method != "gradient")
    throw input_error("OptimizerConfig: method must be 'scalar' or 'gradient'");
  if (!(c.low < c.high))
    throw input_error("OptimizerConfig: require low < high");
  if (!(c.low < c.init && c.init < c.high))
    throw input_error("OptimizerConfig: require low < init < high");
  if (!(c.low > 0.0))
    throw input_error("OptimizerConfig: bounds must be positive");
  if (!(c.eta > 0.0)) throw input_error("OptimizerConfig: eta must be > 0");
  if (c.resample_m < 4)
    throw input_error("OptimizerConfig: resample_m must be >= 4");
  if (!(c.tol > 0.0)) throw input_error("OptimizerConfig: tol must be > 0");
  if (c.max_iters < 1)
    throw input_error("OptimizerConfig: max_iters must be >= 1");
  if (!(c.target_epsilon >= 0.0))
    throw input_error("OptimizerConfig: target_epsilon must be >= 0");
}

inline nlohmann::json to_json(const OptimizerConfig& c) {
  return nlohmann::json{{"method", c.method},
                        {"low", c.low},
                        {"high", c.high},
                        {"init", c.init},
                        {"eta", c.eta},
                        {"resample_m", c.resample_m},
                        {"target_epsilon", c.target_epsilon},
                        {"tol", c.tol},
                        {"max_iters", c.max_iters},
                        {"seed", c.seed}};
}

inline OptimizerConfig optimizer_config_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw input_error("OptimizerConfig: JSON must be an object");
  static const std::vector<std::string> known = {
      "method", "low",  "high",      "init",      "eta",
      "resample_m", "target_epsilon", "tol", "max_iters", "seed"};
  for (const auto& item : j.items())
    if (std::find(known.begin(), known.end(), item.key()) == known.end())
      throw input_error("OptimizerConfig: unknown field '" + item.key() + "'");
  OptimizerConfig c;
  try {
    if (j.contains("method")) c.method = j.at("method").get<std::string>();
    if (j.contains("low")) c.low = j.at("low").get<double>();
    if (j.contains("high")) c.high = j.at("high").get<double>();
    if (j.contains("init")) c.init = j.at("init").get<double>();
    if (j.contains("eta")) c.eta = j.at("eta").get<double>();
    if (j.contains("resample_m")) c.resample_m = j.at("resample_m").get<int>();
    if (j.contains("target_epsilon"))
      c.target_epsilon = j.at("target_epsilon").get<double>();
    if (j.contains("tol")) c.tol = j.at("tol").get<double>();
    if (j.contains("max_iters")) c.max_iters = j.at("max_iters").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("OptimizerConfig: malformed JSON field: ") +
                      e.what());
  }
  validate(c);
  return c;
}

struct GradientOptResult {
  double width_x = 0.0;
  double width_y = 0.0;
  double f_best = 0.0;
  std::vector<double> f_trace;  // f at the start of each iteration
  int iterations = 0;
  bool converged = false;  // false means the target was not reached (warning)
};

// Stochastic descent on f = -log KTA over the two Gaussian widths for a
// paired dataset (n x 2).  Each iteration draws `resample_m` fresh rows from
// independent normal marginals fitted to the two columns (destroying any
// dependence), evaluates f and its gradient there, and steps both widths
// downhill.  Best-so-far (including the initial point) is returned, so the
// final f never exceeds the first trace entry.
inline GradientOptResult minimize_kta_gradient(const Eigen::MatrixXd& data,
                                               const OptimizerConfig& config) {
  validate(config);
  if (data.cols() != 2)
    throw size_error("minimize_kta_gradient: expected exactly 2 columns");
  if (data.rows() < 4)
    throw size_error("minimize_kta_gradient: need at least 4 rows");
  if (!data.allFinite())
    throw input_error("minimize_kta_gradient: data has non-finite values");

  const auto moments = [](const Eigen::VectorXd& v) {
    const double mean = v.mean();
    const double var =
        (v.array() - mean).square().sum() / (static_cast<double>(v.size()) - 1);
    return std::make_pair(mean, std::sqrt(var));
  };
  const auto [mx, sx] = moments(data.col(0));
  const auto [my, sy] = moments(data.col(1));
  if (!(sx > 0.0) || !(sy > 0.0))
    throw degenerate_data_error("minimize_kta_gradient: constant column");

  constexpr double kWidthFloor = 1e-6;
  auto rng = make_rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  double theta = config.init;
  double phi = config.init;
  GradientOptResult result;
  result.width_x = theta;
  result.width_y = phi;
  result.f_best = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < config.max_iters; ++iter) {
    Eigen::MatrixXd bx(config.resample_m, 1);
    Eigen::MatrixXd by(config.resample_m, 1);
    for (int i = 0; i < config.resample_m; ++i) {
      bx(i, 0) = mx + sx * gauss(rng);
      by(i, 0) = my + sy * gauss(rng);
    }

    const double f = neg_log_kta(center(gaussian_kernel_matrix(bx, {theta})),
                                 center(gaussian_kernel_matrix(by, {phi})));
    result.f_trace.push_back(f);
    result.iterations = iter + 1;
    if (f < result.f_best) {
      result.f_best = f;
      result.width_x = theta;
      result.width_y = phi;
    }
    if (result.f_best <= config.target_epsilon) {
      result.converged = true;
      break;
    }

    const auto [gt, gp] = kta_gradient(bx, by, {theta}, {phi});
    theta = std::max(kWidthFloor, theta - config.eta * gt);
    phi = std::max(kWidthFloor, phi - config.eta * gp);
  }
  return result;
}

struct ScalarOptResult {
  double gamma = 0.0;
  double kta = 0.0;  // objective value at gamma
  int evaluations = 0;
  std::vector<std::pair<double, double>> trace;  // (gamma, kta) per evaluation
};

// Golden-section minimization of a scalar KTA objective on [low, high].
// Evaluates low, high and init first, then shrinks the bracket until it is
// narrower than `tol` or the `max_iters` evaluation budget is spent.  The
// returned point is the argmin over every evaluation, which guarantees
// kta(gamma*) <= kta(init) and <= kta at both bounds.
inline ScalarOptResult minimize_kta_scalar(
    const std::function<double(double)>& objective,
    const OptimizerConfig& config) {
  validate(config);

  ScalarOptResult result;
  result.kta = std::numeric_limits<double>::infinity();
  const auto probe = [&](double gamma) {
    const double v = objective(gamma);
    if (!std::isfinite(v))
      throw numeric_error("minimize_kta_scalar: objective returned non-finite "
                          "value at gamma = " + std::to_string(gamma));
    result.trace.emplace_back(gamma, v);
    ++result.evaluations;
    if (v < result.kta) {
      result.kta = v;
      result.gamma = gamma;
    }
    return v;
  };

  probe(config.low);
  probe(config.high);
  probe(config.init);

  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;  // 1/golden ratio
  double a = config.low;
  double b = config.high;
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  double f1 = probe(x1);
  double f2 = probe(x2);
  while (b - a > config.tol && result.evaluations < config.max_iters) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = probe(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = probe(x2);
    }
  }
  return result;
}

// Mean-KTA objective over all unordered column pairs of a multivariate
// dataset.  Each pair is shuffle-decoupled once up front (per-pair derived
// seed), so repeated evaluations at the same gamma are identical and the
// scalar search sees a deterministic function.
//
// `kernel_builder(column_block, gamma)` must return the uncentered kernel of
// a one-column data block at scaling gamma.
inline std::function<double(double)> mean_kta_objective(
    const Eigen::MatrixXd& data,
    const std::function<KernelMatrix(const Eigen::MatrixXd&, double)>&
        kernel_builder,
    std::uint64_t seed) {
  const int p = static_cast<int>(data.cols());
  if (p < 2)
    throw size_error("mean_kta_objective: need at least 2 columns, got " +
                     std::to_string(p));
  if (data.rows() < 4)
    throw size_error("mean_kta_objective: need at least 4 rows");

  struct Pair {
    int first_col;
    Eigen::MatrixXd shuffled_second;  // n x 1
  };
  auto pairs = std::make_shared<std::vector<Pair>>();
  std::uint64_t pair_index = 0;
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      Eigen::MatrixXd block(data.rows(), 2);
      block.col(0) = data.col(i);
      block.col(1) = data.col(j);
      const Eigen::MatrixXd decoupled =
          shuffle_decouple(block, derive_seed(seed, pair_index++));
      pairs->push_back({i, decoupled.col(1)});
    }
  }

  return [pairs, data, kernel_builder](double gamma) {
    std::map<int, KernelMatrix> first_kernels;
    double sum = 0.0;
    for (const auto& pr : *pairs) {
      auto it = first_kernels.find(pr.first_col);
      if (it == first_kernels.end()) {
        it = first_kernels
                 .emplace(pr.first_col,
                          center(kernel_builder(data.col(pr.first_col), gamma)))
                 .first;
      }
      const KernelMatrix second =
          center(kernel_builder(pr.shuffled_second, gamma));
      sum += kta(it->second, second).value;
    }
    return sum / static_cast<double>(pairs->size());
  };
}

// Optimization trace CSV: one row per evaluation/iteration.
inline void write_optimization_trace(
    const std::vector<std::pair<double, double>>& trace,
    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write file '" + path + "'");
  out << "iteration,gamma,kta\n";
  for (std::size_t i = 0; i < trace.size(); ++i)
    out << i << ',' << trace[i].first << ',' << trace[i].second << '\n';
}

}  // namespace qcausal
