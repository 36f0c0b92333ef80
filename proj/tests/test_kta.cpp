#include <algorithm>
#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "qcausal/kcit.hpp"
#include "qcausal/kta.hpp"
#include "helpers.hpp"

using namespace qcausal;
using test_helpers::pearson;
using test_helpers::random_centered_kernel;
using test_helpers::random_matrix;

TEST_CASE("self-alignment is one and cross-alignment stays in range",
          "[kta]") {
  const KernelMatrix k = random_centered_kernel(1, 25, 2);
  CHECK(kta(k, k).value == Catch::Approx(1.0).margin(1e-12));

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const KernelMatrix a = random_centered_kernel(seed * 2 + 10, 20, 1, 0.8);
    const KernelMatrix b = random_centered_kernel(seed * 2 + 11, 20, 1, 1.4);
    const double v = kta(a, b).value;
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("alignment relates to the test statistic's signal-to-noise ratio",
          "[kta]") {
  const KernelMatrix kx = random_centered_kernel(31, 40, 1);
  const KernelMatrix ky = random_centered_kernel(32, 40, 1);
  const CITestResult r = uncond_test(kx, ky, 0.05);

  const double n = 40.0;
  const double null_sd =
      std::sqrt(2.0 * trace_square(kx) * trace_square(ky) / (n * n * n * n));
  const double snr_form = std::sqrt(2.0) / n * r.statistic / null_sd;
  CHECK(kta(kx, ky).value == Catch::Approx(snr_form).epsilon(1e-12));
}

TEST_CASE("shuffling preserves marginals while destroying dependence",
          "[kta]") {
  auto rng = make_rng(77);
  const int n = 100;
  Eigen::MatrixXd data(n, 2);
  data.col(0) = normal_vector(rng, n);
  data.col(1) = data.col(0) + 0.05 * normal_vector(rng, n);

  const Eigen::MatrixXd mixed = shuffle_decouple(data, 5);
  CHECK(mixed.col(0).cwiseEqual(data.col(0)).all());

  std::vector<double> before(data.col(1).data(), data.col(1).data() + n);
  std::vector<double> after(mixed.col(1).data(), mixed.col(1).data() + n);
  std::sort(before.begin(), before.end());
  std::sort(after.begin(), after.end());
  CHECK(before == after);

  CHECK(shuffle_decouple(data, 5).cwiseEqual(mixed).all());       // repeatable
  CHECK_FALSE(shuffle_decouple(data, 6).cwiseEqual(mixed).all()); // seeded

  double abs_corr_sum = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::MatrixXd m = shuffle_decouple(data, seed);
    abs_corr_sum += std::abs(pearson(m.col(0), m.col(1)));
  }
  CHECK(abs_corr_sum / 20.0 < 0.15);

  CHECK(std::abs(pearson(data.col(0), data.col(1))) > 0.95);
}

TEST_CASE("decoupled kernels align far less than coupled ones", "[kta]") {
  auto rng = make_rng(88);
  const int n = 60;
  Eigen::MatrixXd data(n, 2);
  data.col(0) = normal_vector(rng, n);
  data.col(1) = data.col(0) + 0.05 * normal_vector(rng, n);

  const auto column_kernel = [&](const Eigen::VectorXd& c) {
    Eigen::MatrixXd m(n, 1);
    m.col(0) = c;
    return center(gaussian_kernel_matrix(m, {median_heuristic_width(m)}));
  };

  const double coupled =
      kta(column_kernel(data.col(0)), column_kernel(data.col(1))).value;
  const Eigen::MatrixXd mixed = shuffle_decouple(data, 3);
  const double decoupled =
      kta(column_kernel(mixed.col(0)), column_kernel(mixed.col(1))).value;

  CHECK(coupled > 0.5);
  CHECK(decoupled < 0.2);
  CHECK(decoupled < coupled);
}

TEST_CASE("the alignment gradient matches finite differences", "[kta]") {
  const Eigen::MatrixXd x = random_matrix(41, 25, 1);
  const Eigen::MatrixXd y = random_matrix(42, 25, 1);
  const double wx = 0.8;
  const double wy = 1.3;

  const auto f = [&](double a, double b) {
    return neg_log_kta(center(gaussian_kernel_matrix(x, {a})),
                       center(gaussian_kernel_matrix(y, {b})));
  };
  const double h = 1e-5;
  const double fd_x = (f(wx + h, wy) - f(wx - h, wy)) / (2.0 * h);
  const double fd_y = (f(wx, wy + h) - f(wx, wy - h)) / (2.0 * h);

  const auto [gx, gy] = kta_gradient(x, y, {wx}, {wy});
  CHECK(gx == Catch::Approx(fd_x).epsilon(1e-4));
  CHECK(gy == Catch::Approx(fd_y).epsilon(1e-4));
}

TEST_CASE("scalar search minimizes a shifted parabola", "[kta]") {
  OptimizerConfig config;
  config.low = 0.01;
  config.high = 0.5;
  config.init = 0.1;
  config.tol = 1e-4;
  config.max_iters = 100;

  const auto objective = [](double g) { return (g - 0.2) * (g - 0.2) + 0.1; };
  const ScalarOptResult r = minimize_kta_scalar(objective, config);

  CHECK(std::abs(r.gamma - 0.2) < 1e-3);
  CHECK(r.kta == Catch::Approx(0.1).margin(1e-6));
  CHECK(r.evaluations == static_cast<int>(r.trace.size()));

  // The first three probes are the bounds and the initial point, and the
  // returned value is the argmin over every probe.
  CHECK(r.trace[0].first == 0.01);
  CHECK(r.trace[1].first == 0.5);
  CHECK(r.trace[2].first == 0.1);
  for (const auto& [gamma, value] : r.trace) CHECK(r.kta <= value);
  CHECK(r.kta <= objective(config.init));
}

TEST_CASE("scalar search respects its evaluation budget", "[kta]") {
  OptimizerConfig config;
  config.max_iters = 7;
  int calls = 0;
  const auto objective = [&calls](double g) {
    ++calls;
    return g * g;
  };
  const ScalarOptResult r = minimize_kta_scalar(objective, config);
  CHECK(calls <= 7);
  CHECK(r.evaluations == calls);

  OptimizerConfig bad = config;
  const auto nan_objective = [](double) {
    return std::numeric_limits<double>::quiet_NaN();
  };
  CHECK_THROWS_AS(minimize_kta_scalar(nan_objective, bad), numeric_error);
}

TEST_CASE("gradient descent never returns worse than its first iterate",
          "[kta]") {
  auto rng = make_rng(99);
  const int n = 60;
  Eigen::MatrixXd data(n, 2);
  data.col(0) = normal_vector(rng, n);
  data.col(1) = 0.7 * data.col(0) + 0.3 * normal_vector(rng, n);

  OptimizerConfig config;
  config.method = "gradient";
  config.resample_m = 40;
  config.max_iters = 25;
  config.eta = 0.05;
  config.target_epsilon = 1e-3;
  config.seed = 11;

  const GradientOptResult r = minimize_kta_gradient(data, config);
  REQUIRE_FALSE(r.f_trace.empty());
  CHECK(r.f_best <= r.f_trace.front());
  CHECK(r.width_x > 0.0);
  CHECK(r.width_y > 0.0);
  CHECK(r.iterations == static_cast<int>(r.f_trace.size()));
  CHECK(r.converged == (r.f_best <= config.target_epsilon));

  // Same configuration, same result.
  const GradientOptResult again = minimize_kta_gradient(data, config);
  CHECK(again.f_best == r.f_best);
  CHECK(again.width_x == r.width_x);
}

TEST_CASE("the mean alignment objective is deterministic and averages pairs",
          "[kta]") {
  const Eigen::MatrixXd data = random_matrix(123, 30, 3);
  const auto builder = [](const Eigen::MatrixXd& block, double gamma) {
    return gaussian_kernel_matrix(block, {gamma});
  };
  const std::uint64_t seed = 17;
  const auto objective = mean_kta_objective(data, builder, seed);

  const double v1 = objective(0.9);
  const double v2 = objective(0.9);
  CHECK(v1 == v2);

  // Replicate the construction by hand: pair (i, j) with running index k is
  // decoupled with derive_seed(seed, k).
  double expected = 0.0;
  std::uint64_t k = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      Eigen::MatrixXd block(30, 2);
      block.col(0) = data.col(i);
      block.col(1) = data.col(j);
      const Eigen::MatrixXd mixed =
          shuffle_decouple(block, derive_seed(seed, k++));
      Eigen::MatrixXd a(30, 1), b(30, 1);
      a.col(0) = data.col(i);
      b.col(0) = mixed.col(1);
      expected += kta(center(builder(a, 0.9)), center(builder(b, 0.9))).value;
    }
  }
  CHECK(v1 == Catch::Approx(expected / 3.0).epsilon(1e-12));
}

TEST_CASE("optimizer config json round trip and validation", "[kta]") {
  OptimizerConfig c;
  c.method = "gradient";
  c.low = 0.02;
  c.high = 0.4;
  c.init = 0.15;
  c.eta = 0.01;
  c.resample_m = 64;
  c.target_epsilon = 1e-2;
  c.tol = 1e-3;
  c.max_iters = 55;
  c.seed = 99;

  const OptimizerConfig back = optimizer_config_from_json(to_json(c));
  CHECK(back.method == c.method);
  CHECK(back.low == c.low);
  CHECK(back.high == c.high);
  CHECK(back.init == c.init);
  CHECK(back.eta == c.eta);
  CHECK(back.resample_m == c.resample_m);
  CHECK(back.target_epsilon == c.target_epsilon);
  CHECK(back.tol == c.tol);
  CHECK(back.max_iters == c.max_iters);
  CHECK(back.seed == c.seed);

  // Partial documents keep defaults for omitted fields.
  const OptimizerConfig partial =
      optimizer_config_from_json(nlohmann::json{{"init", 0.2}});
  CHECK(partial.init == 0.2);
  CHECK(partial.low == OptimizerConfig{}.low);
  CHECK(partial.method == "scalar");

  CHECK_THROWS_AS(
      optimizer_config_from_json(nlohmann::json{{"surprise", 1}}),
      input_error);

  OptimizerConfig bad;
  bad.low = 0.5;
  bad.high = 0.1;
  CHECK_THROWS_AS(validate(bad), input_error);
  bad = OptimizerConfig{};
  bad.init = 0.9;  // outside (low, high)
  CHECK_THROWS_AS(validate(bad), input_error);
  bad = OptimizerConfig{};
  bad.method = "annealing";
  CHECK_THROWS_AS(validate(bad), input_error);
  bad = OptimizerConfig{};
  bad.resample_m = 2;
  CHECK_THROWS_AS(validate(bad), input_error);
}

TEST_CASE("alignment rejects malformed inputs", "[kta]") {
  const KernelMatrix centered = random_centered_kernel(5, 10);
  KernelMatrix uncentered =
      gaussian_kernel_matrix(random_matrix(6, 10, 1), {1.0});
  CHECK_THROWS_AS(kta(uncentered, centered), input_error);

  KernelMatrix zero;
  zero.values = Eigen::MatrixXd::Zero(10, 10);
  zero.centered = true;
  CHECK_THROWS_AS(kta(zero, centered), degenerate_data_error);

  Eigen::MatrixXd three(10, 3);
  three.setZero();
  CHECK_THROWS_AS(shuffle_decouple(three, 0), size_error);
}
