// Synthetic three-variable junction datasets over columns X, Y, Z, with the
// canonical shapes
//   collider     X -> Z <- Y
//   chain        X -> Z -> Y
//   fork         X <- Z -> Y
//   independent  no edges
// and the generating relations
//   collider:    X = L1,          Y = L2^2,        Z = (X + Y)/2 + e
//   chain:       X = (L1 + L2)/2, Z = X/2 + e,     Y = Z^2 + e
//   fork:        Z = (L1 + L2)/2, X = Z/2 + e,     Y = Z^2 + e
//   independent: X = L1, Y = L2, Z = L3.
// L are latent sources: iid standard normals for gen_junction, or observables
// measured from independently evaluated data-embedding circuits for
// gen_quantum_junction.  Children are computed from the observed (noisy)
// parents; each non-source variable v gets additive noise with standard
// deviation noise_ratio * sd(signal of v).
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcausal/dataset.hpp"
#include "qcausal/error.hpp"
#include "qcausal/graph.hpp"
#include "qcausal/qsim.hpp"
#include "qcausal/random.hpp"

namespace qcausal {

enum class JunctionKind { Collider, Fork, Chain, Independent };

inline std::string to_string(JunctionKind kind) {
  switch (kind) {
    case JunctionKind::Collider: return "collider";
    case JunctionKind::Fork: return "fork";
    case JunctionKind::Chain: return "chain";
    case JunctionKind::Independent: return "independent";
  }
  throw input_error("invalid JunctionKind");
}

inline JunctionKind parse_junction_kind(const std::string& s) {
  if (s == "collider") return JunctionKind::Collider;
  if (s == "fork") return JunctionKind::Fork;
  if (s == "chain") return JunctionKind::Chain;
  if (s == "independent") return JunctionKind::Independent;
  throw input_error("unknown junction kind '" + s +
                    "' (expected collider, fork, chain or independent)");
}

inline MixedGraph junction_ground_truth(JunctionKind kind) {
  MixedGraph g({"X", "Y", "Z"});
  const int x = 0, y = 1, z = 2;
  switch (kind) {
    case JunctionKind::Collider:
      g.add_directed(x, z);
      g.add_directed(y, z);
      break;
    case JunctionKind::Chain:
      g.add_directed(x, z);
      g.add_directed(z, y);
      break;
    case JunctionKind::Fork:
      g.add_directed(z, x);
      g.add_directed(z, y);
      break;
    case JunctionKind::Independent:
      break;
  }
  return g;
}

struct GeneratedData {
  Dataset data;
  MixedGraph truth;
};

namespace detail {

inline double sample_sd(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() /
                   (static_cast<double>(v.size()) - 1.0));
}

// signal + noise_ratio * sd(signal) * N(0, 1); the noise vector is always
// drawn so the RNG stream does not depend on noise_ratio.
inline Eigen::VectorXd add_noise(const Eigen::VectorXd& signal,
                                 double noise_ratio, std::mt19937_64& rng) {
  const double sd = sample_sd(signal);
  const Eigen::VectorXd eps = normal_vector(rng, static_cast<int>(signal.size()));
  return signal + noise_ratio * sd * eps;
}

inline void check_gen_args(int n, double noise_ratio) {
  if (n < 2) throw size_error("junction generator: need n >= 2");
  if (!(noise_ratio >= 0.0) || !std::isfinite(noise_ratio))
    throw input_error("junction generator: noise_ratio must be >= 0");
}

// Assembles the three columns from pre-drawn latent sources.  `latents` must
// hold 3 columns for the independent kind and 2 otherwise; noise vectors are
// drawn from `rng` in canonical child order.
inline GeneratedData compose_junction(JunctionKind kind,
                                      const Eigen::MatrixXd& latents,
                                      double noise_ratio,
                                      std::mt19937_64& rng) {
  const int n = static_cast<int>(latents.rows());
  Eigen::VectorXd x(n), y(n), z(n);
  switch (kind) {
    case JunctionKind::Collider:
      x = latents.col(0);
      y = latents.col(1).array().square();
      z = add_noise(0.5 * (x + y), noise_ratio, rng);
      break;
    case JunctionKind::Chain:
      x = 0.5 * (latents.col(0) + latents.col(1));
      z = add_noise(0.5 * x, noise_ratio, rng);
      y = add_noise(z.array().square(), noise_ratio, rng);
      break;
    case JunctionKind::Fork:
      z = 0.5 * (latents.col(0) + latents.col(1));
      x = add_noise(0.5 * z, noise_ratio, rng);
      y = add_noise(z.array().square(), noise_ratio, rng);
      break;
    case JunctionKind::Independent:
      x = latents.col(0);
      y = latents.col(1);
      z = latents.col(2);
      break;
  }

  GeneratedData out{Dataset{{"X", "Y", "Z"}, Eigen::MatrixXd(n, 3)},
                    junction_ground_truth(kind)};
  out.data.values.col(0) = x;
  out.data.values.col(1) = y;
  out.data.values.col(2) = z;
  return out;
}

}  // namespace detail

// Classical generator: latent sources are iid standard normals.  Identical
// (kind, n, noise_ratio, seed) reproduce the dataset exactly.
inline GeneratedData gen_junction(JunctionKind kind, int n,
                                  double noise_ratio = 0.05,
                                  std::uint64_t seed = 0) {
  detail::check_gen_args(n, noise_ratio);
  auto rng = make_rng(seed);
  const int n_latents = kind == JunctionKind::Independent ? 3 : 2;
  Eigen::MatrixXd latents(n, n_latents);
  for (int k = 0; k < n_latents; ++k) latents.col(k) = normal_vector(rng, n);
  return detail::compose_junction(kind, latents, noise_ratio, rng);
}

// Pinned data-embedding circuit for quantum sources: 2 qubits, H on both,
// one RY embedding layer, CX(0 -> 1).
inline CircuitSpec default_quantum_generator() {
  CircuitSpec spec;
  spec.n_qubits = 2;
  spec.init = InitGate::H;
  spec.embedding = Embedding::RY;
  spec.entangler_gate = EntanglerGate::CX;
  spec.entangler_topology = EntanglerTopology::Ladder;
  spec.depth = 1;
  spec.scaling = 1.0;
  return spec;
}

// Affine map of clipped standard normals into rotation angles:
// [-3, 3] -> [0, pi].
inline Eigen::VectorXd gaussian_to_angles(const Eigen::VectorXd& g) {
  return ((g.array().min(3.0).max(-3.0) + 3.0) / 6.0 * M_PI).matrix();
}

// One source observation: prepare the embedding state for the given angles
// and measure (<sigma_axis> + 1)/2 on one qubit.  Deterministic in
// (spec, angles); the value lies in [0, 1].
inline double measure_source(const CircuitSpec& spec,
                             const Eigen::VectorXd& angles, PauliAxis axis,
                             int qubit) {
  return measure_observable(prepare_state(spec, angles), qubit, axis);
}

// Quantum generator: each latent source column is measured from its own
// independent circuit evaluations (fresh Gaussian inputs per row), so
// distinct sources are statistically independent as the junction shapes
// require.  Even-indexed latents measure sigma_x on qubit 0, odd-indexed
// ones sigma_z on the last qubit.  The junction composition and noise model
// match gen_junction, with measured values in [0, 1] in place of normals.
inline GeneratedData gen_quantum_junction(JunctionKind kind, int n,
                                          const CircuitSpec& generator,
                                          std::uint64_t seed = 0,
                                          double noise_ratio = 0.05) {
  detail::check_gen_args(n, noise_ratio);
  validate(generator);
  auto rng = make_rng(seed);
  const int n_latents = kind == JunctionKind::Independent ? 3 : 2;
  Eigen::MatrixXd latents(n, n_latents);
  for (int k = 0; k < n_latents; ++k) {
    const PauliAxis axis = (k % 2 == 0) ? PauliAxis::X : PauliAxis::Z;
    const int qubit = (k % 2 == 0) ? 0 : generator.n_qubits - 1;
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd g = normal_vector(rng, generator.n_qubits);
      latents(i, k) = measure_source(generator, gaussian_to_angles(g), axis,
                                     qubit);
    }
  }
  return detail::compose_junction(kind, latents, noise_ratio, rng);
}

}  // namespace qcausal
