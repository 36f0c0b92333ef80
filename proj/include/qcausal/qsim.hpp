// Embedded statevector simulator for data-embedding circuits and the fidelity
// kernel k(x, x') = |<psi(x)|psi(x')>|^2.
//
// A circuit is described by CircuitSpec: one fixed init gate on every qubit,
// then `depth` repetitions of [rotation embedding layer; entangler layer].
// Qubit q encodes feature q mod d with rotation angle scaling * x[q mod d].
// Amplitude indexing: qubit 0 is the least significant bit of the basis index.
//
// Rotation conventions (theta in radians):
//   RY(theta) = exp(-i theta Y / 2),  RX = exp(-i theta X / 2),
//   RZ(theta) = exp(-i theta Z / 2).
// The RXRZ embedding applies RX(theta) followed by RZ(theta), same angle.
#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qcausal/error.hpp"
#include "qcausal/kernels.hpp"

namespace qcausal {

enum class InitGate { None, H, S, T };
enum class Embedding { RY, RXRZ };
enum class EntanglerGate { None, CX, CZ, SqrtISwap };
enum class EntanglerTopology { Ladder, Circ, AllToAll };
enum class PauliAxis { X, Z };

struct CircuitSpec {
  int n_qubits = 1;
  InitGate init = InitGate::H;
  Embedding embedding = Embedding::RY;
  EntanglerGate entangler_gate = EntanglerGate::CX;
  EntanglerTopology entangler_topology = EntanglerTopology::Ladder;
  int depth = 5;
  double scaling = 1.0;
};

inline void validate(const CircuitSpec& spec) {
  if (spec.n_qubits < 1 || spec.n_qubits > 24)
    throw input_error("CircuitSpec: n_qubits must be in [1, 24], got " +
                      std::to_string(spec.n_qubits));
  if (spec.depth < 1)
    throw input_error("CircuitSpec: depth must be >= 1, got " +
                      std::to_string(spec.depth));
  if (!(spec.scaling > 0.0) || !std::isfinite(spec.scaling))
    throw input_error("CircuitSpec: scaling must be positive and finite");
}

// Ordered (control, target) pairs for one entangler layer.  CZ and SqrtISwap
// are symmetric gates, so only CX distinguishes the two roles.
inline std::vector<std::pair<int, int>> entangler_pairs(
    EntanglerTopology topology, int n_qubits) {
  std::vector<std::pair<int, int>> pairs;
  if (n_qubits < 2) return pairs;
  switch (topology) {
    case EntanglerTopology::Ladder:
      for (int q = 0; q + 1 < n_qubits; ++q) pairs.emplace_back(q, q + 1);
      break;
    case EntanglerTopology::Circ:
      for (int q = 0; q + 1 < n_qubits; ++q) pairs.emplace_back(q, q + 1);
      pairs.emplace_back(n_qubits - 1, 0);
      break;
    case EntanglerTopology::AllToAll:
      for (int a = 0; a < n_qubits; ++a)
        for (int b = a + 1; b < n_qubits; ++b) pairs.emplace_back(a, b);
      break;
  }
  return pairs;
}

struct StateVector {
  int n_qubits = 0;
  Eigen::VectorXcd amplitudes;

  [[nodiscard]] double norm() const { return amplitudes.norm(); }
};

inline StateVector zero_state(int n_qubits) {
  if (n_qubits < 1) throw input_error("zero_state: n_qubits must be >= 1");
  StateVector s;
  s.n_qubits = n_qubits;
  s.amplitudes = Eigen::VectorXcd::Zero(Eigen::Index(1) << n_qubits);
  s.amplitudes(0) = 1.0;
  return s;
}

namespace detail {

using cd = std::complex<double>;

inline void require_qubit(const StateVector& s, int q, const char* op) {
  if (q < 0 || q >= s.n_qubits)
    throw index_error(std::string(op) + ": qubit " + std::to_string(q) +
                      " out of range for " + std::to_string(s.n_qubits) +
                      " qubits");
}

inline void apply_single(StateVector& s, int q, cd u00, cd u01, cd u10,
                         cd u11) {
  require_qubit(s, q, "apply_single");
  const Eigen::Index mask = Eigen::Index(1) << q;
  const Eigen::Index dim = s.amplitudes.size();
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (i & mask) continue;
    const cd a0 = s.amplitudes(i);
    const cd a1 = s.amplitudes(i | mask);
    s.amplitudes(i) = u00 * a0 + u01 * a1;
    s.amplitudes(i | mask) = u10 * a0 + u11 * a1;
  }
}

inline void apply_cx(StateVector& s, int control, int target) {
  require_qubit(s, control, "apply_cx");
  require_qubit(s, target, "apply_cx");
  const Eigen::Index cm = Eigen::Index(1) << control;
  const Eigen::Index tm = Eigen::Index(1) << target;
  const Eigen::Index dim = s.amplitudes.size();
  for (Eigen::Index i = 0; i < dim; ++i)
    if ((i & cm) && !(i & tm)) std::swap(s.amplitudes(i), s.amplitudes(i | tm));
}

inline void apply_cz(StateVector& s, int a, int b) {
  require_qubit(s, a, "apply_cz");
  require_qubit(s, b, "apply_cz");
  const Eigen::Index am = Eigen::Index(1) << a;
  const Eigen::Index bm = Eigen::Index(1) << b;
  const Eigen::Index dim = s.amplitudes.size();
  for (Eigen::Index i = 0; i < dim; ++i)
    if ((i & am) && (i & bm)) s.amplitudes(i) = -s.amplitudes(i);
}

// Acts on span{|01>, |10>} as [[1, i], [i, 1]] / sqrt(2); |00>, |11> fixed.
inline void apply_sqrt_iswap(StateVector& s, int a, int b) {
  require_qubit(s, a, "apply_sqrt_iswap");
  require_qubit(s, b, "apply_sqrt_iswap");
  const Eigen::Index am = Eigen::Index(1) << a;
  const Eigen::Index bm = Eigen::Index(1) << b;
  const double r = 1.0 / std::sqrt(2.0);
  const cd ir(0.0, r);
  const Eigen::Index dim = s.amplitudes.size();
  for (Eigen::Index i = 0; i < dim; ++i) {
    if ((i & am) || !(i & bm)) continue;  // visit each pair once, via a=0,b=1
    const Eigen::Index j = (i | am) & ~bm;
    const cd x = s.amplitudes(i);
    const cd y = s.amplitudes(j);
    s.amplitudes(i) = r * x + ir * y;
    s.amplitudes(j) = ir * x + r * y;
  }
}

inline void apply_rotation(StateVector& s, int q, Embedding emb,
                           double theta) {
  const double c = std::cos(theta / 2.0);
  const double sn = std::sin(theta / 2.0);
  switch (emb) {
    case Embedding::RY:
      apply_single(s, q, c, -sn, sn, c);
      break;
    case Embedding::RXRZ: {
      const cd mis(0.0, -sn);
      apply_single(s, q, c, mis, mis, c);  // RX(theta)
      const cd e0 = std::polar(1.0, -theta / 2.0);
      const cd e1 = std::polar(1.0, theta / 2.0);
      apply_single(s, q, e0, 0.0, 0.0, e1);  // RZ(theta)
      break;
    }
  }
}

inline void apply_init(StateVector& s, InitGate g) {
  const double r = 1.0 / std::sqrt(2.0);
  for (int q = 0; q < s.n_qubits; ++q) {
    switch (g) {
      case InitGate::None:
        break;
      case InitGate::H:
        apply_single(s, q, r, r, r, -r);
        break;
      case InitGate::S:
        apply_single(s, q, 1.0, 0.0, 0.0, cd(0.0, 1.0));
        break;
      case InitGate::T:
        apply_single(s, q, 1.0, 0.0, 0.0, std::polar(1.0, M_PI / 4.0));
        break;
    }
  }
}

inline void apply_entangler(StateVector& s, const CircuitSpec& spec) {
  if (spec.entangler_gate == EntanglerGate::None) return;
  for (const auto& [a, b] :
       entangler_pairs(spec.entangler_topology, spec.n_qubits)) {
    switch (spec.entangler_gate) {
      case EntanglerGate::None:
        break;
      case EntanglerGate::CX:
        apply_cx(s, a, b);
        break;
      case EntanglerGate::CZ:
        apply_cz(s, a, b);
        break;
      case EntanglerGate::SqrtISwap:
        apply_sqrt_iswap(s, a, b);
        break;
    }
  }
}

}  // namespace detail

// |psi(x)> for one sample x (a d-dimensional feature vector, d >= 1).
inline StateVector prepare_state(const CircuitSpec& spec,
                                 const Eigen::VectorXd& x) {
  validate(spec);
  const int d = static_cast<int>(x.size());
  if (d < 1) throw input_error("prepare_state: feature vector is empty");
  if (!x.allFinite())
    throw input_error("prepare_state: feature vector has non-finite values");

  StateVector s = zero_state(spec.n_qubits);
  detail::apply_init(s, spec.init);
  for (int layer = 0; layer < spec.depth; ++layer) {
    for (int q = 0; q < spec.n_qubits; ++q)
      detail::apply_rotation(s, q, spec.embedding, spec.scaling * x(q % d));
    detail::apply_entangler(s, spec);
  }
  return s;
}

// (<sigma_axis> + 1) / 2 on one qubit; lies in [0, 1] for a normalized state.
inline double measure_observable(const StateVector& s, int qubit,
                                 PauliAxis axis) {
  detail::require_qubit(s, qubit, "measure_observable");
  if (std::abs(s.norm() - 1.0) > 1e-6)
    throw numeric_error("measure_observable: state is not normalized");
  const Eigen::Index mask = Eigen::Index(1) << qubit;
  const Eigen::Index dim = s.amplitudes.size();
  double expect = 0.0;
  switch (axis) {
    case PauliAxis::Z:
      for (Eigen::Index i = 0; i < dim; ++i)
        expect += ((i & mask) ? -1.0 : 1.0) * std::norm(s.amplitudes(i));
      break;
    case PauliAxis::X:
      for (Eigen::Index i = 0; i < dim; ++i) {
        if (i & mask) continue;
        expect += 2.0 * std::real(std::conj(s.amplitudes(i)) *
                                  s.amplitudes(i | mask));
      }
      break;
  }
  return (expect + 1.0) / 2.0;
}

// Fidelity kernel matrix over the rows of `data`.  States are prepared once
// per row and reused for all pairs.  Entries are clamped to [0, 1] to absorb
// last-bit float excursions; the diagonal is exactly 1.
inline KernelMatrix fidelity_kernel_matrix(const Eigen::MatrixXd& data,
                                           const CircuitSpec& spec) {
  validate(spec);
  const int n = static_cast<int>(data.rows());
  if (n < 2) throw size_error("fidelity_kernel_matrix: need at least 2 rows");
  detail::require_finite(data, "fidelity_kernel_matrix");
  if (data.cols() < 1)
    throw input_error("fidelity_kernel_matrix: data has no columns");

  std::vector<StateVector> states;
  states.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    states.push_back(prepare_state(spec, data.row(i).transpose()));

  KernelMatrix k;
  k.values.resize(n, n);
  for (int i = 0; i < n; ++i) {
    k.values(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const std::complex<double> ov =
          states[static_cast<std::size_t>(i)].amplitudes.dot(
              states[static_cast<std::size_t>(j)].amplitudes);
      const double f = std::clamp(std::norm(ov), 0.0, 1.0);
      k.values(i, j) = f;
      k.values(j, i) = f;
    }
  }
  k.centered = false;
  detail::check_kernel_matrix(k, "fidelity_kernel_matrix");
  return k;
}

// --- CircuitSpec JSON (exact field set; unknown fields are rejected) -------

namespace detail {

inline std::string to_string(InitGate g) {
  switch (g) {
    case InitGate::None: return "None";
    case InitGate::H: return "H";
    case InitGate::S: return "S";
    case InitGate::T: return "T";
  }
  throw input_error("invalid InitGate");
}

inline std::string to_string(Embedding e) {
  switch (e) {
    case Embedding::RY: return "RY";
    case Embedding::RXRZ: return "RXRZ";
  }
  throw input_error("invalid Embedding");
}

inline std::string to_string(EntanglerGate g) {
  switch (g) {
    case EntanglerGate::None: return "None";
    case EntanglerGate::CX: return "CX";
    case EntanglerGate::CZ: return "CZ";
    case EntanglerGate::SqrtISwap: return "SqrtISwap";
  }
  throw input_error("invalid EntanglerGate");
}

inline std::string to_string(EntanglerTopology t) {
  switch (t) {
    case EntanglerTopology::Ladder: return "ladder";
    case EntanglerTopology::Circ: return "circ";
    case EntanglerTopology::AllToAll: return "all_to_all";
  }
  throw input_error("invalid EntanglerTopology");
}

template <typename Enum>
Enum enum_from_string(const std::string& s,
                      std::initializer_list<std::pair<const char*, Enum>> map,
                      const char* field) {
  for (const auto& [name, value] : map)
    if (s == name) return value;
  throw input_error(std::string("CircuitSpec: invalid value '") + s +
                    "' for field '" + field + "'");
}

}  // namespace detail

inline nlohmann::json to_json(const CircuitSpec& spec) {
  return nlohmann::json{{"n_qubits", spec.n_qubits},
                        {"init", detail::to_string(spec.init)},
                        {"embedding", detail::to_string(spec.embedding)},
                        {"entangler_gate", detail::to_string(spec.entangler_gate)},
                        {"entangler_topology",
                         detail::to_string(spec.entangler_topology)},
                        {"depth", spec.depth},
                        {"scaling", spec.scaling}};
}

inline CircuitSpec circuit_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw input_error("CircuitSpec: JSON must be an object");
  static const std::vector<std::string> known = {
      "n_qubits",       "init",  "embedding", "entangler_gate",
      "entangler_topology", "depth", "scaling"};
  for (const auto& item : j.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end())
      throw input_error("CircuitSpec: unknown field '" + item.key() + "'");
  }
  for (const auto& key : known)
    if (!j.contains(key))
      throw input_error("CircuitSpec: missing field '" + key + "'");

  CircuitSpec spec;
  try {
    spec.n_qubits = j.at("n_qubits").get<int>();
    spec.depth = j.at("depth").get<int>();
    spec.scaling = j.at("scaling").get<double>();
    spec.init = detail::enum_from_string<InitGate>(
        j.at("init").get<std::string>(),
        {{"None", InitGate::None},
         {"H", InitGate::H},
         {"S", InitGate::S},
         {"T", InitGate::T}},
        "init");
    spec.embedding = detail::enum_from_string<Embedding>(
        j.at("embedding").get<std::string>(),
        {{"RY", Embedding::RY}, {"RXRZ", Embedding::RXRZ}}, "embedding");
    spec.entangler_gate = detail::enum_from_string<EntanglerGate>(
        j.at("entangler_gate").get<std::string>(),
        {{"None", EntanglerGate::None},
         {"CX", EntanglerGate::CX},
         {"CZ", EntanglerGate::CZ},
         {"SqrtISwap", EntanglerGate::SqrtISwap}},
        "entangler_gate");
    spec.entangler_topology = detail::enum_from_string<EntanglerTopology>(
        j.at("entangler_topology").get<std::string>(),
        {{"ladder", EntanglerTopology::Ladder},
         {"circ", EntanglerTopology::Circ},
         {"all_to_all", EntanglerTopology::AllToAll}},
        "entangler_topology");
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("CircuitSpec: malformed JSON field: ") +
                      e.what());
  }
  validate(spec);
  return spec;
}

}  // namespace qcausal
