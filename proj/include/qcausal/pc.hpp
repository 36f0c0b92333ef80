// Constraint-based structure learning: the PC skeleton phase driven by a
// pluggable conditional-independence tester, v-structure orientation from
// separating sets, and orientation propagation to a fixed point.
//
// Determinism contract: variables are processed in dataset column order,
// conditioning subsets in lexicographic order, and edge removals are applied
// in pair-sorted order after each level completes, so results do not depend
// on evaluation scheduling.  Conflicting v-structure orientations resolve
// first-wins; orientations that would close a directed cycle are skipped.
// Both events are logged into the result notes.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qcausal/dataset.hpp"
#include "qcausal/error.hpp"
#include "qcausal/graph.hpp"
#include "qcausal/kcit.hpp"
#include "qcausal/kernels.hpp"
#include "qcausal/kta.hpp"
#include "qcausal/qsim.hpp"

namespace qcausal {

// Separating sets recorded during skeleton discovery.  Exactly the pairs
// whose edge was removed have an entry; querying any other pair throws.
class SepsetTable {
 public:
  void set(int a, int b, std::vector<int> sepset) {
    const auto key = norm(a, b);
    if (table_.count(key) > 0)
      throw input_error("SepsetTable: pair already has an entry");
    table_.emplace(key, std::move(sepset));
  }

  [[nodiscard]] bool contains(int a, int b) const {
    return table_.count(norm(a, b)) > 0;
  }

  [[nodiscard]] const std::vector<int>& get(int a, int b) const {
    const auto it = table_.find(norm(a, b));
    if (it == table_.end())
      throw index_error("SepsetTable: no entry for pair (" +
                        std::to_string(a) + ", " + std::to_string(b) + ")");
    return it->second;
  }

  [[nodiscard]] std::size_t size() const { return table_.size(); }

  [[nodiscard]] const std::map<std::pair<int, int>, std::vector<int>>& all()
      const {
    return table_;
  }

 private:
  static std::pair<int, int> norm(int a, int b) {
    if (a == b) throw input_error("SepsetTable: pair must be distinct");
    return {std::min(a, b), std::max(a, b)};
  }

  std::map<std::pair<int, int>, std::vector<int>> table_;
};

struct TestRecord {
  int x = 0;
  int y = 0;
  std::vector<int> cond;
  double statistic = 0.0;
  double p_value = 1.0;
  bool independent = true;
};

using TestLog = std::vector<TestRecord>;

// Interface for conditional-independence tests over indexed variables.
// Implementations must be deterministic given their data and configuration.
class CITester {
 public:
  virtual ~CITester() = default;
  [[nodiscard]] virtual int variable_count() const = 0;
  virtual CITestResult test(int x, int y, const std::vector<int>& cond,
                            double alpha) = 0;
};

// Oracle tester for a known DAG: independence verdicts follow d-separation
// exactly (p-value 1 when separated, 0 otherwise).
class DSeparationTester : public CITester {
 public:
  explicit DSeparationTester(MixedGraph dag) : dag_(std::move(dag)) {
    if (!dag_.is_dag())
      throw input_error("DSeparationTester: graph is not a DAG");
  }

  [[nodiscard]] int variable_count() const override { return dag_.n_nodes(); }

  CITestResult test(int x, int y, const std::vector<int>& cond,
                    double alpha) override {
    const bool sep = d_separated(dag_, x, y, cond);
    CITestResult r;
    r.alpha = alpha;
    r.statistic = sep ? 0.0 : 1.0;
    r.p_value = sep ? 1.0 : 0.0;
    r.independent = sep;
    return r;
  }

 private:
  MixedGraph dag_;
};

enum class KernelFamily { Gaussian, Quantum };

// Kernel/test configuration for data-driven testers.  The circuit acts as a
// template: its n_qubits is replaced per variable set by the set's dimension,
// capped at qubit_cap.
struct KernelTestConfig {
  KernelFamily family = KernelFamily::Gaussian;
  double epsilon = 1e-3;
  CircuitSpec circuit{};
  int qubit_cap = 8;
  bool monte_carlo_null = false;
  MonteCarloNull mc{};
};

// KCIT-backed tester.  Kernel matrices, centered variants and conditioning
// projections are cached per column subset; test outcomes are cached per
// (pair, subset) so the two enumeration orders of an unordered pair share one
// evaluation.  Gaussian bandwidths come from the median heuristic on the
// subset being embedded; quantum kernels embed the subset on min(dim,
// qubit_cap) qubits with the template's scaling.
//
// Conditional tests embed the joint (x, conditioning set) as ONE subset, so
// its kernel shares a single bandwidth (or circuit).  Building it instead as
// a product of separately-bandwidthed factors leaves conditioning-set
// structure in the joint kernel that is sharper than the ridge basis K~_z can
// regress away, and the test then rejects true conditional independences on
// near-deterministic parent-child data.
class KernelCITester : public CITester {
 public:
  KernelCITester(Eigen::MatrixXd data, KernelTestConfig config)
      : data_(std::move(data)), config_(std::move(config)) {
    if (data_.rows() < 4)
      throw size_error("KernelCITester: need at least 4 samples");
    if (data_.cols() < 1)
      throw size_error("KernelCITester: need at least 1 variable");
    if (!data_.allFinite())
      throw input_error("KernelCITester: data has non-finite values");
    validate(config_.circuit);
    if (config_.qubit_cap < 1)
      throw input_error("KernelCITester: qubit_cap must be >= 1");
    if (!(config_.epsilon > 0.0))
      throw input_error("KernelCITester: epsilon must be positive");
  }

  [[nodiscard]] int variable_count() const override {
    return static_cast<int>(data_.cols());
  }

  CITestResult test(int x, int y, const std::vector<int>& cond,
                    double alpha) override {
    check_args(x, y, cond);
    const CacheKey key{std::min(x, y), std::max(x, y), sorted(cond)};
    const auto hit = results_.find(key);
    if (hit != results_.end()) {
      CITestResult r = hit->second;
      r.alpha = alpha;
      r.independent = r.p_value > alpha;
      return r;
    }

    CITestResult r;
    if (cond.empty()) {
      r = config_.monte_carlo_null
              ? uncond_test_montecarlo(centered({x}), centered({y}), alpha,
                                       config_.mc)
              : uncond_test(centered({x}), centered({y}), alpha);
    } else {
      const std::vector<int> z = sorted(cond);
      std::vector<int> xz = z;
      xz.push_back(x);
      std::sort(xz.begin(), xz.end());
      const KernelMatrix& kxz = centered(xz);
      const auto& proj = projection(z);
      const auto [ka, kb] = conditional_kernels(kxz, centered({y}), proj);
      r = config_.monte_carlo_null
              ? cond_test_montecarlo(ka, kb, alpha, config_.mc)
              : cond_test(ka, kb, alpha);
    }
    results_.emplace(key, r);
    return r;
  }

  [[nodiscard]] const KernelTestConfig& config() const { return config_; }

 private:
  struct CacheKey {
    int a;
    int b;
    std::vector<int> cond;
    bool operator<(const CacheKey& o) const {
      return std::tie(a, b, cond) < std::tie(o.a, o.b, o.cond);
    }
  };

  static std::vector<int> sorted(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    return v;
  }

  void check_args(int x, int y, const std::vector<int>& cond) const {
    const int p = variable_count();
    const auto check = [p](int i) {
      if (i < 0 || i >= p)
        throw index_error("KernelCITester: variable index " +
                          std::to_string(i) + " out of range");
    };
    check(x);
    check(y);
    if (x == y) throw input_error("KernelCITester: x and y must differ");
    for (const int c : cond) {
      check(c);
      if (c == x || c == y)
        throw input_error(
            "KernelCITester: conditioning set contains a tested variable");
    }
    std::set<int> uniq(cond.begin(), cond.end());
    if (uniq.size() != cond.size())
      throw input_error("KernelCITester: conditioning set has duplicates");
  }

  Eigen::MatrixXd subset_data(const std::vector<int>& cols) const {
    Eigen::MatrixXd sub(data_.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k)
      sub.col(static_cast<Eigen::Index>(k)) = data_.col(cols[k]);
    return sub;
  }

  const KernelMatrix& uncentered(const std::vector<int>& cols) {
    const auto it = uncentered_.find(cols);
    if (it != uncentered_.end()) return it->second;
    const Eigen::MatrixXd sub = subset_data(cols);
    KernelMatrix k;
    switch (config_.family) {
      case KernelFamily::Gaussian:
        k = gaussian_kernel_matrix(sub, {median_heuristic_width(sub)});
        break;
      case KernelFamily::Quantum: {
        CircuitSpec spec = config_.circuit;
        spec.n_qubits = std::min(static_cast<int>(cols.size()),
                                 config_.qubit_cap);
        k = fidelity_kernel_matrix(sub, spec);
        break;
      }
    }
    return uncentered_.emplace(cols, std::move(k)).first->second;
  }

  const KernelMatrix& centered(const std::vector<int>& cols) {
    const auto it = centered_.find(cols);
    if (it != centered_.end()) return it->second;
    return centered_.emplace(cols, center(uncentered(cols))).first->second;
  }

  const ConditionalProjection& projection(const std::vector<int>& cols) {
    const auto it = projections_.find(cols);
    if (it != projections_.end()) return it->second;
    return projections_
        .emplace(cols, conditional_projection(centered(cols), config_.epsilon))
        .first->second;
  }

  Eigen::MatrixXd data_;
  KernelTestConfig config_;
  std::map<std::vector<int>, KernelMatrix> uncentered_;
  std::map<std::vector<int>, KernelMatrix> centered_;
  std::map<std::vector<int>, ConditionalProjection> projections_;
  std::map<CacheKey, CITestResult> results_;
};

struct SkeletonOptions {
  double alpha = 0.05;
  int max_cond_size = -1;  // -1 = unbounded
  TestLog* log = nullptr;
};

struct SkeletonResult {
  MixedGraph graph;
  SepsetTable sepsets;
};

namespace detail {

// Lexicographic size-k subsets of a sorted candidate list.
inline bool next_combination(std::vector<int>& idx, int n) {
  const int k = static_cast<int>(idx.size());
  for (int i = k - 1; i >= 0; --i) {
    if (idx[static_cast<std::size_t>(i)] < n - (k - i)) {
      ++idx[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j)
        idx[static_cast<std::size_t>(j)] =
            idx[static_cast<std::size_t>(j - 1)] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace detail

// PC skeleton phase.  Level s tests every ordered adjacent pair (x, y)
// against all size-s subsets of adj(x) \ {y}, where adjacency is the
// snapshot taken at the start of the level; removals are collected and
// applied pair-sorted once the level completes.  Each removed edge records
// the first separating set found.
inline SkeletonResult skeleton(const std::vector<std::string>& names,
                               CITester& tester,
                               const SkeletonOptions& opts = {}) {
  if (static_cast<int>(names.size()) != tester.variable_count())
    throw size_error("skeleton: name count does not match tester variables");
  if (!(opts.alpha > 0.0 && opts.alpha < 1.0))
    throw input_error("skeleton: alpha must lie in (0, 1)");

  const int p = static_cast<int>(names.size());
  SkeletonResult result{MixedGraph{names}, SepsetTable{}};
  for (int a = 0; a < p; ++a)
    for (int b = a + 1; b < p; ++b) result.graph.add_undirected(a, b);

  for (int level = 0;; ++level) {
    if (opts.max_cond_size >= 0 && level > opts.max_cond_size) break;

    // Snapshot adjacency: every test in this level sees the same graph.
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(p));
    for (int v = 0; v < p; ++v)
      adj[static_cast<std::size_t>(v)] = result.graph.neighbors(v);

    bool candidate_exists = false;
    std::map<std::pair<int, int>, std::vector<int>> removals;
    // A (pair, subset) evaluated through both enumeration orders is one test:
    // log it once.
    std::set<std::tuple<int, int, std::vector<int>>> seen_tests;

    for (int x = 0; x < p; ++x) {
      for (const int y : adj[static_cast<std::size_t>(x)]) {
        const auto pair_key = std::make_pair(std::min(x, y), std::max(x, y));
        if (removals.count(pair_key) > 0) continue;

        std::vector<int> candidates;
        for (const int v : adj[static_cast<std::size_t>(x)])
          if (v != y) candidates.push_back(v);
        if (static_cast<int>(candidates.size()) < level) continue;
        candidate_exists = candidate_exists ||
                           static_cast<int>(candidates.size()) > level;

        std::vector<int> pick(static_cast<std::size_t>(level));
        for (int i = 0; i < level; ++i) pick[static_cast<std::size_t>(i)] = i;
        bool more = true;
        while (more) {
          std::vector<int> subset;
          subset.reserve(static_cast<std::size_t>(level));
          for (const int i : pick)
            subset.push_back(candidates[static_cast<std::size_t>(i)]);

          const CITestResult r = tester.test(x, y, subset, opts.alpha);
          std::vector<int> norm_subset = subset;
          std::sort(norm_subset.begin(), norm_subset.end());
          if (opts.log != nullptr &&
              seen_tests
                  .emplace(pair_key.first, pair_key.second,
                           std::move(norm_subset))
                  .second)
            opts.log->push_back({x, y, subset, r.statistic, r.p_value,
                                 r.independent});
          if (r.independent) {
            removals.emplace(pair_key, subset);
            break;
          }
          more = level > 0 &&
                 detail::next_combination(pick,
                                          static_cast<int>(candidates.size()));
          if (level == 0) more = false;
        }
      }
    }

    for (const auto& [pair, sepset] : removals) {
      result.graph.remove_edge(pair.first, pair.second);
      result.sepsets.set(pair.first, pair.second, sepset);
    }
    if (!candidate_exists) break;
  }
  return result;
}

// Orients unshielded triples x - z - y (x, y nonadjacent) as x -> z <- y
// whenever z is absent from Sepset(x, y).  Conflicting orientations resolve
// first-wins; skipped conflicts are noted.
inline MixedGraph orient_vstructures(const SkeletonResult& skel,
                                     std::vector<std::string>* notes = nullptr) {
  MixedGraph g = skel.graph;
  const int p = g.n_nodes();

  const auto note = [notes](const std::string& msg) {
    if (notes != nullptr) notes->push_back(msg);
  };
  const auto orient_arm = [&g, &note](int from, int to) {
    if (g.has_directed(from, to)) return;  // already as wanted
    if (g.has_directed(to, from)) {
      note("v-structure conflict: kept earlier orientation " + g.name(to) +
           " -> " + g.name(from));
      return;
    }
    if (g.has_directed_path(to, from)) {
      note("skipped cycle-creating orientation " + g.name(from) + " -> " +
           g.name(to));
      return;
    }
    g.orient(from, to);
  };

  for (int z = 0; z < p; ++z) {
    const auto nb = skel.graph.neighbors(z);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        const int x = nb[i];
        const int y = nb[j];
        if (skel.graph.adjacent(x, y)) continue;
        const auto& sep = skel.sepsets.get(x, y);
        if (std::find(sep.begin(), sep.end(), z) != sep.end()) continue;
        orient_arm(x, z);
        orient_arm(y, z);
      }
    }
  }
  return g;
}

// Applies the two propagation rules to a fixed point:
//   1. x -> z, z - y, x and y nonadjacent  =>  z -> y
//   2. x - y with a directed path x ~> y   =>  x -> y
// Orientations that would close a directed cycle are skipped and noted.
inline MixedGraph propagate_orientations(
    const MixedGraph& input, std::vector<std::string>* notes = nullptr) {
  MixedGraph g = input;
  const int p = g.n_nodes();
  const auto note = [notes](const std::string& msg) {
    if (notes != nullptr) notes->push_back(msg);
  };
  const auto try_orient = [&g, &note](int from, int to) {
    if (!g.has_undirected(from, to)) return false;
    if (g.has_directed_path(to, from)) {
      note("skipped cycle-creating orientation " + g.name(from) + " -> " +
           g.name(to));
      return false;
    }
    g.orient(from, to);
    return true;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    // Rule 1.
    for (int z = 0; z < p; ++z) {
      for (const int x : g.parents(z)) {
        for (int y = 0; y < p; ++y) {
          if (y == x || y == z) continue;
          if (!g.has_undirected(z, y)) continue;
          if (g.adjacent(x, y)) continue;
          changed = try_orient(z, y) || changed;
        }
      }
    }
    // Rule 2.
    for (int x = 0; x < p; ++x) {
      for (int y = x + 1; y < p; ++y) {
        if (!g.has_undirected(x, y)) continue;
        if (g.has_directed_path(x, y))
          changed = try_orient(x, y) || changed;
        else if (g.has_directed_path(y, x))
          changed = try_orient(y, x) || changed;
      }
    }
  }
  return g;
}

struct PcConfig {
  KernelFamily kernel = KernelFamily::Gaussian;
  double alpha = 0.05;
  double epsilon = 1e-3;
  int max_cond_size = -1;
  int qubit_cap = 8;
  CircuitSpec circuit{};
  bool optimize = false;
  OptimizerConfig optimizer{};
  bool monte_carlo_null = false;
  MonteCarloNull mc{};
};

struct PcResult {
  MixedGraph graph;
  SepsetTable sepsets;
  TestLog tests;
  std::vector<std::string> notes;
  // Scaling actually used by quantum kernels (template value, or the
  // KTA-optimized one); unset for the Gaussian family.
  std::optional<double> scaling;
  std::vector<std::pair<double, double>> optimization_trace;
};

// Full pipeline: standardize, optionally tune the quantum scaling by
// minimizing mean KTA over shuffle-decoupled column pairs, run the skeleton
// phase, orient v-structures, propagate orientations.
inline PcResult run_pc(const Dataset& data, const PcConfig& config) {
  if (data.n_cols() < 1) throw size_error("run_pc: dataset has no columns");
  if (!(data.values.allFinite())) {
    for (int j = 0; j < data.n_cols(); ++j)
      for (int i = 0; i < data.n_rows(); ++i)
        if (!std::isfinite(data.values(i, j)))
          throw input_error("run_pc: non-finite value at row " +
                            std::to_string(i) + ", column '" + data.names[j] +
                            "'");
  }

  PcResult result{MixedGraph{data.names}, SepsetTable{}, {}, {}, {}, {}};
  if (data.n_cols() == 1) return result;  // nothing to discover

  const Dataset std_data = standardize(data);

  KernelTestConfig test_config;
  test_config.family = config.kernel;
  test_config.epsilon = config.epsilon;
  test_config.circuit = config.circuit;
  test_config.qubit_cap = config.qubit_cap;
  test_config.monte_carlo_null = config.monte_carlo_null;
  test_config.mc = config.mc;

  if (config.kernel == KernelFamily::Quantum) {
    if (config.optimize) {
      CircuitSpec column_spec = config.circuit;
      column_spec.n_qubits = 1;  // objective kernels embed single columns
      const auto builder = [column_spec](const Eigen::MatrixXd& block,
                                         double gamma) {
        CircuitSpec s = column_spec;
        s.scaling = gamma;
        return fidelity_kernel_matrix(block, s);
      };
      const auto objective = mean_kta_objective(std_data.values, builder,
                                                config.optimizer.seed);
      const ScalarOptResult opt =
          minimize_kta_scalar(objective, config.optimizer);
      test_config.circuit.scaling = opt.gamma;
      result.optimization_trace = opt.trace;
      result.scaling = opt.gamma;
    } else {
      result.scaling = config.circuit.scaling;
    }
  } else if (config.optimize) {
    result.notes.push_back(
        "optimize ignored: gaussian kernels use the median-heuristic "
        "bandwidth");
  }

  KernelCITester tester(std_data.values, test_config);
  SkeletonOptions opts;
  opts.alpha = config.alpha;
  opts.max_cond_size = config.max_cond_size;
  opts.log = &result.tests;

  SkeletonResult skel = skeleton(data.names, tester, opts);
  MixedGraph oriented = orient_vstructures(skel, &result.notes);
  result.graph = propagate_orientations(oriented, &result.notes);
  result.sepsets = std::move(skel.sepsets);
  return result;
}

// Oracle variant: structure recovery with a caller-supplied tester (e.g. the
// d-separation oracle); skips standardization and kernels entirely.
inline PcResult run_pc_with_tester(const std::vector<std::string>& names,
                                   CITester& tester,
                                   const SkeletonOptions& opts) {
  PcResult result{MixedGraph{names}, SepsetTable{}, {}, {}, {}, {}};
  SkeletonOptions local = opts;
  if (local.log == nullptr) local.log = &result.tests;
  SkeletonResult skel = skeleton(names, tester, local);
  MixedGraph oriented = orient_vstructures(skel, &result.notes);
  result.graph = propagate_orientations(oriented, &result.notes);
  result.sepsets = std::move(skel.sepsets);
  return result;
}

// Per-test report rows; conditioning sets are ';'-joined column names.  The
// leading comment line embeds the run configuration for replay.
inline void write_test_report(const PcResult& result,
                              const std::vector<std::string>& names,
                              const std::string& config_echo,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write file '" + path + "'");
  if (!config_echo.empty()) out << "# " << config_echo << '\n';
  out << "x,y,conditioning,statistic,p_value,independent\n";
  for (const auto& t : result.tests) {
    out << names[static_cast<std::size_t>(t.x)] << ','
        << names[static_cast<std::size_t>(t.y)] << ',';
    for (std::size_t i = 0; i < t.cond.size(); ++i) {
      if (i) out << ';';
      out << names[static_cast<std::size_t>(t.cond[i])];
    }
    out << ',' << format_double(t.statistic) << ','
        << format_double(t.p_value) << ',' << (t.independent ? 1 : 0) << '\n';
  }
}

}  // namespace qcausal
