// Evaluation of recovered structures against ground truth: skeleton
// confusion counts, TPR/FPR (undefined when a denominator is empty), exact
// Markov-equivalence scoring via the DAG -> CPDAG map, and significance-level
// sweeps producing pooled ROC curves.
#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "qcausal/datagen.hpp"
#include "qcausal/dataset.hpp"
#include "qcausal/error.hpp"
#include "qcausal/graph.hpp"
#include "qcausal/pc.hpp"

namespace qcausal {

struct SkeletonConfusion {
  long tp = 0;
  long fp = 0;
  long tn = 0;
  long fn = 0;

  SkeletonConfusion& operator+=(const SkeletonConfusion& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
};

// Adjacency (of any orientation) compared over all unordered node pairs.
inline SkeletonConfusion skeleton_confusion(const MixedGraph& estimate,
                                            const MixedGraph& truth) {
  if (estimate.nodes() != truth.nodes())
    throw input_error("skeleton_confusion: node sets differ");
  SkeletonConfusion c;
  for (int a = 0; a < truth.n_nodes(); ++a) {
    for (int b = a + 1; b < truth.n_nodes(); ++b) {
      const bool in_est = estimate.adjacent(a, b);
      const bool in_truth = truth.adjacent(a, b);
      if (in_est && in_truth) ++c.tp;
      else if (in_est && !in_truth) ++c.fp;
      else if (!in_est && in_truth) ++c.fn;
      else ++c.tn;
    }
  }
  return c;
}

// (TPR, FPR); a rate with an empty denominator is absent, never coerced to 0.
inline std::pair<std::optional<double>, std::optional<double>> tpr_fpr(
    const SkeletonConfusion& c) {
  std::optional<double> tpr;
  std::optional<double> fpr;
  if (c.tp + c.fn > 0)
    tpr = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (c.fp + c.tn > 0)
    fpr = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
  return {tpr, fpr};
}

// CPDAG of a DAG: skeleton plus the DAG's own v-structures, closed under the
// same propagation rules the PC phase uses.  Equivalent DAGs (same skeleton
// and v-structures) map to the identical CPDAG.
inline MixedGraph dag_to_cpdag(const MixedGraph& dag) {
  if (!dag.is_dag()) throw input_error("dag_to_cpdag: input is not a DAG");

  MixedGraph g{dag.nodes()};
  for (const auto& [a, b] : dag.directed_edges()) g.add_undirected(a, b);
  for (int z = 0; z < dag.n_nodes(); ++z) {
    const auto pars = dag.parents(z);
    for (std::size_t i = 0; i < pars.size(); ++i) {
      for (std::size_t j = i + 1; j < pars.size(); ++j) {
        if (dag.adjacent(pars[i], pars[j])) continue;
        if (g.has_undirected(pars[i], z)) g.orient(pars[i], z);
        if (g.has_undirected(pars[j], z)) g.orient(pars[j], z);
      }
    }
  }
  return propagate_orientations(g);
}

// 1.0 when the estimate equals the truth's CPDAG exactly, else 0.0.  Any DAG
// from the same Markov equivalence class yields the same verdict.
inline double markov_accuracy(const MixedGraph& estimate,
                              const MixedGraph& truth_dag) {
  if (estimate.nodes() != truth_dag.nodes())
    throw input_error("markov_accuracy: node sets differ");
  return estimate == dag_to_cpdag(truth_dag) ? 1.0 : 0.0;
}

// The significance levels swept in the reference experiments.
inline std::vector<double> default_significance_levels() {
  return {0.999999, 0.9, 0.75, 0.5, 0.25, 0.2,
          0.1,      0.05, 0.01, 0.001, 0.0001, 0.00001};
}

struct JunctionConfig {
  JunctionKind kind = JunctionKind::Independent;
  int n = 100;
  double noise_ratio = 0.05;
  std::uint64_t seed = 0;
  bool quantum_sources = false;
  CircuitSpec generator{};  // used when quantum_sources is true
};

inline GeneratedData generate(const JunctionConfig& cfg, int trial) {
  const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(trial);
  return cfg.quantum_sources
             ? gen_quantum_junction(cfg.kind, cfg.n, cfg.generator, seed,
                                    cfg.noise_ratio)
             : gen_junction(cfg.kind, cfg.n, cfg.noise_ratio, seed);
}

struct RocPoint {
  double alpha = 0.0;
  int trials = 0;
  SkeletonConfusion counts;
  std::optional<double> tpr;
  std::optional<double> fpr;
};

struct RocCurve {
  std::vector<RocPoint> points;
};

// Runs `trials` seeded datasets through the discovery pipeline at every
// alpha, pooling skeleton confusion counts per alpha.  Trial t uses seed
// gen.seed + t, identical across alphas, so the sweep varies only the
// significance level.
inline RocCurve roc_sweep(const JunctionConfig& gen, const PcConfig& method,
                          const std::vector<double>& alphas, int trials) {
  if (trials < 1) throw input_error("roc_sweep: trials must be >= 1");
  if (alphas.empty()) throw input_error("roc_sweep: alpha list is empty");
  for (const double a : alphas)
    if (!(a > 0.0 && a < 1.0))
      throw input_error("roc_sweep: alphas must lie in (0, 1)");

  RocCurve curve;
  curve.points.resize(alphas.size());
  for (std::size_t i = 0; i < alphas.size(); ++i)
    curve.points[i].alpha = alphas[i];

  for (int t = 0; t < trials; ++t) {
    const GeneratedData gd = generate(gen, t);
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      PcConfig cfg = method;
      cfg.alpha = alphas[i];
      const PcResult res = run_pc(gd.data, cfg);
      curve.points[i].counts += skeleton_confusion(res.graph, gd.truth);
      ++curve.points[i].trials;
    }
  }
  for (auto& pt : curve.points) {
    const auto [tpr, fpr] = tpr_fpr(pt.counts);
    pt.tpr = tpr;
    pt.fpr = fpr;
  }
  return curve;
}

// CSV row format shared by ROC outputs; absent rates become empty cells.
inline void write_roc_csv(const RocCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write file '" + path + "'");
  out << "alpha,trials,tp,fp,tn,fn,tpr,fpr\n";
  for (const auto& pt : curve.points) {
    out << format_double(pt.alpha) << ',' << pt.trials << ',' << pt.counts.tp
        << ',' << pt.counts.fp << ',' << pt.counts.tn << ',' << pt.counts.fn
        << ',';
    if (pt.tpr) out << format_double(*pt.tpr);
    out << ',';
    if (pt.fpr) out << format_double(*pt.fpr);
    out << '\n';
  }
}

}  // namespace qcausal
