// qcausal command-line tool.
//
// Subcommands:
//   discover   run the PC/qPC pipeline on a CSV dataset, write the recovered
//              CPDAG (DOT + JSON) and a per-test report CSV
//   gen-data   generate a synthetic junction dataset (classical or quantum
//              sources) plus its ground-truth DAG
//   benchmark  sweep junction kinds, sample sizes and methods; write accuracy
//              and ROC CSVs
//
// Exit codes: 0 success, 2 input error (bad flags, paths, file contents),
// 3 degenerate or numerically unusable data, 4 benchmark with no successful
// cell, 1 unexpected failure.  QCAUSAL_LOG=error|warn|info|debug controls
// stderr verbosity.
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qcausal/qcausal.hpp"

namespace {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("QCAUSAL_LOG");
    if (env == nullptr) return LogLevel::Warn;
    const std::string v(env);
    if (v == "error") return LogLevel::Error;
    if (v == "warn") return LogLevel::Warn;
    if (v == "info") return LogLevel::Info;
    if (v == "debug") return LogLevel::Debug;
    std::cerr << "qcausal: ignoring unknown QCAUSAL_LOG value '" << v << "'\n";
    return LogLevel::Warn;
  }();
  return level;
}

void log(LogLevel level, const std::string& msg) {
  static std::mutex mu;
  if (level > log_level()) return;
  const char* tag = level == LogLevel::Error  ? "error"
                    : level == LogLevel::Warn ? "warn"
                    : level == LogLevel::Info ? "info"
                                              : "debug";
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "qcausal [" << tag << "] " << msg << '\n';
}

qcausal::KernelFamily parse_kernel(const std::string& s) {
  if (s == "gaussian") return qcausal::KernelFamily::Gaussian;
  if (s == "quantum") return qcausal::KernelFamily::Quantum;
  throw qcausal::input_error("unknown kernel '" + s +
                             "' (expected gaussian or quantum)");
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qcausal::input_error("cannot open file '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw qcausal::input_error("file '" + path + "': invalid JSON: " +
                               e.what());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw qcausal::input_error("cannot write file '" + path + "'");
  out << content;
}

struct DiscoverArgs {
  std::string input;
  std::string kernel = "gaussian";
  double alpha = 0.05;
  double epsilon = 1e-3;
  int max_cond = -1;
  bool optimize = false;
  std::string circuit_file;
  std::string optimizer_file;
  std::uint64_t seed = 0;
  std::string out = "qcausal_out";
};

nlohmann::json discover_config_json(const qcausal::PcConfig& cfg,
                                    const DiscoverArgs& args) {
  nlohmann::json j{{"input", args.input},
                   {"kernel", args.kernel},
                   {"alpha", cfg.alpha},
                   {"epsilon", cfg.epsilon},
                   {"max_cond_size", cfg.max_cond_size},
                   {"optimize", cfg.optimize},
                   {"seed", args.seed}};
  if (cfg.kernel == qcausal::KernelFamily::Quantum)
    j["circuit"] = qcausal::to_json(cfg.circuit);
  if (cfg.optimize) j["optimizer"] = qcausal::to_json(cfg.optimizer);
  return j;
}

int run_discover(const DiscoverArgs& args) {
  qcausal::PcConfig cfg;
  cfg.kernel = parse_kernel(args.kernel);
  cfg.alpha = args.alpha;
  cfg.epsilon = args.epsilon;
  cfg.max_cond_size = args.max_cond;
  cfg.optimize = args.optimize;
  cfg.optimizer.seed = args.seed;
  if (!args.circuit_file.empty())
    cfg.circuit = qcausal::circuit_spec_from_json(load_json_file(args.circuit_file));
  if (!args.optimizer_file.empty()) {
    cfg.optimizer = qcausal::optimizer_config_from_json(
        load_json_file(args.optimizer_file));
    cfg.optimizer.seed = args.seed;
  }
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw qcausal::input_error("--alpha must lie in (0, 1)");

  log(LogLevel::Info, "loading dataset '" + args.input + "'");
  const qcausal::Dataset data = qcausal::load_csv(args.input);
  log(LogLevel::Info,
      "running discovery on " + std::to_string(data.n_rows()) + " rows, " +
          std::to_string(data.n_cols()) + " columns");

  const qcausal::PcResult result = qcausal::run_pc(data, cfg);
  for (const auto& note : result.notes) log(LogLevel::Warn, note);
  if (result.scaling)
    log(LogLevel::Info,
        "quantum kernel scaling: " + qcausal::format_double(*result.scaling));
  log(LogLevel::Info, std::to_string(result.tests.size()) +
                          " independence tests performed");

  const nlohmann::json config_echo = discover_config_json(cfg, args);
  nlohmann::json graph_json = qcausal::to_json(result.graph);
  graph_json["config"] = config_echo;
  if (result.scaling) graph_json["scaling"] = *result.scaling;

  write_text_file(args.out + ".dot", qcausal::to_dot(result.graph));
  write_text_file(args.out + ".json", graph_json.dump(2) + "\n");
  qcausal::write_test_report(result, data.names, config_echo.dump(),
                             args.out + "_report.csv");
  if (!result.optimization_trace.empty())
    qcausal::write_optimization_trace(result.optimization_trace,
                                      args.out + "_trace.csv");
  std::cout << "wrote " << args.out << ".dot, " << args.out << ".json, "
            << args.out << "_report.csv\n";
  return 0;
}

struct GenDataArgs {
  std::string kind = "collider";
  int n = 100;
  double noise = 0.05;
  std::uint64_t seed = 0;
  bool quantum = false;
  std::string generator_file;
  std::string out = "qcausal_data";
};

int run_gen_data(const GenDataArgs& args) {
  const qcausal::JunctionKind kind = qcausal::parse_junction_kind(args.kind);
  qcausal::CircuitSpec generator = qcausal::default_quantum_generator();
  if (!args.generator_file.empty())
    generator =
        qcausal::circuit_spec_from_json(load_json_file(args.generator_file));

  log(LogLevel::Info, "generating " + args.kind + " dataset, n = " +
                          std::to_string(args.n));
  const qcausal::GeneratedData gd =
      args.quantum ? qcausal::gen_quantum_junction(kind, args.n, generator,
                                                   args.seed, args.noise)
                   : qcausal::gen_junction(kind, args.n, args.noise, args.seed);

  qcausal::save_csv(gd.data, args.out + ".csv");
  nlohmann::json truth = qcausal::to_json(gd.truth);
  truth["config"] = {{"kind", args.kind},
                     {"n", args.n},
                     {"noise", args.noise},
                     {"seed", args.seed},
                     {"quantum", args.quantum}};
  if (args.quantum) truth["config"]["generator"] = qcausal::to_json(generator);
  write_text_file(args.out + "_truth.json", truth.dump(2) + "\n");
  std::cout << "wrote " << args.out << ".csv, " << args.out
            << "_truth.json\n";
  return 0;
}

struct BenchmarkArgs {
  std::vector<std::string> kinds = {"collider", "fork", "chain", "independent"};
  std::vector<int> sizes = {25, 50, 100, 200};
  int trials = 10;
  double alpha = 0.05;
  double noise = 0.05;
  std::uint64_t seed = 0;
  int roc_size = 0;  // 0 disables the ROC sweep
  std::vector<double> alphas;  // empty = default significance levels
  unsigned jobs = 0;  // 0 = hardware concurrency
  bool quantum_sources = false;
  std::string out = "qcausal_bench";
};

struct MethodSpec {
  std::string name;
  qcausal::PcConfig config;
};

std::vector<MethodSpec> benchmark_methods(double alpha) {
  qcausal::PcConfig gaussian;
  gaussian.kernel = qcausal::KernelFamily::Gaussian;
  gaussian.alpha = alpha;

  qcausal::PcConfig qpc_default;
  qpc_default.kernel = qcausal::KernelFamily::Quantum;
  qpc_default.alpha = alpha;
  qpc_default.circuit.scaling = 1.0;

  qcausal::PcConfig qpc_opt = qpc_default;
  qpc_opt.optimize = true;

  return {{"pc-gaussian", gaussian},
          {"qpc-default", qpc_default},
          {"qpc-optimized", qpc_opt}};
}

// Mean Markov accuracy over trials; failed trials are skipped and counted.
struct CellResult {
  int ok = 0;
  int failed = 0;
  double accuracy_sum = 0.0;
};

CellResult run_cell(const qcausal::JunctionConfig& gen,
                    const qcausal::PcConfig& method, int trials,
                    unsigned jobs) {
  CellResult cell;
  std::mutex mu;
  std::atomic<int> next{0};
  const unsigned workers =
      std::max(1u, std::min(jobs, static_cast<unsigned>(trials)));

  const auto work = [&]() {
    while (true) {
      const int t = next.fetch_add(1);
      if (t >= trials) return;
      try {
        const qcausal::GeneratedData gd = qcausal::generate(gen, t);
        const qcausal::PcResult res = qcausal::run_pc(gd.data, method);
        const double acc = qcausal::markov_accuracy(res.graph, gd.truth);
        std::lock_guard<std::mutex> lock(mu);
        ++cell.ok;
        cell.accuracy_sum += acc;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(mu);
        ++cell.failed;
        log(LogLevel::Warn,
            std::string("trial ") + std::to_string(t) + " failed: " + e.what());
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return cell;
}

int run_benchmark(const BenchmarkArgs& args) {
  if (args.trials < 1) throw qcausal::input_error("--trials must be >= 1");
  if (args.sizes.empty()) throw qcausal::input_error("--sizes is empty");
  if (args.kinds.empty()) throw qcausal::input_error("--kinds is empty");
  const unsigned jobs =
      args.jobs > 0 ? args.jobs
                    : std::max(1u, std::thread::hardware_concurrency());
  const std::vector<MethodSpec> methods = benchmark_methods(args.alpha);

  std::ofstream acc(args.out + "_accuracy.csv");
  if (!acc)
    throw qcausal::input_error("cannot write file '" + args.out +
                               "_accuracy.csv'");
  acc << "kind,n,trials";
  for (const auto& m : methods) acc << ',' << m.name;
  acc << '\n';

  long total_ok = 0;
  for (const auto& kind_name : args.kinds) {
    const qcausal::JunctionKind kind = qcausal::parse_junction_kind(kind_name);
    for (const int n : args.sizes) {
      qcausal::JunctionConfig gen;
      gen.kind = kind;
      gen.n = n;
      gen.noise_ratio = args.noise;
      gen.seed = args.seed;
      gen.quantum_sources = args.quantum_sources;
      gen.generator = qcausal::default_quantum_generator();

      acc << kind_name << ',' << n << ',' << args.trials;
      for (const auto& m : methods) {
        log(LogLevel::Info, "benchmark " + kind_name + " n=" +
                                std::to_string(n) + " " + m.name);
        const CellResult cell = run_cell(gen, m.config, args.trials, jobs);
        total_ok += cell.ok;
        acc << ',';
        if (cell.ok > 0)
          acc << qcausal::format_double(cell.accuracy_sum / cell.ok);
      }
      acc << '\n';
    }
  }

  if (args.roc_size > 0) {
    const std::vector<double> alphas =
        args.alphas.empty() ? qcausal::default_significance_levels()
                            : args.alphas;
    for (const auto& kind_name : args.kinds) {
      const qcausal::JunctionKind kind =
          qcausal::parse_junction_kind(kind_name);
      for (const auto& m : methods) {
        log(LogLevel::Info, "roc sweep " + kind_name + " " + m.name);
        qcausal::JunctionConfig gen;
        gen.kind = kind;
        gen.n = args.roc_size;
        gen.noise_ratio = args.noise;
        gen.seed = args.seed;
        gen.quantum_sources = args.quantum_sources;
        gen.generator = qcausal::default_quantum_generator();
        try {
          const qcausal::RocCurve curve =
              qcausal::roc_sweep(gen, m.config, alphas, args.trials);
          qcausal::write_roc_csv(curve, args.out + "_roc_" + kind_name + "_" +
                                            m.name + ".csv");
          for (const auto& pt : curve.points) total_ok += pt.trials;
        } catch (const std::exception& e) {
          log(LogLevel::Warn, "roc sweep " + kind_name + " " + m.name +
                                  " failed: " + e.what());
        }
      }
    }
  }

  if (total_ok == 0) {
    log(LogLevel::Error, "benchmark: no cell produced a successful trial");
    return 4;
  }
  std::cout << "wrote " << args.out << "_accuracy.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel-based causal discovery with classical and quantum "
               "fidelity kernels"};
  app.require_subcommand(1);

  DiscoverArgs d;
  CLI::App* discover =
      app.add_subcommand("discover", "recover a CPDAG from a CSV dataset");
  discover->add_option("--input", d.input, "input CSV file")->required();
  discover->add_option("--kernel", d.kernel, "gaussian or quantum");
  discover->add_option("--alpha", d.alpha, "significance level");
  discover->add_option("--epsilon", d.epsilon,
                       "conditioning regularization epsilon");
  discover->add_option("--max-cond", d.max_cond,
                       "max conditioning set size (-1 = unbounded)");
  discover->add_flag("--optimize", d.optimize,
                     "tune quantum kernel scaling by KTA minimization");
  discover->add_option("--circuit", d.circuit_file,
                       "CircuitSpec JSON file for the quantum kernel");
  discover->add_option("--optimizer", d.optimizer_file,
                       "OptimizerConfig JSON file");
  discover->add_option("--seed", d.seed, "seed for shuffle decoupling");
  discover->add_option("--out", d.out, "output path prefix");

  GenDataArgs g;
  CLI::App* gen =
      app.add_subcommand("gen-data", "generate a synthetic junction dataset");
  gen->add_option("--kind", g.kind,
                  "collider, fork, chain or independent")->required();
  gen->add_option("--n", g.n, "number of samples")->required();
  gen->add_option("--noise", g.noise, "noise ratio");
  gen->add_option("--seed", g.seed, "generator seed");
  gen->add_flag("--quantum", g.quantum,
                "draw source variables from circuit measurements");
  gen->add_option("--generator", g.generator_file,
                  "CircuitSpec JSON for the source generator");
  gen->add_option("--out", g.out, "output path prefix");

  BenchmarkArgs b;
  CLI::App* bench = app.add_subcommand(
      "benchmark", "sweep kinds/sizes/methods, write accuracy and ROC CSVs");
  bench->add_option("--kinds", b.kinds, "junction kinds")->delimiter(',');
  bench->add_option("--sizes", b.sizes, "sample sizes")->delimiter(',');
  bench->add_option("--trials", b.trials, "trials per cell");
  bench->add_option("--alpha", b.alpha, "significance level for accuracy");
  bench->add_option("--noise", b.noise, "noise ratio");
  bench->add_option("--seed", b.seed, "base seed (trial t uses seed+t)");
  bench->add_option("--roc-size", b.roc_size,
                    "sample size for the ROC sweep (0 = skip)");
  bench->add_option("--alphas", b.alphas,
                    "alpha grid for the ROC sweep (default: built-in levels)")
      ->delimiter(',');
  bench->add_option("--jobs", b.jobs,
                    "parallel trial workers (default: hardware concurrency)");
  bench->add_flag("--quantum-sources", b.quantum_sources,
                  "generate datasets with quantum source variables");
  bench->add_option("--out", b.out, "output path prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (discover->parsed()) return run_discover(d);
    if (gen->parsed()) return run_gen_data(g);
    if (bench->parsed()) return run_benchmark(b);
    return 2;
  } catch (const qcausal::degenerate_data_error& e) {
    log(LogLevel::Error, e.what());
    return 3;
  } catch (const qcausal::numeric_error& e) {
    log(LogLevel::Error, e.what());
    return 3;
  } catch (const qcausal::error& e) {
    log(LogLevel::Error, e.what());
    return 2;
  } catch (const std::exception& e) {
    log(LogLevel::Error, std::string("unexpected failure: ") + e.what());
    return 1;
  }
}
