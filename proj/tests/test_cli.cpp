// End-to-end checks of the command-line tool.  The binary path arrives via
// the QCAUSAL_CLI_PATH compile definition; commands run through std::system
// inside a scratch directory.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <catch2/catch_amalgamated.hpp>
#include <nlohmann/json.hpp>

#include "qcausal/dataset.hpp"

namespace fs = std::filesystem;

namespace {

const std::string cli = QCAUSAL_CLI_PATH;

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / "qcausal_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  [[nodiscard]] std::string p(const std::string& name) const {
    return (dir / name).string();
  }
};

int run(const std::string& args, const std::string& stderr_to = "") {
  std::string cmd = cli + " " + args;
  if (!stderr_to.empty()) cmd += " 2> " + stderr_to;
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("data generation is reproducible across invocations", "[cli]") {
  Scratch s;
  REQUIRE(run("gen-data --kind fork --n 25 --seed 42 --out " + s.p("a")) == 0);
  REQUIRE(run("gen-data --kind fork --n 25 --seed 42 --out " + s.p("b")) == 0);
  CHECK(slurp(s.p("a.csv")) == slurp(s.p("b.csv")));
  CHECK(slurp(s.p("a_truth.json")) == slurp(s.p("b_truth.json")));

  REQUIRE(run("gen-data --kind fork --n 25 --seed 43 --out " + s.p("c")) == 0);
  CHECK(slurp(s.p("a.csv")) != slurp(s.p("c.csv")));

  const nlohmann::json truth = nlohmann::json::parse(slurp(s.p("a_truth.json")));
  CHECK(truth["nodes"] == nlohmann::json({"X", "Y", "Z"}));
  CHECK(truth["directed"].size() == 2);
  CHECK(truth["config"]["seed"] == 42);
}

TEST_CASE("unknown junction kinds and files exit with the input code",
          "[cli]") {
  Scratch s;
  CHECK(run("gen-data --kind spiral --n 10 --out " + s.p("x"),
            s.p("err1.txt")) == 2);
  CHECK(slurp(s.p("err1.txt")).find("unknown junction kind") !=
        std::string::npos);

  CHECK(run("discover --input " + s.p("missing.csv") + " --out " + s.p("y"),
            s.p("err2.txt")) == 2);
  CHECK(slurp(s.p("err2.txt")).find("missing.csv") != std::string::npos);

  CHECK(run("no-such-subcommand", s.p("err3.txt")) == 2);
}

TEST_CASE("degenerate data exits with the numeric code", "[cli]") {
  Scratch s;
  {
    std::ofstream out(s.p("const.csv"));
    out << "A,B\n1,2\n1,3\n1,4\n1,5\n";
  }
  CHECK(run("discover --input " + s.p("const.csv") + " --out " + s.p("z"),
            s.p("err.txt")) == 3);
  CHECK(slurp(s.p("err.txt")).find("constant") != std::string::npos);
}

TEST_CASE("discovery produces graph, report and json artifacts", "[cli]") {
  Scratch s;
  REQUIRE(run("gen-data --kind collider --n 120 --seed 1 --out " +
              s.p("data")) == 0);
  REQUIRE(run("discover --input " + s.p("data.csv") + " --alpha 0.05 --out " +
              s.p("run")) == 0);

  const std::string dot = slurp(s.p("run.dot"));
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("X -> Z") != std::string::npos);
  CHECK(dot.find("Y -> Z") != std::string::npos);

  const nlohmann::json graph = nlohmann::json::parse(slurp(s.p("run.json")));
  CHECK(graph["nodes"] == nlohmann::json({"X", "Y", "Z"}));
  CHECK(graph["config"]["alpha"] == 0.05);
  CHECK(graph["config"]["kernel"] == "gaussian");

  const std::string report = slurp(s.p("run_report.csv"));
  CHECK(report.find("x,y,conditioning,statistic,p_value,independent") !=
        std::string::npos);
  CHECK(report.rfind("# {", 0) == 0);  // config echo comment first
}

TEST_CASE("quantum discovery honours circuit files and writes a trace",
          "[cli]") {
  Scratch s;
  {
    std::ofstream out(s.p("circuit.json"));
    out << R"({"n_qubits": 1, "init": "H", "embedding": "RY",
               "entangler_gate": "None", "entangler_topology": "ladder",
               "depth": 2, "scaling": 1.0})";
  }
  REQUIRE(run("gen-data --kind independent --n 40 --seed 3 --out " +
              s.p("data")) == 0);
  REQUIRE(run("discover --input " + s.p("data.csv") +
              " --kernel quantum --optimize --circuit " + s.p("circuit.json") +
              " --out " + s.p("q")) == 0);

  const nlohmann::json graph = nlohmann::json::parse(slurp(s.p("q.json")));
  CHECK(graph["config"]["kernel"] == "quantum");
  CHECK(graph["config"]["circuit"]["depth"] == 2);
  CHECK(graph.contains("scaling"));

  const std::string trace = slurp(s.p("q_trace.csv"));
  CHECK(trace.rfind("iteration,gamma,kta", 0) == 0);

  // A malformed circuit file is an input error.
  {
    std::ofstream out(s.p("bad_circuit.json"));
    out << R"({"n_qubits": 1, "surprise": true})";
  }
  CHECK(run("discover --input " + s.p("data.csv") +
            " --kernel quantum --circuit " + s.p("bad_circuit.json") +
            " --out " + s.p("q2")) == 2);
}

TEST_CASE("quantum data generation stays in the unit interval", "[cli]") {
  Scratch s;
  REQUIRE(run("gen-data --kind independent --n 30 --quantum --seed 2 --out " +
              s.p("qd")) == 0);
  const qcausal::Dataset ds = qcausal::load_csv(s.p("qd.csv"));
  CHECK(ds.n_rows() == 30);
  CHECK(ds.values.minCoeff() >= 0.0);
  CHECK(ds.values.maxCoeff() <= 1.0);

  const nlohmann::json truth = nlohmann::json::parse(slurp(s.p("qd_truth.json")));
  CHECK(truth["config"]["quantum"] == true);
  CHECK(truth["config"]["generator"]["n_qubits"] == 2);
}

TEST_CASE("benchmarks write an accuracy table and roc curves", "[cli]") {
  Scratch s;
  REQUIRE(run("benchmark --kinds collider,independent --sizes 30 --trials 2 "
              "--seed 4 --roc-size 30 --alphas 0.9,0.05 --jobs 1 --out " +
              s.p("bench")) == 0);

  const std::string acc = slurp(s.p("bench_accuracy.csv"));
  std::istringstream lines(acc);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "kind,n,trials,pc-gaussian,qpc-default,qpc-optimized");
  int rows = 0;
  std::string line;
  while (std::getline(lines, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2);

  for (const std::string kind : {"collider", "independent"}) {
    for (const std::string method :
         {"pc-gaussian", "qpc-default", "qpc-optimized"}) {
      const std::string roc =
          slurp(s.p("bench_roc_" + kind + "_" + method + ".csv"));
      CHECK(roc.rfind("alpha,trials,tp,fp,tn,fn,tpr,fpr", 0) == 0);
    }
  }
}
