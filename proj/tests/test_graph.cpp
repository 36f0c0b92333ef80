#include <catch2/catch_amalgamated.hpp>

#include "qcausal/graph.hpp"

using namespace qcausal;

namespace {

MixedGraph abc() { return MixedGraph{{"a", "b", "c"}}; }

}  // namespace

TEST_CASE("edge bookkeeping distinguishes directed and undirected",
          "[graph]") {
  MixedGraph g = abc();
  g.add_directed(0, 1);
  g.add_undirected(1, 2);

  CHECK(g.has_directed(0, 1));
  CHECK_FALSE(g.has_directed(1, 0));
  CHECK(g.has_undirected(1, 2));
  CHECK(g.has_undirected(2, 1));
  CHECK(g.adjacent(0, 1));
  CHECK(g.adjacent(1, 0));
  CHECK_FALSE(g.adjacent(0, 2));
  CHECK(g.n_edges() == 2);
  CHECK_FALSE(g.is_dag());

  g.remove_edge(1, 2);
  CHECK(g.is_dag());
  CHECK(g.n_edges() == 1);
  CHECK_THROWS_AS(g.remove_edge(1, 2), input_error);
}

TEST_CASE("graphs reject duplicate names, self loops and double edges",
          "[graph]") {
  CHECK_THROWS_AS(MixedGraph({"a", "a"}), input_error);

  MixedGraph g = abc();
  CHECK_THROWS_AS(g.add_directed(0, 0), input_error);
  CHECK_THROWS_AS(g.add_undirected(1, 1), input_error);

  g.add_directed(0, 1);
  CHECK_THROWS_AS(g.add_directed(0, 1), input_error);
  CHECK_THROWS_AS(g.add_directed(1, 0), input_error);
  CHECK_THROWS_AS(g.add_undirected(0, 1), input_error);

  CHECK_THROWS_AS(g.name(3), index_error);
  CHECK_THROWS_AS(g.index_of("zzz"), index_error);
  CHECK(g.index_of("c") == 2);
}

TEST_CASE("directed mutations cannot close a cycle", "[graph]") {
  MixedGraph g = abc();
  g.add_directed(0, 1);
  g.add_directed(1, 2);
  CHECK(g.has_directed_path(0, 2));
  CHECK_FALSE(g.has_directed_path(2, 0));
  CHECK_THROWS_AS(g.add_directed(2, 0), input_error);

  MixedGraph h = abc();
  h.add_directed(0, 1);
  h.add_directed(1, 2);
  h.add_undirected(0, 2);
  CHECK_THROWS_AS(h.orient(2, 0), input_error);
  h.orient(0, 2);
  CHECK(h.has_directed(0, 2));
}

TEST_CASE("neighbor queries return sorted index lists", "[graph]") {
  MixedGraph g{{"a", "b", "c", "d"}};
  g.add_directed(3, 1);
  g.add_directed(0, 1);
  g.add_undirected(1, 2);

  CHECK(g.neighbors(1) == std::vector<int>{0, 2, 3});
  CHECK(g.parents(1) == std::vector<int>{0, 3});
  CHECK(g.children(0) == std::vector<int>{1});
  CHECK(g.children(1).empty());
}

TEST_CASE("d-separation handles the three canonical triples", "[graph]") {
  MixedGraph collider = abc();  // a -> c <- b
  collider.add_directed(0, 2);
  collider.add_directed(1, 2);
  CHECK(d_separated(collider, 0, 1, {}));
  CHECK_FALSE(d_separated(collider, 0, 1, {2}));

  MixedGraph chain = abc();  // a -> c -> b
  chain.add_directed(0, 2);
  chain.add_directed(2, 1);
  CHECK_FALSE(d_separated(chain, 0, 1, {}));
  CHECK(d_separated(chain, 0, 1, {2}));

  MixedGraph fork = abc();  // a <- c -> b
  fork.add_directed(2, 0);
  fork.add_directed(2, 1);
  CHECK_FALSE(d_separated(fork, 0, 1, {}));
  CHECK(d_separated(fork, 0, 1, {2}));
}

TEST_CASE("conditioning on a collider's descendant opens the path",
          "[graph]") {
  // a -> c <- b, c -> d: conditioning on d activates a <-> b.
  MixedGraph g{{"a", "b", "c", "d"}};
  g.add_directed(0, 2);
  g.add_directed(1, 2);
  g.add_directed(2, 3);
  CHECK(d_separated(g, 0, 1, {}));
  CHECK_FALSE(d_separated(g, 0, 1, {3}));
  CHECK_FALSE(d_separated(g, 0, 1, {2, 3}));
}

TEST_CASE("d-separation on a diamond needs the full blocking set", "[graph]") {
  // a -> b -> d, a -> c -> d.
  MixedGraph g{{"a", "b", "c", "d"}};
  g.add_directed(0, 1);
  g.add_directed(0, 2);
  g.add_directed(1, 3);
  g.add_directed(2, 3);
  CHECK_FALSE(d_separated(g, 0, 3, {1}));
  CHECK_FALSE(d_separated(g, 0, 3, {2}));
  CHECK(d_separated(g, 0, 3, {1, 2}));
  // b and c share the ancestor a and the collider child d.
  CHECK_FALSE(d_separated(g, 1, 2, {}));
  CHECK(d_separated(g, 1, 2, {0}));
  CHECK_FALSE(d_separated(g, 1, 2, {0, 3}));
}

TEST_CASE("d-separation validates its arguments", "[graph]") {
  MixedGraph g = abc();
  g.add_undirected(0, 1);
  CHECK_THROWS_AS(d_separated(g, 0, 1, {}), input_error);  // not a DAG

  MixedGraph dag = abc();
  dag.add_directed(0, 1);
  CHECK_THROWS_AS(d_separated(dag, 0, 0, {}), input_error);
  CHECK_THROWS_AS(d_separated(dag, 0, 1, {0}), input_error);
}

TEST_CASE("dot export lists nodes then edges", "[graph]") {
  MixedGraph g = abc();
  g.add_directed(0, 2);
  g.add_undirected(1, 2);
  CHECK(to_dot(g) ==
        "digraph cpdag {\n"
        "  a;\n"
        "  b;\n"
        "  c;\n"
        "  a -> c;\n"
        "  b -> c [dir=none];\n"
        "}\n");
}

TEST_CASE("json export names nodes and splits edge kinds", "[graph]") {
  MixedGraph g = abc();
  g.add_directed(0, 2);
  g.add_undirected(1, 2);
  const nlohmann::json j = to_json(g);
  CHECK(j["nodes"] == nlohmann::json({"a", "b", "c"}));
  REQUIRE(j["directed"].size() == 1);
  CHECK(j["directed"][0] == nlohmann::json({"a", "c"}));
  REQUIRE(j["undirected"].size() == 1);
  CHECK(j["undirected"][0] == nlohmann::json({"b", "c"}));
}

TEST_CASE("graph equality compares nodes and both edge sets", "[graph]") {
  MixedGraph a = abc();
  a.add_directed(0, 1);
  MixedGraph b = abc();
  b.add_directed(0, 1);
  CHECK(a == b);
  b.add_undirected(1, 2);
  CHECK_FALSE(a == b);

  MixedGraph renamed{{"a", "b", "x"}};
  renamed.add_directed(0, 1);
  CHECK_FALSE(a == renamed);
}
