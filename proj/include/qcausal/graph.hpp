// Mixed graph over named nodes: a partially directed graph whose directed
// part must stay acyclic.  Used both for CPDAGs (directed + undirected edges)
// and for ground-truth DAGs (directed edges only).  Includes d-separation for
// DAGs and the DOT/JSON exports.
#pragma once

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcausal/error.hpp"

namespace qcausal {

class MixedGraph {
 public:
  MixedGraph() = default;

  explicit MixedGraph(std::vector<std::string> nodes)
      : nodes_(std::move(nodes)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      for (std::size_t j = i + 1; j < nodes_.size(); ++j)
        if (nodes_[i] == nodes_[j])
          throw input_error("MixedGraph: duplicate node name '" + nodes_[i] +
                            "'");
  }

  [[nodiscard]] int n_nodes() const { return static_cast<int>(nodes_.size()); }
  [[nodiscard]] const std::vector<std::string>& nodes() const { return nodes_; }

  [[nodiscard]] const std::string& name(int i) const {
    check_node(i);
    return nodes_[static_cast<std::size_t>(i)];
  }

  [[nodiscard]] int index_of(const std::string& name) const {
    for (int i = 0; i < n_nodes(); ++i)
      if (nodes_[static_cast<std::size_t>(i)] == name) return i;
    throw index_error("MixedGraph: no node named '" + name + "'");
  }

  [[nodiscard]] bool has_directed(int from, int to) const {
    check_node(from);
    check_node(to);
    return directed_.count({from, to}) > 0;
  }

  [[nodiscard]] bool has_undirected(int a, int b) const {
    check_node(a);
    check_node(b);
    return undirected_.count(norm(a, b)) > 0;
  }

  [[nodiscard]] bool adjacent(int a, int b) const {
    return has_undirected(a, b) || has_directed(a, b) || has_directed(b, a);
  }

  void add_directed(int from, int to) {
    check_distinct(from, to, "add_directed");
    if (adjacent(from, to))
      throw input_error("MixedGraph: edge " + name(from) + "," + name(to) +
                        " already present");
    if (has_directed_path(to, from))
      throw input_error("MixedGraph: edge " + name(from) + " -> " + name(to) +
                        " would create a directed cycle");
    directed_.insert({from, to});
  }

  void add_undirected(int a, int b) {
    check_distinct(a, b, "add_undirected");
    if (adjacent(a, b))
      throw input_error("MixedGraph: edge " + name(a) + "," + name(b) +
                        " already present");
    undirected_.insert(norm(a, b));
  }

  void remove_edge(int a, int b) {
    check_distinct(a, b, "remove_edge");
    if (undirected_.erase(norm(a, b)) > 0) return;
    if (directed_.erase({a, b}) > 0) return;
    if (directed_.erase({b, a}) > 0) return;
    throw input_error("MixedGraph: no edge between " + name(a) + " and " +
                      name(b));
  }

  // Turns the undirected edge {from, to} into from -> to.
  void orient(int from, int to) {
    check_distinct(from, to, "orient");
    if (!has_undirected(from, to))
      throw input_error("MixedGraph: no undirected edge between " +
                        name(from) + " and " + name(to));
    if (has_directed_path(to, from))
      throw input_error("MixedGraph: orienting " + name(from) + " -> " +
                        name(to) + " would create a directed cycle");
    undirected_.erase(norm(from, to));
    directed_.insert({from, to});
  }

  // True if a directed path from `from` to `to` exists (length >= 1).
  [[nodiscard]] bool has_directed_path(int from, int to) const {
    check_node(from);
    check_node(to);
    std::vector<bool> seen(static_cast<std::size_t>(n_nodes()), false);
    std::deque<int> queue;
    for (const auto& [a, b] : directed_)
      if (a == from) {
        if (b == to) return true;
        if (!seen[static_cast<std::size_t>(b)]) {
          seen[static_cast<std::size_t>(b)] = true;
          queue.push_back(b);
        }
      }
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (const auto& [a, b] : directed_) {
        if (a != u) continue;
        if (b == to) return true;
        if (!seen[static_cast<std::size_t>(b)]) {
          seen[static_cast<std::size_t>(b)] = true;
          queue.push_back(b);
        }
      }
    }
    return false;
  }

  [[nodiscard]] std::vector<int> neighbors(int i) const {
    check_node(i);
    std::set<int> out;
    for (const auto& [a, b] : undirected_) {
      if (a == i) out.insert(b);
      if (b == i) out.insert(a);
    }
    for (const auto& [a, b] : directed_) {
      if (a == i) out.insert(b);
      if (b == i) out.insert(a);
    }
    return {out.begin(), out.end()};
  }

  [[nodiscard]] std::vector<int> parents(int i) const {
    check_node(i);
    std::vector<int> out;
    for (const auto& [a, b] : directed_)
      if (b == i) out.push_back(a);
    return out;
  }

  [[nodiscard]] std::vector<int> children(int i) const {
    check_node(i);
    std::vector<int> out;
    for (const auto& [a, b] : directed_)
      if (a == i) out.push_back(b);
    return out;
  }

  [[nodiscard]] const std::set<std::pair<int, int>>& directed_edges() const {
    return directed_;
  }
  [[nodiscard]] const std::set<std::pair<int, int>>& undirected_edges() const {
    return undirected_;
  }

  [[nodiscard]] std::size_t n_edges() const {
    return directed_.size() + undirected_.size();
  }

  // True if the graph is a DAG: no undirected edges (acyclicity of the
  // directed part is maintained as an invariant by the mutators).
  [[nodiscard]] bool is_dag() const { return undirected_.empty(); }

  friend bool operator==(const MixedGraph& a, const MixedGraph& b) {
    return a.nodes_ == b.nodes_ && a.directed_ == b.directed_ &&
           a.undirected_ == b.undirected_;
  }

 private:
  static std::pair<int, int> norm(int a, int b) {
    return {std::min(a, b), std::max(a, b)};
  }

  void check_node(int i) const {
    if (i < 0 || i >= n_nodes())
      throw index_error("MixedGraph: node index " + std::to_string(i) +
                        " out of range");
  }

  void check_distinct(int a, int b, const char* op) const {
    check_node(a);
    check_node(b);
    if (a == b)
      throw input_error(std::string("MixedGraph: ") + op +
                        " rejects self loops");
  }

  std::vector<std::string> nodes_;
  std::set<std::pair<int, int>> directed_;    // (from, to)
  std::set<std::pair<int, int>> undirected_;  // (min, max)
};

// d-separation of x and y given `given` in a DAG, decided on the moralized
// induced subgraph over the ancestors of {x, y} + given: x and y are
// d-separated iff they are disconnected there after deleting `given`.
inline bool d_separated(const MixedGraph& dag, int x, int y,
                        const std::vector<int>& given) {
  if (!dag.is_dag()) throw input_error("d_separated: graph is not a DAG");
  if (x == y) throw input_error("d_separated: x and y must differ");
  for (const int s : given)
    if (s == x || s == y)
      throw input_error("d_separated: conditioning set contains x or y");

  const int p = dag.n_nodes();
  std::vector<bool> relevant(static_cast<std::size_t>(p), false);
  std::deque<int> queue;
  const auto mark = [&](int v) {
    if (v < 0 || v >= p) throw index_error("d_separated: node out of range");
    if (!relevant[static_cast<std::size_t>(v)]) {
      relevant[static_cast<std::size_t>(v)] = true;
      queue.push_back(v);
    }
  };
  mark(x);
  mark(y);
  for (const int s : given) mark(s);
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (const int par : dag.parents(u)) mark(par);
  }

  // Moral graph over the relevant nodes: undirected skeleton plus edges
  // between co-parents of a shared child.
  std::set<std::pair<int, int>> moral;
  const auto link = [&moral](int a, int b) {
    moral.insert({std::min(a, b), std::max(a, b)});
  };
  for (const auto& [a, b] : dag.directed_edges())
    if (relevant[static_cast<std::size_t>(a)] &&
        relevant[static_cast<std::size_t>(b)])
      link(a, b);
  for (int v = 0; v < p; ++v) {
    if (!relevant[static_cast<std::size_t>(v)]) continue;
    const auto pars = dag.parents(v);
    for (std::size_t i = 0; i < pars.size(); ++i)
      for (std::size_t j = i + 1; j < pars.size(); ++j)
        if (relevant[static_cast<std::size_t>(pars[i])] &&
            relevant[static_cast<std::size_t>(pars[j])])
          link(pars[i], pars[j]);
  }

  std::vector<bool> blocked(static_cast<std::size_t>(p), false);
  for (const int s : given) blocked[static_cast<std::size_t>(s)] = true;

  std::vector<bool> seen(static_cast<std::size_t>(p), false);
  seen[static_cast<std::size_t>(x)] = true;
  std::deque<int> bfs{x};
  while (!bfs.empty()) {
    const int u = bfs.front();
    bfs.pop_front();
    for (const auto& [a, b] : moral) {
      int v = -1;
      if (a == u) v = b;
      else if (b == u) v = a;
      else continue;
      if (blocked[static_cast<std::size_t>(v)] ||
          seen[static_cast<std::size_t>(v)])
        continue;
      if (v == y) return false;
      seen[static_cast<std::size_t>(v)] = true;
      bfs.push_back(v);
    }
  }
  return true;
}

// DOT export: directed edges as `A -> B;`, undirected as `A -> B [dir=none];`.
inline std::string to_dot(const MixedGraph& g) {
  std::ostringstream out;
  out << "digraph cpdag {\n";
  for (const auto& n : g.nodes()) out << "  " << n << ";\n";
  for (const auto& [a, b] : g.directed_edges())
    out << "  " << g.name(a) << " -> " << g.name(b) << ";\n";
  for (const auto& [a, b] : g.undirected_edges())
    out << "  " << g.name(a) << " -> " << g.name(b) << " [dir=none];\n";
  out << "}\n";
  return out.str();
}

inline nlohmann::json to_json(const MixedGraph& g) {
  nlohmann::json directed = nlohmann::json::array();
  for (const auto& [a, b] : g.directed_edges())
    directed.push_back({g.name(a), g.name(b)});
  nlohmann::json undirected = nlohmann::json::array();
  for (const auto& [a, b] : g.undirected_edges())
    undirected.push_back({g.name(a), g.name(b)});
  return nlohmann::json{{"nodes", g.nodes()},
                        {"directed", directed},
                        {"undirected", undirected}};
}

}  // namespace qcausal
