#ifndef THINFIBER_GRAPH_HPP
#define THINFIBER_GRAPH_HPP

#include <cmath>
#include <string>
#include <vector>

#include "thinfiber/types.hpp"
#include "thinfiber/vertex_conditions.hpp"

namespace thinfiber {

// Which end of an edge a vertex sits at. The local coordinate runs
// t = 0 at `start` to t = length at `finish`; infinite edges only have
// the `start` end.
enum class EdgeEnd { start, finish };

struct EdgeRecord {
  int a = -1;               // vertex id at t = 0
  int b = -1;               // vertex id at t = length, or -1 for infinite edges
  double length = 0.0;      // +inf for infinite edges
  bool infinite() const { return !std::isfinite(length); }
};

struct AdjacentEnd {
  int edge = -1;
  EdgeEnd end = EdgeEnd::start;
};

struct VertexRecord {
  int id = -1;
  // Ordered adjacency; the order fixes the component order of the
  // boundary-trace vector fed to the vertex condition.
  std::vector<AdjacentEnd> adjacency;
  VertexCondition condition;
  int degree() const { return static_cast<int>(adjacency.size()); }
  bool is_v1() const { return degree() == 1; }
};

// The limiting metric graph. Immutable after construction; all solver
// operations only read it.
class MetricGraph {
 public:
  MetricGraph() = default;

  const std::vector<VertexRecord>& vertices() const { return vertices_; }
  const std::vector<EdgeRecord>& edges() const { return edges_; }
  const VertexRecord& vertex(int id) const { return vertices_.at(id); }
  const EdgeRecord& edge(int id) const { return edges_.at(id); }

  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_infinite_edges() const;
  int num_finite_edges() const { return num_edges() - num_infinite_edges(); }
  bool compact() const { return num_infinite_edges() == 0; }
  double total_finite_length() const;

  // Validates the structural invariants and returns the graph.
  // Throws validation_error on: non-positive length, dangling ids,
  // infinite edge with two finite endpoints, V1 vertex carrying a
  // condition other than Dirichlet/Neumann, condition dimension not
  // matching the vertex degree.
  static MetricGraph build(std::vector<EdgeRecord> edges,
                           std::vector<VertexCondition> conditions);

 private:
  std::vector<VertexRecord> vertices_;
  std::vector<EdgeRecord> edges_;
};

// Star with one center vertex (id 0) of degree d and edges ordered
// 1..d, each with t = 0 at the center. Finite edges get an outer
// vertex carrying `outer`; infinite edges have no outer vertex.
MetricGraph star_graph(int d, const std::vector<double>& lengths,
                       VertexCondition center,
                       VertexCondition outer = VertexCondition::dirichlet());

// Interval of length l: one edge, two degree-1 vertices.
MetricGraph interval_graph(double l, VertexCondition left, VertexCondition right);

// JSON description file ("thinfiber_schema": 1). See README for the schema.
MetricGraph load_graph_json(const std::string& path);
MetricGraph parse_graph_json(const std::string& text);
std::string graph_to_json(const MetricGraph& g);

}  // namespace thinfiber

#endif  // THINFIBER_GRAPH_HPP
