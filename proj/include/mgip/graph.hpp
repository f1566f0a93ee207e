#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mgip {

struct Vertex {
  std::string id;
  double x = 0.0;
  double y = 0.0;
};

struct Edge {
  std::string id;
  std::size_t source = 0;  // index into MetricGraph::vertices()
  std::size_t target = 0;
  double length = 0.0;
};

/// Input record for an edge before validation; endpoints are referenced by id
/// and the length may be omitted (filled with the Euclidean distance).
struct EdgeSpec {
  std::string id;
  std::string source;
  std::string target;
  std::optional<double> length;
};

/// A compact, connected metric graph with straight-segment planar embedding.
///
/// Construction validates every invariant; an instance is immutable afterwards.
class MetricGraph {
 public:
  MetricGraph(std::vector<Vertex> vertices, const std::vector<EdgeSpec>& edges);

  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  std::size_t vertex_index(const std::string& id) const;
  std::size_t edge_index(const std::string& id) const;

  /// Edge indices incident to vertex v (a self-loop appears twice).
  const std::vector<std::size_t>& incident_edges(std::size_t v) const { return incidence_[v]; }
  std::size_t degree(std::size_t v) const { return incidence_[v].size(); }

  double total_length() const;

 private:
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> incidence_;
  std::unordered_map<std::string, std::size_t> vertex_lookup_;
  std::unordered_map<std::string, std::size_t> edge_lookup_;
};

/// A point x = (e, t) with arclength coordinate t measured from the source.
struct GraphPoint {
  std::size_t edge = 0;
  double t = 0.0;
};

/// Vertex index if the point sits (within tol) on an edge endpoint.
std::optional<std::size_t> vertex_at(const MetricGraph& graph, const GraphPoint& p, double tol = 1e-12);

/// Point equality on Γ: identical edge coordinates, or the same vertex reached
/// through different incident edges.
bool same_point(const MetricGraph& graph, const GraphPoint& a, const GraphPoint& b, double tol = 1e-12);

/// Parses a JSON graph document: {"vertices": [{id, x, y}], "edges": [{id,
/// source, target, length?}]}.
MetricGraph parse_graph(std::string_view text);
MetricGraph load_graph(const std::filesystem::path& path);

/// Piecewise-linear finite-element mesh of a metric graph.
///
/// Each edge is split uniformly into ceil(l_e / h) elements. Global DOFs are
/// numbered vertices first (input order), then interior nodes edge by edge, so
/// every node at a shared vertex maps to one DOF and continuity is built in.
class Mesh {
 public:
  struct Element {
    std::size_t edge;
    std::size_t local;  // position along the edge, 0-based
    std::size_t dof0;   // left node (smaller t)
    std::size_t dof1;
    double width;
  };

  Mesh(MetricGraph graph, double h);

  const MetricGraph& graph() const { return graph_; }
  double h() const { return h_; }
  std::size_t n_dof() const { return n_dof_; }
  const std::vector<Element>& elements() const { return elements_; }

  std::size_t num_edge_elements(std::size_t edge) const { return edge_elements_[edge]; }
  std::size_t first_element(std::size_t edge) const { return edge_first_element_[edge]; }
  double element_width(std::size_t edge) const;
  /// Global DOFs of the nodes along an edge, source to target.
  const std::vector<std::size_t>& edge_dofs(std::size_t edge) const { return edge_dofs_[edge]; }
  /// Arclength of node k on an edge.
  double node_t(std::size_t edge, std::size_t k) const;

  double z1(std::size_t dof) const { return z1_[dof]; }
  double z2(std::size_t dof) const { return z2_[dof]; }

  /// A canonical on-graph location of a DOF (a vertex DOF uses its first
  /// incident edge).
  GraphPoint dof_point(std::size_t dof) const { return dof_points_[dof]; }

 private:
  MetricGraph graph_;
  double h_;
  std::size_t n_dof_ = 0;
  std::vector<Element> elements_;
  std::vector<std::size_t> edge_elements_;
  std::vector<std::size_t> edge_first_element_;
  std::vector<std::vector<std::size_t>> edge_dofs_;
  std::vector<double> z1_;
  std::vector<double> z2_;
  std::vector<GraphPoint> dof_points_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

MeshPtr build_mesh(const MetricGraph& graph, double h);

struct Location {
  std::size_t element;  // global element index
  double local;         // barycentric position in [0, 1]
};

/// Element containing a point. Interior node ties go to the left element; the
/// edge end t = l_e returns the last element with local = 1.
Location locate(const Mesh& mesh, const GraphPoint& point);

}  // namespace mgip
