#include "mgip/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "mgip/error.hpp"

namespace mgip {

namespace {

std::string id_string(const nlohmann::json& node, const char* what) {
  if (node.is_string()) return node.get<std::string>();
  if (node.is_number_integer()) return std::to_string(node.get<long long>());
  throw ValidationError(std::string(what) + " must be a string or integer");
}

double finite_number(const nlohmann::json& node, const std::string& what) {
  if (!node.is_number()) throw ValidationError(what + " must be a number");
  const double v = node.get<double>();
  if (!std::isfinite(v)) throw ValidationError(what + " must be finite");
  return v;
}

}  // namespace

MetricGraph::MetricGraph(std::vector<Vertex> vertices, const std::vector<EdgeSpec>& edges)
    : vertices_(std::move(vertices)) {
  if (vertices_.empty()) throw ValidationError("graph has no vertices");
  if (edges.empty()) throw ValidationError("graph has no edges");

  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    const auto& v = vertices_[i];
    if (!std::isfinite(v.x) || !std::isfinite(v.y))
      throw ValidationError("vertex '" + v.id + "' has non-finite coordinates");
    if (!vertex_lookup_.emplace(v.id, i).second)
      throw ValidationError("duplicate vertex id '" + v.id + "'");
  }

  incidence_.resize(vertices_.size());
  edges_.reserve(edges.size());
  for (const auto& spec : edges) {
    if (edge_lookup_.count(spec.id)) throw ValidationError("duplicate edge id '" + spec.id + "'");
    auto src = vertex_lookup_.find(spec.source);
    if (src == vertex_lookup_.end())
      throw ValidationError("edge '" + spec.id + "' references unknown vertex '" + spec.source + "'");
    auto dst = vertex_lookup_.find(spec.target);
    if (dst == vertex_lookup_.end())
      throw ValidationError("edge '" + spec.id + "' references unknown vertex '" + spec.target + "'");

    Edge e{spec.id, src->second, dst->second, 0.0};
    if (spec.length) {
      e.length = *spec.length;
      if (!std::isfinite(e.length) || e.length <= 0.0)
        throw ValidationError("edge '" + spec.id + "' has non-positive length");
    } else {
      const auto& a = vertices_[e.source];
      const auto& b = vertices_[e.target];
      e.length = std::hypot(b.x - a.x, b.y - a.y);
      if (!(e.length > 0.0))
        throw ValidationError("edge '" + spec.id +
                              "' has coincident endpoints and no explicit length");
    }
    edge_lookup_.emplace(e.id, edges_.size());
    incidence_[e.source].push_back(edges_.size());
    incidence_[e.target].push_back(edges_.size());
    edges_.push_back(std::move(e));
  }

  // Connectivity by union-find over edges.
  std::vector<std::size_t> parent(vertices_.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : edges_) parent[find(e.source)] = find(e.target);
  const std::size_t root = find(0);
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (find(i) != root)
      throw ValidationError("graph is disconnected: vertex '" + vertices_[i].id +
                            "' is not reachable from '" + vertices_[0].id + "'");
  }
}

std::size_t MetricGraph::vertex_index(const std::string& id) const {
  auto it = vertex_lookup_.find(id);
  if (it == vertex_lookup_.end()) throw ValidationError("unknown vertex id '" + id + "'");
  return it->second;
}

std::size_t MetricGraph::edge_index(const std::string& id) const {
  auto it = edge_lookup_.find(id);
  if (it == edge_lookup_.end()) throw ValidationError("unknown edge id '" + id + "'");
  return it->second;
}

double MetricGraph::total_length() const {
  double sum = 0.0;
  for (const auto& e : edges_) sum += e.length;
  return sum;
}

std::optional<std::size_t> vertex_at(const MetricGraph& graph, const GraphPoint& p, double tol) {
  const auto& e = graph.edges().at(p.edge);
  if (std::abs(p.t) <= tol * std::max(1.0, e.length)) return e.source;
  if (std::abs(p.t - e.length) <= tol * std::max(1.0, e.length)) return e.target;
  return std::nullopt;
}

bool same_point(const MetricGraph& graph, const GraphPoint& a, const GraphPoint& b, double tol) {
  const auto va = vertex_at(graph, a, tol);
  const auto vb = vertex_at(graph, b, tol);
  if (va || vb) return va == vb;
  return a.edge == b.edge && std::abs(a.t - b.t) <= tol * std::max(1.0, graph.edges()[a.edge].length);
}

MetricGraph parse_graph(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    throw ValidationError(std::string("graph parse error: ") + err.what());
  }
  if (!doc.is_object() || !doc.contains("vertices") || !doc.contains("edges") ||
      !doc["vertices"].is_array() || !doc["edges"].is_array())
    throw ValidationError("graph document needs array keys \"vertices\" and \"edges\"");

  std::vector<Vertex> vertices;
  for (const auto& v : doc["vertices"]) {
    if (!v.is_object() || !v.contains("id") || !v.contains("x") || !v.contains("y"))
      throw ValidationError("each vertex needs id, x, y");
    Vertex out;
    out.id = id_string(v["id"], "vertex id");
    out.x = finite_number(v["x"], "vertex '" + out.id + "' x");
    out.y = finite_number(v["y"], "vertex '" + out.id + "' y");
    vertices.push_back(std::move(out));
  }

  std::vector<EdgeSpec> edges;
  for (const auto& e : doc["edges"]) {
    if (!e.is_object() || !e.contains("id") || !e.contains("source") || !e.contains("target"))
      throw ValidationError("each edge needs id, source, target");
    EdgeSpec out;
    out.id = id_string(e["id"], "edge id");
    out.source = id_string(e["source"], "edge source");
    out.target = id_string(e["target"], "edge target");
    if (e.contains("length") && !e["length"].is_null())
      out.length = finite_number(e["length"], "edge '" + out.id + "' length");
    edges.push_back(std::move(out));
  }
  return MetricGraph(std::move(vertices), edges);
}

MetricGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open graph file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_graph(buf.str());
}

Mesh::Mesh(MetricGraph graph, double h) : graph_(std::move(graph)), h_(h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("mesh size h must be positive");

  const std::size_t nv = graph_.num_vertices();
  const std::size_t ne = graph_.num_edges();
  edge_elements_.resize(ne);
  edge_first_element_.resize(ne);
  edge_dofs_.resize(ne);

  std::size_t next_dof = nv;
  for (std::size_t e = 0; e < ne; ++e) {
    const double ratio = graph_.edges()[e].length / h;
    // Guard against ratios like 20.000000000000004 adding a spurious element.
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(ratio - 1e-9 * ratio)));
    edge_elements_[e] = n;
    auto& dofs = edge_dofs_[e];
    dofs.resize(n + 1);
    dofs.front() = graph_.edges()[e].source;
    dofs.back() = graph_.edges()[e].target;
    for (std::size_t k = 1; k < n; ++k) dofs[k] = next_dof++;
  }
  n_dof_ = next_dof;

  z1_.assign(n_dof_, 0.0);
  z2_.assign(n_dof_, 0.0);
  dof_points_.resize(n_dof_);
  for (std::size_t v = 0; v < nv; ++v) {
    z1_[v] = graph_.vertices()[v].x;
    z2_[v] = graph_.vertices()[v].y;
    const std::size_t e = graph_.incident_edges(v).front();
    const auto& edge = graph_.edges()[e];
    dof_points_[v] = GraphPoint{e, edge.source == v ? 0.0 : edge.length};
  }

  for (std::size_t e = 0; e < ne; ++e) {
    const auto& edge = graph_.edges()[e];
    const auto& a = graph_.vertices()[edge.source];
    const auto& b = graph_.vertices()[edge.target];
    const std::size_t n = edge_elements_[e];
    const double w = edge.length / static_cast<double>(n);
    edge_first_element_[e] = elements_.size();
    for (std::size_t k = 0; k < n; ++k)
      elements_.push_back(Element{e, k, edge_dofs_[e][k], edge_dofs_[e][k + 1], w});
    for (std::size_t k = 1; k < n; ++k) {
      const double s = static_cast<double>(k) / static_cast<double>(n);
      const std::size_t dof = edge_dofs_[e][k];
      z1_[dof] = a.x + s * (b.x - a.x);
      z2_[dof] = a.y + s * (b.y - a.y);
      dof_points_[dof] = GraphPoint{e, node_t(e, k)};
    }
  }
}

double Mesh::element_width(std::size_t edge) const {
  return graph_.edges()[edge].length / static_cast<double>(edge_elements_[edge]);
}

double Mesh::node_t(std::size_t edge, std::size_t k) const {
  const std::size_t n = edge_elements_[edge];
  if (k == n) return graph_.edges()[edge].length;
  return graph_.edges()[edge].length * static_cast<double>(k) / static_cast<double>(n);
}

MeshPtr build_mesh(const MetricGraph& graph, double h) { return std::make_shared<const Mesh>(graph, h); }

Location locate(const Mesh& mesh, const GraphPoint& point) {
  const auto& graph = mesh.graph();
  if (point.edge >= graph.num_edges())
    throw ValidationError("unknown edge index " + std::to_string(point.edge));
  const double len = graph.edges()[point.edge].length;
  const double tol = 1e-12 * std::max(1.0, len);
  if (!std::isfinite(point.t) || point.t < -tol || point.t > len + tol)
    throw ValidationError("point t=" + std::to_string(point.t) + " is off edge '" +
                          graph.edges()[point.edge].id + "'");

  const std::size_t n = mesh.num_edge_elements(point.edge);
  const double s = std::clamp(point.t, 0.0, len) / len * static_cast<double>(n);
  const double nearest = std::round(s);
  std::size_t k;
  double local;
  if (std::abs(s - nearest) <= 1e-10 * std::max(1.0, s)) {
    // On a node: left element, except the very first node.
    const auto node = static_cast<std::size_t>(nearest);
    k = node == 0 ? 0 : node - 1;
    local = node == 0 ? 0.0 : 1.0;
  } else {
    k = std::min(static_cast<std::size_t>(std::floor(s)), n - 1);
    local = s - static_cast<double>(k);
  }
  return Location{mesh.first_element(point.edge) + k, local};
}

}  // namespace mgip
