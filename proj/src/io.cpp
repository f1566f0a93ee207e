#include "mgip/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mgip/error.hpp"

namespace mgip {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::string& csv_id(const std::string& id) {
  if (id.find_first_of(",\"\n\r") != std::string::npos)
    throw ValidationError("id '" + id + "' cannot be written to CSV");
  return id;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NumericalError("cannot write " + path.string());
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& s, std::size_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
    throw ValidationError("line " + std::to_string(line_no) + ": invalid number '" + s + "'");
  return v;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

void expect_header(std::istream& in, const std::string& header) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty CSV, expected header " + header);
  strip_cr(line);
  if (line != header) throw ValidationError("unexpected CSV header '" + line + "', expected " + header);
}

}  // namespace

void write_field_csv(std::ostream& out, const Field& field) {
  const Mesh& mesh = *field.mesh;
  out << "edge_id,t,z1,z2,value\n";
  for (std::size_t e = 0; e < mesh.graph().num_edges(); ++e) {
    const auto& id = csv_id(mesh.graph().edges()[e].id);
    const auto& dofs = mesh.edge_dofs(e);
    for (std::size_t k = 0; k < dofs.size(); ++k) {
      const std::size_t d = dofs[k];
      out << id << ',' << num(mesh.node_t(e, k)) << ',' << num(mesh.z1(d)) << ',' << num(mesh.z2(d)) << ','
          << num(field.values[static_cast<Eigen::Index>(d)]) << '\n';
    }
  }
}

void write_field_csv(const std::filesystem::path& path, const Field& field) {
  auto out = open_out(path);
  write_field_csv(out, field);
}

Field read_field_csv(std::istream& in, MeshPtr mesh, FieldRole role) {
  expect_header(in, "edge_id,t,z1,z2,value");
  const auto n = static_cast<Eigen::Index>(mesh->n_dof());
  Eigen::VectorXd values = Eigen::VectorXd::Zero(n);
  std::vector<bool> seen(mesh->n_dof(), false);
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 5) throw ValidationError("line " + std::to_string(line_no) + ": expected 5 columns");
    const std::size_t e = mesh->graph().edge_index(cells[0]);
    const double t = parse_double(cells[1], line_no);
    const double value = parse_double(cells[4], line_no);
    const double len = mesh->graph().edges()[e].length;
    const auto elems = static_cast<double>(mesh->num_edge_elements(e));
    const double k_real = std::round(t / len * elems);
    if (k_real < 0.0 || k_real > elems || std::abs(t - mesh->node_t(e, static_cast<std::size_t>(k_real))) > 1e-9 * len)
      throw ValidationError("line " + std::to_string(line_no) + ": t=" + cells[1] + " is not a mesh node");
    const std::size_t dof = mesh->edge_dofs(e)[static_cast<std::size_t>(k_real)];
    const auto idx = static_cast<Eigen::Index>(dof);
    if (seen[dof] && values[idx] != value)
      throw ValidationError("line " + std::to_string(line_no) + ": inconsistent value at a shared vertex");
    values[idx] = value;
    seen[dof] = true;
  }
  for (std::size_t d = 0; d < seen.size(); ++d)
    if (!seen[d]) throw ValidationError("field file is missing DOF " + std::to_string(d));
  return Field(std::move(mesh), std::move(values), role);
}

Field read_field_csv(const std::filesystem::path& path, MeshPtr mesh, FieldRole role) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open field file " + path.string());
  return read_field_csv(in, std::move(mesh), role);
}

void write_observations_csv(const std::filesystem::path& path, const Mesh& mesh, const ObservationSet& obs) {
  auto out = open_out(path);
  out << "obs_id,edge_id,t,y,sigma\n";
  for (std::size_t j = 0; j < obs.size(); ++j) {
    const auto* pe = std::get_if<PointEval>(&obs.functionals[j]);
    if (!pe) throw ValidationError("observation " + std::to_string(j) + " is not a point evaluation");
    const auto idx = static_cast<Eigen::Index>(j);
    out << j << ',' << csv_id(mesh.graph().edges().at(pe->point.edge).id) << ',' << num(pe->point.t) << ','
        << num(obs.y[idx]) << ',' << num(std::sqrt(obs.sigma2[idx])) << '\n';
  }
}

ObservationSet read_observations_csv(const std::filesystem::path& path, const Mesh& mesh) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open observation file " + path.string());
  expect_header(in, "obs_id,edge_id,t,y,sigma");
  ObservationSet obs;
  std::vector<double> y;
  std::vector<double> s2;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 5) throw ValidationError("line " + std::to_string(line_no) + ": expected 5 columns");
    const std::size_t e = mesh.graph().edge_index(cells[1]);
    obs.functionals.emplace_back(PointEval{GraphPoint{e, parse_double(cells[2], line_no)}});
    y.push_back(parse_double(cells[3], line_no));
    const double sigma = parse_double(cells[4], line_no);
    s2.push_back(sigma * sigma);
  }
  obs.y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  obs.sigma2 = Eigen::Map<const Eigen::VectorXd>(s2.data(), static_cast<Eigen::Index>(s2.size()));
  obs.validate(mesh);
  return obs;
}

void write_trace_csv(const std::filesystem::path& path, const ChainResult& result) {
  auto out = open_out(path);
  out << "n,accepted,tau,T,phi,prior_quad\n";
  for (std::size_t i = 0; i < result.iterations(); ++i)
    out << (i + 1) << ',' << int(result.accepted[i]) << ',' << num(result.tau[i]) << ','
        << num(result.temperature[i]) << ',' << num(result.phi[i]) << ',' << num(result.prior_quad[i]) << '\n';
}

void write_eigenvalues_csv(const std::filesystem::path& path, const Eigen::VectorXd& eigenvalues) {
  auto out = open_out(path);
  out << "j,lambda,weyl_ratio\n";
  for (Eigen::Index j = 1; j <= eigenvalues.size(); ++j)
    out << j << ',' << num(eigenvalues[j - 1]) << ',' << num(eigenvalues[j - 1] / static_cast<double>(j * j))
        << '\n';
}

}  // namespace mgip
