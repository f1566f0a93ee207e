#include "mgip/assembly.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "mgip/error.hpp"

namespace mgip {

Field::Field(MeshPtr mesh_in, Eigen::VectorXd values_in, FieldRole role_in)
    : mesh(std::move(mesh_in)), values(std::move(values_in)), role(role_in) {
  if (!mesh) throw ValidationError("field without a mesh");
  if (static_cast<std::size_t>(values.size()) != mesh->n_dof())
    throw ValidationError("field has " + std::to_string(values.size()) + " coefficients, mesh has " +
                          std::to_string(mesh->n_dof()) + " DOFs");
  if (!values.allFinite()) throw ValidationError("field has non-finite coefficients");
}

Field Field::constant(MeshPtr mesh, double c, FieldRole role) {
  const auto n = static_cast<Eigen::Index>(mesh->n_dof());
  return Field(std::move(mesh), Eigen::VectorXd::Constant(n, c), role);
}

Field interpolate(MeshPtr mesh, const std::function<double(double, double)>& fn, FieldRole role) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(mesh->n_dof()));
  for (std::size_t i = 0; i < mesh->n_dof(); ++i) v[static_cast<Eigen::Index>(i)] = fn(mesh->z1(i), mesh->z2(i));
  return Field(std::move(mesh), std::move(v), role);
}

void require_same_mesh(const Mesh& mesh, const Field& field, const char* what) {
  if (field.mesh.get() != &mesh && field.mesh->n_dof() != mesh.n_dof())
    throw ValidationError(std::string(what) + " is defined on a different mesh (" +
                          std::to_string(field.mesh->n_dof()) + " vs " + std::to_string(mesh.n_dof()) +
                          " DOFs)");
}

namespace {

SparseMatrix from_element_blocks(const Mesh& mesh, const std::function<void(const Mesh::Element&, std::size_t,
                                                                            double (&)[2][2])>& block) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(4 * mesh.elements().size());
  const auto& elements = mesh.elements();
  for (std::size_t k = 0; k < elements.size(); ++k) {
    double local[2][2];
    block(elements[k], k, local);
    const Eigen::Index dofs[2] = {static_cast<Eigen::Index>(elements[k].dof0),
                                  static_cast<Eigen::Index>(elements[k].dof1)};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) triplets.emplace_back(dofs[a], dofs[b], local[a][b]);
  }
  const auto n = static_cast<Eigen::Index>(mesh.n_dof());
  SparseMatrix out(n, n);
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

}  // namespace

SparseMatrix assemble_mass(const Mesh& mesh) {
  return from_element_blocks(mesh, [](const Mesh::Element& el, std::size_t, double (&m)[2][2]) {
    m[0][0] = m[1][1] = el.width / 3.0;
    m[0][1] = m[1][0] = el.width / 6.0;
  });
}

SparseMatrix assemble_diffusion(const Mesh& mesh, const Eigen::VectorXd& element_coefficient) {
  if (static_cast<std::size_t>(element_coefficient.size()) != mesh.elements().size())
    throw ValidationError("diffusion coefficient needs one value per element");
  return from_element_blocks(mesh, [&](const Mesh::Element& el, std::size_t k, double (&m)[2][2]) {
    const double c = element_coefficient[static_cast<Eigen::Index>(k)] / el.width;
    m[0][0] = m[1][1] = c;
    m[0][1] = m[1][0] = -c;
  });
}

Eigen::VectorXd midpoint_exp(const Mesh& mesh, const Eigen::VectorXd& u) {
  const auto& elements = mesh.elements();
  Eigen::VectorXd out(static_cast<Eigen::Index>(elements.size()));
  for (std::size_t k = 0; k < elements.size(); ++k)
    out[static_cast<Eigen::Index>(k)] =
        std::exp(0.5 * (u[static_cast<Eigen::Index>(elements[k].dof0)] + u[static_cast<Eigen::Index>(elements[k].dof1)]));
  return out;
}

OperatorPair assemble_stiffness(MeshPtr mesh, const SparseMatrix& mass, const Field& u, double kappa) {
  if (!(kappa > 0.0)) throw ValidationError("kappa must be positive");
  require_same_mesh(*mesh, u, "parameter u");
  SparseMatrix k = assemble_diffusion(*mesh, midpoint_exp(*mesh, u.values));
  k += (kappa * kappa) * mass;
  return OperatorPair{std::move(mesh), mass, std::move(k), kappa};
}

OperatorPair assemble_stiffness(MeshPtr mesh, const Field& u, double kappa) {
  const SparseMatrix mass = assemble_mass(*mesh);
  return assemble_stiffness(std::move(mesh), mass, u, kappa);
}

Field solve_elliptic(const OperatorPair& op, const Field& f) {
  require_same_mesh(*op.mesh, f, "source f");
  const SpdSolver solver(op.stiffness, "stiffness matrix K");
  Eigen::VectorXd p = solver.solve(op.mass * f.values);
  if (!p.allFinite()) throw NumericalError("elliptic solve produced non-finite values");
  return Field(op.mesh, std::move(p), FieldRole::Solution);
}

SpdSolver::SpdSolver(const SparseMatrix& matrix, const char* name) {
  llt_.compute(matrix);
  if (llt_.info() != Eigen::Success)
    throw NumericalError(std::string("Cholesky factorization of ") + name + " failed (not SPD)");
  lower_ = llt_.matrixL();
}

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& rhs) const { return llt_.solve(rhs); }

Eigen::VectorXd SpdSolver::apply_factor(const Eigen::VectorXd& xi) const {
  const Eigen::VectorXd lx = lower_ * xi;
  return llt_.permutationPinv() * lx;
}

}  // namespace mgip
