#pragma once

#include <functional>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "mgip/graph.hpp"

namespace mgip {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class FieldRole { Parameter, Solution, Source, Eigenfunction, Generic };

/// Piecewise-linear function on the graph, one coefficient per mesh DOF.
struct Field {
  MeshPtr mesh;
  Eigen::VectorXd values;
  FieldRole role = FieldRole::Generic;

  Field(MeshPtr mesh, Eigen::VectorXd values, FieldRole role = FieldRole::Generic);

  static Field constant(MeshPtr mesh, double c, FieldRole role = FieldRole::Generic);

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  double sup_norm() const { return values.lpNorm<Eigen::Infinity>(); }
};

/// Nodal interpolation of a function of the embedded coordinates (z1, z2).
Field interpolate(MeshPtr mesh, const std::function<double(double, double)>& fn,
                  FieldRole role = FieldRole::Generic);

/// Throws ValidationError unless the field lives on a mesh with the same DOFs.
void require_same_mesh(const Mesh& mesh, const Field& field, const char* what);

/// Mass matrix and K = A(e^u) + kappa^2 M for L_u = kappa^2 - div(e^u grad).
struct OperatorPair {
  MeshPtr mesh;
  SparseMatrix mass;
  SparseMatrix stiffness;  // K, including the reaction term
  double kappa = 1.0;
};

SparseMatrix assemble_mass(const Mesh& mesh);

/// Pure diffusion part: sum over elements of c_k / w_k [[1, -1], [-1, 1]].
/// Kirchhoff vertex conditions are natural, so nothing is added at vertices.
SparseMatrix assemble_diffusion(const Mesh& mesh, const Eigen::VectorXd& element_coefficient);

/// e^u evaluated at each element midpoint from the nodal values of u.
Eigen::VectorXd midpoint_exp(const Mesh& mesh, const Eigen::VectorXd& u);

OperatorPair assemble_stiffness(MeshPtr mesh, const Field& u, double kappa);

/// Same as above but reusing an already assembled mass matrix.
OperatorPair assemble_stiffness(MeshPtr mesh, const SparseMatrix& mass, const Field& u, double kappa);

/// Galerkin solve of L_u p = f, i.e. K p = M f.
Field solve_elliptic(const OperatorPair& op, const Field& f);

/// Factorizes an SPD sparse matrix; throws NumericalError on failure.
class SpdSolver {
 public:
  explicit SpdSolver(const SparseMatrix& matrix, const char* name = "matrix");

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  /// Returns F xi with F F^T = A, F = P^T L.
  Eigen::VectorXd apply_factor(const Eigen::VectorXd& xi) const;
  Eigen::Index size() const { return lower_.rows(); }

 private:
  Eigen::SimplicialLLT<SparseMatrix> llt_;
  SparseMatrix lower_;
};

}  // namespace mgip
