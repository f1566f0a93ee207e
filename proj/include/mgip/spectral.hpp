#pragma once

#include <utility>

#include "mgip/assembly.hpp"

namespace mgip {

/// M-orthonormal eigenpairs of K e = lambda M e, eigenvalues ascending.
struct EigenBasis {
  MeshPtr mesh;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  // columns e_j with E^T M E = I
  SparseMatrix mass;
  double kappa = 1.0;

  Eigen::Index size() const { return eigenvalues.size(); }
};

/// Dense generalized eigendecomposition of (K, M). Each column is signed so
/// its first entry with magnitude above 1e-12 of the column max is positive.
EigenBasis eigendecompose(const OperatorPair& op);

/// Eigenvalues only (same ordering as eigendecompose).
Eigen::VectorXd generalized_eigenvalues(const OperatorPair& op);

/// p = E diag(lambda^-beta) E^T M f, exact for the discrete operator.
Field solve_fractional(const EigenBasis& basis, const Field& f, double beta);

struct WeylBracket {
  double lower;  // min_j lambda_j e^{|u|_inf} / j^2
  double upper;  // max_j lambda_j e^{-|u|_inf} / j^2
};

/// Empirical Weyl-law constants over the lower half of the discrete spectrum.
WeylBracket weyl_ratio(const EigenBasis& basis, const Field& u);
WeylBracket weyl_ratio(const Eigen::VectorXd& eigenvalues, double u_sup);

/// max_j |lambda1_j^-s - lambda2_j^-s| / (exp((s+2) max|u_i|_inf) |u1-u2|_inf).
/// Returns 0 when |u1-u2|_inf < 1e-14.
double eigen_perturbation_check(const OperatorPair& op1, const OperatorPair& op2, const Field& u1,
                                const Field& u2, double s);
double eigen_perturbation_check(const Eigen::VectorXd& lambda1, const Eigen::VectorXd& lambda2,
                                const Field& u1, const Field& u2, double s);

}  // namespace mgip
