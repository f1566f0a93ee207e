#include "mgip/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "mgip/error.hpp"

namespace mgip {

namespace {

Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solve_pencil(const OperatorPair& op, bool vectors) {
  const Eigen::MatrixXd k(op.stiffness);
  const Eigen::MatrixXd m(op.mass);
  if (!k.allFinite() || !m.allFinite()) throw NumericalError("eigendecompose: non-finite operator entries");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      k, m, vectors ? Eigen::ComputeEigenvectors | Eigen::Ax_lBx : Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success) throw NumericalError("generalized eigensolver failed");
  return solver;
}

}  // namespace

EigenBasis eigendecompose(const OperatorPair& op) {
  auto solver = solve_pencil(op, true);
  EigenBasis basis{op.mesh, solver.eigenvalues(), solver.eigenvectors(), op.mass, op.kappa};
  if (!basis.eigenvalues.allFinite() || !basis.eigenvectors.allFinite())
    throw NumericalError("eigendecompose: non-finite eigenpairs");
  for (Eigen::Index j = 0; j < basis.eigenvectors.cols(); ++j) {
    auto col = basis.eigenvectors.col(j);
    const double cutoff = 1e-12 * col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col[i]) > cutoff) {
        if (col[i] < 0.0) col = -col;
        break;
      }
    }
  }
  return basis;
}

Eigen::VectorXd generalized_eigenvalues(const OperatorPair& op) { return solve_pencil(op, false).eigenvalues(); }

Field solve_fractional(const EigenBasis& basis, const Field& f, double beta) {
  if (!(beta >= 1.0)) throw ValidationError("fractional order beta must be >= 1");
  require_same_mesh(*basis.mesh, f, "source f");
  const Eigen::VectorXd coeffs = basis.eigenvectors.transpose() * (basis.mass * f.values);
  const Eigen::VectorXd scaled = coeffs.array() * basis.eigenvalues.array().pow(-beta);
  return Field(basis.mesh, basis.eigenvectors * scaled, FieldRole::Solution);
}

WeylBracket weyl_ratio(const Eigen::VectorXd& eigenvalues, double u_sup) {
  const Eigen::Index half = std::max<Eigen::Index>(1, eigenvalues.size() / 2);
  WeylBracket out{std::numeric_limits<double>::infinity(), 0.0};
  const double up = std::exp(u_sup);
  const double down = std::exp(-u_sup);
  for (Eigen::Index j = 1; j <= half; ++j) {
    const double r = eigenvalues[j - 1] / static_cast<double>(j * j);
    out.lower = std::min(out.lower, r * up);
    out.upper = std::max(out.upper, r * down);
  }
  return out;
}

WeylBracket weyl_ratio(const EigenBasis& basis, const Field& u) {
  require_same_mesh(*basis.mesh, u, "parameter u");
  return weyl_ratio(basis.eigenvalues, u.sup_norm());
}

double eigen_perturbation_check(const Eigen::VectorXd& lambda1, const Eigen::VectorXd& lambda2, const Field& u1,
                                const Field& u2, double s) {
  if (!(s >= 0.0)) throw ValidationError("exponent s must be nonnegative");
  if (lambda1.size() != lambda2.size()) throw ValidationError("spectra have different sizes");
  require_same_mesh(*u1.mesh, u2, "u2");
  const double du = (u1.values - u2.values).lpNorm<Eigen::Infinity>();
  if (du < 1e-14) return 0.0;
  const double diff = (lambda1.array().pow(-s) - lambda2.array().pow(-s)).abs().maxCoeff();
  const double scale = std::exp((s + 2.0) * std::max(u1.sup_norm(), u2.sup_norm())) * du;
  return diff / scale;
}

double eigen_perturbation_check(const OperatorPair& op1, const OperatorPair& op2, const Field& u1, const Field& u2,
                                double s) {
  if (op1.mesh->n_dof() != op2.mesh->n_dof()) throw ValidationError("operators live on different meshes");
  const double du = (u1.values - u2.values).lpNorm<Eigen::Infinity>();
  if (du < 1e-14) return 0.0;
  return eigen_perturbation_check(generalized_eigenvalues(op1), generalized_eigenvalues(op2), u1, u2, s);
}

}  // namespace mgip
