#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "mgip/assembly.hpp"
#include "mgip/spectral.hpp"

namespace mgip {

/// Forward problem L_u^beta p = f with L_u = kappa^2 - div(e^u grad).
struct ForwardSpec {
  ForwardSpec(MeshPtr mesh, double kappa, double beta, Field f);

  MeshPtr mesh;
  double kappa;
  double beta;
  Field f;
};

/// f(x) = z1(x)^2 - z2(x)^2 at the embedded node coordinates.
Field source_z1sq_minus_z2sq(MeshPtr mesh);

/// Pointwise evaluation l(p) = p(x), linear interpolation within the element.
struct PointEval {
  GraphPoint point;
};

/// Bounded linear functional l(p) = w^T p on the nodal coefficients.
struct WeightVector {
  Eigen::VectorXd weights;
};

using Functional = std::variant<PointEval, WeightVector>;

/// Data y = (l_1(p), ..., l_m(p)) + eta with eta ~ N(0, diag(sigma2)).
struct ObservationSet {
  std::vector<Functional> functionals;
  Eigen::VectorXd y;
  Eigen::VectorXd sigma2;

  std::size_t size() const { return functionals.size(); }
  /// Sizes agree, variances positive, points on the graph.
  void validate(const Mesh& mesh) const;
};

struct NoiseModel {
  double n_rel = 0.05;
  double n_abs = 0.10;
};

Field forward_map(const ForwardSpec& spec, const Field& u);

/// m x n_dof sparse matrix whose rows apply the functionals.
SparseMatrix observation_matrix(const Mesh& mesh, const std::vector<Functional>& functionals);

Eigen::VectorXd observe(const Field& p, const std::vector<Functional>& functionals);
Eigen::VectorXd observe(const Field& p, const ObservationSet& obs);

/// 1/2 sum_j (y_j - g_j)^2 / sigma2_j.
double potential(const Eigen::VectorXd& g, const Eigen::VectorXd& y, const Eigen::VectorXd& sigma2);

/// One PointEval per mesh DOF, at the DOF's canonical location.
std::vector<GraphPoint> all_dof_points(const Mesh& mesh);

/// y_i = p0(x_i) + (n_rel |p0(x_i)| + n_abs) eps_i with Sigma_ii the squared
/// noise scale. `at` defaults to all mesh DOFs.
ObservationSet make_synthetic(const ForwardSpec& spec, const Field& u0, const NoiseModel& noise,
                              const std::optional<std::vector<GraphPoint>>& at, std::uint64_t seed);

/// G = Q o F with the mass and observation matrices assembled once, so that
/// Phi(u; y) costs one forward solve. Counts forward solves.
class ForwardModel {
 public:
  ForwardModel(ForwardSpec spec, ObservationSet obs);

  const ForwardSpec& spec() const { return spec_; }
  const ObservationSet& observations() const { return obs_; }

  Field solve(const Field& u) const;
  Eigen::VectorXd predict(const Field& u) const;  // G(u)
  double potential(const Field& u) const;         // Phi(u; y)
  double potential_for(const Field& u, const Eigen::VectorXd& y) const;

  std::uint64_t solve_count() const { return solves_.load(); }

 private:
  ForwardSpec spec_;
  ObservationSet obs_;
  SparseMatrix mass_;
  SparseMatrix observation_;
  mutable std::atomic<std::uint64_t> solves_{0};
};

}  // namespace mgip
