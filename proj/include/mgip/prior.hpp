#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <random>

#include "mgip/assembly.hpp"
#include "mgip/spectral.hpp"

namespace mgip {

using Rng = std::mt19937_64;

/// Vector of i.i.d. standard normals.
Eigen::VectorXd standard_normal(Rng& rng, Eigen::Index n);

/// Whittle-Matern prior: law of u solving (kappa0^2 - div(a grad))^alpha u = W
/// with Kirchhoff vertex conditions, discretized with linear elements and
/// discrete white noise of covariance M.
class PriorSpec {
 public:
  /// Parameters used for the letter-graph experiments.
  static constexpr double kPresetA = 0.2;
  static double preset_kappa0();

  PriorSpec(MeshPtr mesh, double kappa0, double a, double alpha);

  const MeshPtr& mesh() const { return mesh_; }
  double kappa0() const { return kappa0_; }
  double a() const { return a_; }
  double alpha() const { return alpha_; }

  const SparseMatrix& mass() const { return mass_; }
  /// K0 = a A(1) + kappa0^2 M.
  const SparseMatrix& operator_matrix() const { return k0_; }
  const SpdSolver& mass_solver() const { return *mass_solver_; }
  const SpdSolver& operator_solver() const { return *k0_solver_; }

  /// Eigenbasis of (K0, M), built on first use.
  const EigenBasis& basis() const;

 private:
  struct BasisCache {
    std::once_flag once;
    std::unique_ptr<EigenBasis> basis;
  };

  MeshPtr mesh_;
  double kappa0_;
  double a_;
  double alpha_;
  SparseMatrix mass_;
  SparseMatrix k0_;
  std::shared_ptr<const SpdSolver> mass_solver_;
  std::shared_ptr<const SpdSolver> k0_solver_;
  std::shared_ptr<BasisCache> cache_;
};

enum class SampleRoute {
  Automatic,  // direct for alpha = 1, spectral otherwise
  Direct,     // u = K0^{-1} F xi with F F^T = M (alpha = 1 only)
  Spectral,   // u = E diag(lambda^{-alpha}) xi
};

Field sample_prior(const PriorSpec& spec, Rng& rng, SampleRoute route = SampleRoute::Automatic);
Field sample_prior(const PriorSpec& spec, std::uint64_t seed, SampleRoute route = SampleRoute::Automatic);

/// 1/2 u^T Q0 u with Q0 the prior precision (K0 M^{-1} K0 at alpha = 1).
double prior_precision_quadratic(const PriorSpec& spec, const Field& u);

/// Diagonal of the prior covariance C0 = Q0^{-1}.
Field covariance_diag(const PriorSpec& spec);

/// Full covariance through either route; meant for small meshes.
Eigen::MatrixXd covariance_dense(const PriorSpec& spec, SampleRoute route);

}  // namespace mgip
