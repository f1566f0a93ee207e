#include "mgip/prior.hpp"

#include <cmath>

#include "mgip/error.hpp"

namespace mgip {

Eigen::VectorXd standard_normal(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd xi(n);
  for (Eigen::Index i = 0; i < n; ++i) xi[i] = normal(rng);
  return xi;
}

double PriorSpec::preset_kappa0() { return std::sqrt(0.2) * 2.0 / 3.0; }

PriorSpec::PriorSpec(MeshPtr mesh, double kappa0, double a, double alpha)
    : mesh_(std::move(mesh)), kappa0_(kappa0), a_(a), alpha_(alpha) {
  if (!mesh_) throw ValidationError("prior needs a mesh");
  if (!(kappa0 > 0.0) || !std::isfinite(kappa0)) throw ValidationError("prior kappa0 must be positive");
  if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError("prior diffusion a must be positive");
  if (!(alpha > 0.75) || !std::isfinite(alpha))
    throw ValidationError("prior smoothness alpha must satisfy alpha > 3/4");

  mass_ = assemble_mass(*mesh_);
  const Eigen::VectorXd coef = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(mesh_->elements().size()), a);
  k0_ = assemble_diffusion(*mesh_, coef);
  k0_ += (kappa0 * kappa0) * mass_;
  mass_solver_ = std::make_shared<const SpdSolver>(mass_, "mass matrix M");
  k0_solver_ = std::make_shared<const SpdSolver>(k0_, "prior operator K0");
  cache_ = std::make_shared<BasisCache>();
}

const EigenBasis& PriorSpec::basis() const {
  std::call_once(cache_->once, [this] {
    OperatorPair op{mesh_, mass_, k0_, kappa0_};
    cache_->basis = std::make_unique<EigenBasis>(eigendecompose(op));
  });
  return *cache_->basis;
}

namespace {

bool use_direct(const PriorSpec& spec, SampleRoute route) {
  if (route == SampleRoute::Automatic) return spec.alpha() == 1.0;
  if (route == SampleRoute::Direct && spec.alpha() != 1.0)
    throw ValidationError("direct prior route requires alpha = 1");
  return route == SampleRoute::Direct;
}

}  // namespace

Field sample_prior(const PriorSpec& spec, Rng& rng, SampleRoute route) {
  const auto n = static_cast<Eigen::Index>(spec.mesh()->n_dof());
  const Eigen::VectorXd xi = standard_normal(rng, n);
  if (use_direct(spec, route)) {
    Eigen::VectorXd u = spec.operator_solver().solve(spec.mass_solver().apply_factor(xi));
    return Field(spec.mesh(), std::move(u), FieldRole::Parameter);
  }
  const auto& basis = spec.basis();
  const Eigen::VectorXd scaled = xi.array() * basis.eigenvalues.array().pow(-spec.alpha());
  return Field(spec.mesh(), basis.eigenvectors * scaled, FieldRole::Parameter);
}

Field sample_prior(const PriorSpec& spec, std::uint64_t seed, SampleRoute route) {
  Rng rng(seed);
  return sample_prior(spec, rng, route);
}

double prior_precision_quadratic(const PriorSpec& spec, const Field& u) {
  require_same_mesh(*spec.mesh(), u, "parameter u");
  if (spec.alpha() == 1.0) {
    const Eigen::VectorXd ku = spec.operator_matrix() * u.values;
    return 0.5 * ku.dot(spec.mass_solver().solve(ku));
  }
  const auto& basis = spec.basis();
  const Eigen::VectorXd c = basis.eigenvectors.transpose() * (spec.mass() * u.values);
  return 0.5 * (c.array().square() * basis.eigenvalues.array().pow(2.0 * spec.alpha())).sum();
}

Field covariance_diag(const PriorSpec& spec) {
  const auto n = static_cast<Eigen::Index>(spec.mesh()->n_dof());
  Eigen::VectorXd diag(n);
  if (spec.alpha() == 1.0) {
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      unit[i] = 1.0;
      const Eigen::VectorXd x = spec.operator_solver().solve(unit);
      diag[i] = x.dot(spec.mass() * x);
      unit[i] = 0.0;
    }
  } else {
    const auto& basis = spec.basis();
    const Eigen::VectorXd w = basis.eigenvalues.array().pow(-2.0 * spec.alpha());
    diag = basis.eigenvectors.array().square().matrix() * w;
  }
  return Field(spec.mesh(), std::move(diag), FieldRole::Generic);
}

Eigen::MatrixXd covariance_dense(const PriorSpec& spec, SampleRoute route) {
  if (use_direct(spec, route)) {
    const Eigen::MatrixXd k0(spec.operator_matrix());
    const Eigen::MatrixXd m(spec.mass());
    Eigen::LLT<Eigen::MatrixXd> llt(k0);
    const Eigen::MatrixXd kinv_m = llt.solve(m);
    const Eigen::MatrixXd cov = llt.solve(kinv_m.transpose());
    return 0.5 * (cov + cov.transpose());
  }
  const auto& basis = spec.basis();
  const Eigen::VectorXd w = basis.eigenvalues.array().pow(-2.0 * spec.alpha());
  return basis.eigenvectors * w.asDiagonal() * basis.eigenvectors.transpose();
}

}  // namespace mgip
