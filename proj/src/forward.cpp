#include "mgip/forward.hpp"

#include <cmath>
#include <string>

#include "mgip/error.hpp"
#include "mgip/prior.hpp"

namespace mgip {

ForwardSpec::ForwardSpec(MeshPtr mesh_in, double kappa_in, double beta_in, Field f_in)
    : mesh(std::move(mesh_in)), kappa(kappa_in), beta(beta_in), f(std::move(f_in)) {
  if (!mesh) throw ValidationError("forward problem needs a mesh");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ValidationError("forward kappa must be positive");
  if (!(beta >= 1.0) || !std::isfinite(beta)) throw ValidationError("forward order beta must satisfy beta >= 1");
  require_same_mesh(*mesh, f, "source f");
}

Field source_z1sq_minus_z2sq(MeshPtr mesh) {
  return interpolate(std::move(mesh), [](double z1, double z2) { return z1 * z1 - z2 * z2; }, FieldRole::Source);
}

void ObservationSet::validate(const Mesh& mesh) const {
  const auto m = static_cast<Eigen::Index>(functionals.size());
  if (y.size() != m || sigma2.size() != m)
    throw ValidationError("observation set: functionals, y and Sigma have different lengths");
  for (Eigen::Index j = 0; j < m; ++j) {
    if (!(sigma2[j] > 0.0) || !std::isfinite(sigma2[j]))
      throw ValidationError("observation " + std::to_string(j) + " has non-positive variance");
    if (!std::isfinite(y[j])) throw ValidationError("observation " + std::to_string(j) + " is not finite");
  }
  observation_matrix(mesh, functionals);
}

namespace {

Field solve_with_mass(const ForwardSpec& spec, const SparseMatrix& mass, const Field& u) {
  const OperatorPair op = assemble_stiffness(spec.mesh, mass, u, spec.kappa);
  if (spec.beta == 1.0) return solve_elliptic(op, spec.f);
  return solve_fractional(eigendecompose(op), spec.f, spec.beta);
}

}  // namespace

Field forward_map(const ForwardSpec& spec, const Field& u) {
  require_same_mesh(*spec.mesh, u, "parameter u");
  return solve_with_mass(spec, assemble_mass(*spec.mesh), u);
}

SparseMatrix observation_matrix(const Mesh& mesh, const std::vector<Functional>& functionals) {
  std::vector<Eigen::Triplet<double>> triplets;
  const auto n = static_cast<Eigen::Index>(mesh.n_dof());
  for (std::size_t j = 0; j < functionals.size(); ++j) {
    const auto row = static_cast<Eigen::Index>(j);
    if (const auto* pe = std::get_if<PointEval>(&functionals[j])) {
      const Location loc = locate(mesh, pe->point);
      const auto& el = mesh.elements()[loc.element];
      if (loc.local < 1.0) triplets.emplace_back(row, static_cast<Eigen::Index>(el.dof0), 1.0 - loc.local);
      if (loc.local > 0.0) triplets.emplace_back(row, static_cast<Eigen::Index>(el.dof1), loc.local);
    } else {
      const auto& w = std::get<WeightVector>(functionals[j]).weights;
      if (w.size() != n) throw ValidationError("weight functional " + std::to_string(j) + " has wrong length");
      if (!w.allFinite()) throw ValidationError("weight functional " + std::to_string(j) + " is not finite");
      for (Eigen::Index i = 0; i < n; ++i)
        if (w[i] != 0.0) triplets.emplace_back(row, i, w[i]);
    }
  }
  SparseMatrix out(static_cast<Eigen::Index>(functionals.size()), n);
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

Eigen::VectorXd observe(const Field& p, const std::vector<Functional>& functionals) {
  return observation_matrix(*p.mesh, functionals) * p.values;
}

Eigen::VectorXd observe(const Field& p, const ObservationSet& obs) { return observe(p, obs.functionals); }

double potential(const Eigen::VectorXd& g, const Eigen::VectorXd& y, const Eigen::VectorXd& sigma2) {
  if (g.size() != y.size() || y.size() != sigma2.size())
    throw ValidationError("potential: prediction, data and Sigma lengths differ");
  if ((sigma2.array() <= 0.0).any()) throw ValidationError("potential: Sigma must be positive");
  return 0.5 * ((y - g).array().square() / sigma2.array()).sum();
}

std::vector<GraphPoint> all_dof_points(const Mesh& mesh) {
  std::vector<GraphPoint> out;
  out.reserve(mesh.n_dof());
  for (std::size_t i = 0; i < mesh.n_dof(); ++i) out.push_back(mesh.dof_point(i));
  return out;
}

ObservationSet make_synthetic(const ForwardSpec& spec, const Field& u0, const NoiseModel& noise,
                              const std::optional<std::vector<GraphPoint>>& at, std::uint64_t seed) {
  if (!(noise.n_rel >= 0.0) || !(noise.n_abs >= 0.0)) throw ValidationError("noise levels must be nonnegative");
  if (!(noise.n_rel + noise.n_abs > 0.0))
    throw ValidationError("noise model with n_rel = n_abs = 0 gives a degenerate covariance");

  const std::vector<GraphPoint> points = at ? *at : all_dof_points(*spec.mesh);
  if (points.empty()) throw ValidationError("synthetic data needs at least one observation point");

  ObservationSet obs;
  obs.functionals.reserve(points.size());
  for (const auto& pt : points) obs.functionals.emplace_back(PointEval{pt});

  const Field p0 = forward_map(spec, u0);
  const Eigen::VectorXd clean = observe(p0, obs.functionals);
  Rng rng(seed);
  const Eigen::VectorXd eps = standard_normal(rng, clean.size());
  const auto m = clean.size();
  obs.y.resize(m);
  obs.sigma2.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sigma = noise.n_rel * std::abs(clean[i]) + noise.n_abs;
    if (!(sigma > 0.0)) throw ValidationError("observation " + std::to_string(i) + " has zero noise scale");
    obs.y[i] = clean[i] + sigma * eps[i];
    obs.sigma2[i] = sigma * sigma;
  }
  return obs;
}

ForwardModel::ForwardModel(ForwardSpec spec, ObservationSet obs)
    : spec_(std::move(spec)), obs_(std::move(obs)), mass_(assemble_mass(*spec_.mesh)) {
  obs_.validate(*spec_.mesh);
  observation_ = observation_matrix(*spec_.mesh, obs_.functionals);
}

Field ForwardModel::solve(const Field& u) const {
  require_same_mesh(*spec_.mesh, u, "parameter u");
  ++solves_;
  return solve_with_mass(spec_, mass_, u);
}

Eigen::VectorXd ForwardModel::predict(const Field& u) const { return observation_ * solve(u).values; }

double ForwardModel::potential(const Field& u) const { return potential_for(u, obs_.y); }

double ForwardModel::potential_for(const Field& u, const Eigen::VectorXd& y) const {
  if (obs_.size() == 0) return 0.0;
  return mgip::potential(predict(u), y, obs_.sigma2);
}

}  // namespace mgip
