#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "mgip/error.hpp"
#include "mgip/forward.hpp"
#include "mgip/prior.hpp"
#include "support.hpp"

using namespace mgip;

namespace {

Field random_u(const MeshPtr& mesh, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::VectorXd u(static_cast<Eigen::Index>(mesh->n_dof()));
  for (auto& x : u) x = normal(rng);
  return Field(mesh, u, FieldRole::Parameter);
}

}  // namespace

TEST_CASE("ForwardSpec validation") {
  const auto mesh = build_mesh(mgip::testing::interval(), 0.25);
  const Field f = Field::constant(mesh, 1.0);
  CHECK_THROWS_AS(ForwardSpec(mesh, 0.0, 1.0, f), ValidationError);
  CHECK_THROWS_AS(ForwardSpec(mesh, 1.0, 0.5, f), ValidationError);
  CHECK_THROWS_AS(ForwardSpec(mesh, 1.0, 0.999, f), ValidationError);
  const auto other = build_mesh(mgip::testing::interval(), 0.1);
  CHECK_THROWS_AS(ForwardSpec(mesh, 1.0, 1.0, Field::constant(other, 1.0)), ValidationError);
}

TEST_CASE("constants are eigenfunctions: f = 1 gives p = kappa^(-2 beta)") {
  const auto mesh = build_mesh(mgip::testing::star3(), 0.1);
  const Field u = random_u(mesh, 1);
  for (double beta : {1.0, 1.3, 2.0}) {
    for (double kappa : {0.5, 1.0, 2.0}) {
      const ForwardSpec spec(mesh, kappa, beta, Field::constant(mesh, 1.0, FieldRole::Source));
      const Field p = forward_map(spec, u);
      CHECK((p.values.array() - std::pow(kappa, -2 * beta)).abs().maxCoeff() < 1e-9 * std::pow(kappa, -2 * beta));
    }
  }
}

TEST_CASE("forward map is linear in the source") {
  const auto mesh = build_mesh(mgip::testing::star3(), 0.1);
  const Field u = random_u(mesh, 2);
  const Field f1 = source_z1sq_minus_z2sq(mesh);
  const Field f2 = interpolate(mesh, [](double z1, double) { return std::sin(z1); });
  for (double beta : {1.0, 1.5}) {
    const Field p1 = forward_map(ForwardSpec(mesh, 1.0, beta, f1), u);
    const Field p2 = forward_map(ForwardSpec(mesh, 1.0, beta, f2), u);
    const Field p12 = forward_map(ForwardSpec(mesh, 1.0, beta, Field(mesh, 2.0 * f1.values - 3.0 * f2.values)), u);
    CHECK((p12.values - (2.0 * p1.values - 3.0 * p2.values)).norm() < 1e-10 * p12.values.norm());
  }
}

TEST_CASE("beta = 2 forward map equals two elliptic solves") {
  const auto mesh = build_mesh(mgip::testing::star3(), 0.1);
  const Field u = random_u(mesh, 3);
  const Field f = source_z1sq_minus_z2sq(mesh);
  const Field p1 = forward_map(ForwardSpec(mesh, 1.2, 1.0, f), u);
  const Field pp = forward_map(ForwardSpec(mesh, 1.2, 1.0, p1), u);
  const Field p2 = forward_map(ForwardSpec(mesh, 1.2, 2.0, f), u);
  CHECK((p2.values - pp.values).norm() < 1e-9 * pp.values.norm());
}

TEST_CASE("source z1^2 - z2^2 at the vertices") {
  const auto mesh = build_mesh(mgip::testing::star3(), 0.5);
  const Field f = source_z1sq_minus_z2sq(mesh);
  CHECK(f.values[0] == 0.0);                           // center
  CHECK(f.values[1] == doctest::Approx(1.0));          // (1, 0)
  CHECK(f.values[2] == doctest::Approx(0.25 - 0.75));  // 120 degrees
  CHECK(f.role == FieldRole::Source);
}

TEST_CASE("point evaluation interpolates within the element") {
  const auto mesh = build_mesh(mgip::testing::interval(), 0.25);
  // p(t) = 1 + 2t is represented exactly.
  Eigen::VectorXd v(5);
  const auto& dofs = mesh->edge_dofs(0);
  for (std::size_t k = 0; k < dofs.size(); ++k) v[static_cast<Eigen::Index>(dofs[k])] = 1.0 + 2.0 * 0.25 * static_cast<double>(k);
  const Field p(mesh, v);
  const std::vector<Functional> fs = {PointEval{{0, 0.375}}, PointEval{{0, 0.0}}, PointEval{{0, 1.0}},
                                      PointEval{{0, 0.25}}, PointEval{{0, 0.8}}};
  const Eigen::VectorXd got = observe(p, fs);
  CHECK(got[0] == doctest::Approx(1.75));
  CHECK(got[1] == doctest::Approx(1.0));
  CHECK(got[2] == doctest::Approx(3.0));
  CHECK(got[3] == doctest::Approx(1.5));
  CHECK(got[4] == doctest::Approx(2.6));
  const SparseMatrix q = observation_matrix(*mesh, fs);
  CHECK(q.row(0).sum() == doctest::Approx(1.0));
  CHECK(Eigen::RowVectorXd(q.row(1)).count() == 1);
}

TEST_CASE("vertex evaluation does not depend on the edge used to reach it") {
  const auto mesh = build_mesh(mgip::testing::star3(), 0.1);
  const Field p = random_u(mesh, 4);
  const std::vector<Functional> fs = {PointEval{{0, 0.0}}, PointEval{{1, 0.0}}, PointEval{{2, 0.0}}};
  const Eigen::VectorXd got = observe(p, fs);
  CHECK(got[0] == got[1]);
  CHECK(got[1] == got[2]);
  CHECK(got[0] == p.values[0]);
}

TEST_CASE("weight functionals: mass-weighted ones integrate") {
  const auto mesh = build_mesh(mgip::testing::star3(), 0.1);
  const SparseMatrix m = assemble_mass(*mesh);
  const Eigen::VectorXd w = m * Eigen::VectorXd::Ones(static_cast<Eigen::Index>(mesh->n_dof()));
  const Field p = interpolate(mesh, [](double z1, double) { return 3.0 + 0.0 * z1; });
  const std::vector<Functional> fs = {WeightVector{w}, PointEval{{1, 0.5}}};
  const Eigen::VectorXd got = observe(p, fs);
  CHECK(got[0] == doctest::Approx(9.0));  // 3 times total length 3
  CHECK(got[1] == doctest::Approx(3.0));
  CHECK_THROWS_AS(observation_matrix(*mesh, {WeightVector{Eigen::VectorXd::Ones(3)}}), ValidationError);
  CHECK_THROWS_AS(observation_matrix(*mesh, {PointEval{{0, 1.5}}}), ValidationError);
}

TEST_CASE("potential") {
  Eigen::VectorXd g(2), y(2), s(2);
  g << 1.0, 2.0;
  y << 0.0, 0.0;
  s << 1.0, 4.0;
  CHECK(potential(g, y, s) == doctest::Approx(1.0));
  CHECK(potential(y, y, s) == 0.0);
  CHECK_THROWS_AS(potential(g, Eigen::VectorXd::Zero(3), s), ValidationError);
  s[1] = 0.0;
  CHECK_THROWS_AS(potential(g, y, s), ValidationError);
}

TEST_CASE("synthetic data: noise scale and standardized residuals") {
  const auto mesh = build_mesh(load_graph(mgip::testing::data_dir() / "letter_a.json"), 0.05);
  const PriorSpec prior(mesh, PriorSpec::preset_kappa0(), PriorSpec::kPresetA, 1.0);
  const ForwardSpec spec(mesh, 1.0, 1.0, source_z1sq_minus_z2sq(mesh));
  const Field u0 = sample_prior(prior, std::uint64_t{1});
  const Field p0 = forward_map(spec, u0);

  SUBCASE("absolute noise only") {
    const ObservationSet obs = make_synthetic(spec, u0, NoiseModel{0.0, 0.1}, std::nullopt, 2);
    CHECK(obs.size() == mesh->n_dof());
    CHECK((obs.sigma2.array() - 0.01).abs().maxCoeff() < 1e-15);
  }
  SUBCASE("mixed noise: sigma = n_rel |p0| + n_abs, residuals standardize to N(0, 1)") {
    double sum = 0.0, sq = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const ObservationSet obs = make_synthetic(spec, u0, NoiseModel{}, std::nullopt, seed);
      const Eigen::VectorXd clean = observe(p0, obs);
      for (Eigen::Index i = 0; i < clean.size(); ++i) {
        const double sigma = 0.05 * std::abs(clean[i]) + 0.10;
        CHECK(obs.sigma2[i] == doctest::Approx(sigma * sigma).epsilon(1e-12));
        const double z = (obs.y[i] - clean[i]) / sigma;
        sum += z;
        sq += z * z;
        ++count;
      }
    }
    const double mean = sum / static_cast<double>(count);
    const double sd = std::sqrt(sq / static_cast<double>(count) - mean * mean);
    CHECK(std::abs(mean) < 0.05);
    CHECK(sd == doctest::Approx(1.0).epsilon(0.05));
  }
  SUBCASE("same seed, same data") {
    const auto a = make_synthetic(spec, u0, NoiseModel{}, std::nullopt, 9);
    const auto b = make_synthetic(spec, u0, NoiseModel{}, std::nullopt, 9);
    CHECK(a.y == b.y);
  }
  CHECK_THROWS_AS(make_synthetic(spec, u0, NoiseModel{0.0, 0.0}, std::nullopt, 1), ValidationError);
  CHECK_THROWS_AS(make_synthetic(spec, u0, NoiseModel{-0.1, 0.1}, std::nullopt, 1), ValidationError);
  CHECK_THROWS_AS(make_synthetic(spec, u0, NoiseModel{}, std::vector<GraphPoint>{}, 1), ValidationError);
}

TEST_CASE("observation set validation") {
  const auto mesh = build_mesh(mgip::testing::interval(), 0.25);
  ObservationSet obs;
  obs.functionals = {PointEval{{0, 0.5}}};
  obs.y = Eigen::VectorXd::Zero(1);
  obs.sigma2 = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(obs.validate(*mesh), ValidationError);
  obs.sigma2 = Eigen::VectorXd::Zero(1);
  CHECK_THROWS_AS(obs.validate(*mesh), ValidationError);
  obs.sigma2 = Eigen::VectorXd::Ones(1);
  CHECK_NOTHROW(obs.validate(*mesh));
  obs.functionals = {PointEval{{2, 0.5}}};
  CHECK_THROWS_AS(obs.validate(*mesh), ValidationError);
}

TEST_CASE("ForwardModel potential: consistency, permutation invariance, solve count") {
  const auto mesh = build_mesh(mgip::testing::star3(), 0.1);
  const ForwardSpec spec(mesh, 1.0, 1.0, source_z1sq_minus_z2sq(mesh));
  const Field u0 = random_u(mesh, 5, 0.5);
  const std::vector<GraphPoint> pts = {{0, 0.2}, {1, 0.55}, {2, 1.0}, {0, 0.0}, {1, 0.9}};
  const ObservationSet obs = make_synthetic(spec, u0, NoiseModel{}, pts, 6);
  const ForwardModel model(spec, obs);
  const Field u = random_u(mesh, 7, 0.5);

  const Eigen::VectorXd direct = observe(forward_map(spec, u), obs);
  CHECK((model.predict(u) - direct).norm() < 1e-12 * direct.norm());
  CHECK(model.potential(u) == doctest::Approx(potential(direct, obs.y, obs.sigma2)).epsilon(1e-12));

  // Reorder the observations.
  std::vector<std::size_t> perm = {3, 0, 4, 2, 1};
  ObservationSet shuffled;
  shuffled.y.resize(5);
  shuffled.sigma2.resize(5);
  for (std::size_t j = 0; j < perm.size(); ++j) {
    shuffled.functionals.push_back(obs.functionals[perm[j]]);
    shuffled.y[static_cast<Eigen::Index>(j)] = obs.y[static_cast<Eigen::Index>(perm[j])];
    shuffled.sigma2[static_cast<Eigen::Index>(j)] = obs.sigma2[static_cast<Eigen::Index>(perm[j])];
  }
  const ForwardModel shuffled_model(spec, shuffled);
  CHECK(shuffled_model.potential(u) == doctest::Approx(model.potential(u)).epsilon(1e-12));

  const auto before = model.solve_count();
  model.potential(u);
  model.potential_for(u, obs.y);
  CHECK(model.solve_count() == before + 2);

  const ForwardModel empty(spec, ObservationSet{});
  CHECK(empty.potential(u) == 0.0);
  CHECK(empty.solve_count() == 0);
}

TEST_CASE("potential is locally Lipschitz in u") {
  const auto mesh = build_mesh(mgip::testing::star3(), 0.1);
  const ForwardSpec spec(mesh, 1.0, 1.0, source_z1sq_minus_z2sq(mesh));
  const Field u0 = random_u(mesh, 8, 0.5);
  const ForwardModel model(spec, make_synthetic(spec, u0, NoiseModel{}, std::nullopt, 1));
  const Field d = random_u(mesh, 9, 1.0);
  const Eigen::VectorXd dir = d.values / d.values.lpNorm<Eigen::Infinity>();
  const double phi0 = model.potential(u0);
  std::vector<double> quotients;
  for (double eps : {1e-2, 1e-3, 1e-4, 1e-5})
    quotients.push_back(std::abs(model.potential(Field(mesh, u0.values + eps * dir)) - phi0) / eps);
  CHECK(quotients[3] == doctest::Approx(quotients[2]).epsilon(0.02));
  CHECK(*std::max_element(quotients.begin(), quotients.end()) < 2.0 * quotients[3] + 1.0);
}
