#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mgip/error.hpp"
#include "mgip/io.hpp"
#include "support.hpp"

using namespace mgip;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("field CSV round-trips bit-exactly") {
  const auto mesh = build_mesh(load_graph(mgip::testing::data_dir() / "letter_a.json"), 0.1);
  const PriorSpec prior(mesh, PriorSpec::preset_kappa0(), PriorSpec::kPresetA, 1.0);
  Field u = sample_prior(prior, std::uint64_t{3});
  u.values[0] = 1.0 / 3.0;
  u.values[1] = -5e-310;  // subnormal
  std::stringstream buf;
  write_field_csv(buf, u);
  const Field back = read_field_csv(buf, mesh, FieldRole::Parameter);
  CHECK(back.values == u.values);
  CHECK(back.role == FieldRole::Parameter);

  const auto dir = mgip::testing::scratch_dir("io_roundtrip");
  write_field_csv(dir / "u.csv", u);
  CHECK(read_field_csv(dir / "u.csv", mesh).values == u.values);
}

TEST_CASE("field CSV layout: one row per node per edge") {
  const auto mesh = build_mesh(mgip::testing::star3(), 0.5);
  std::stringstream buf;
  write_field_csv(buf, Field::constant(mesh, 2.0));
  std::string line;
  std::getline(buf, line);
  CHECK(line == "edge_id,t,z1,z2,value");
  std::getline(buf, line);
  CHECK(line == "ca,0,0,0,2");
  std::getline(buf, line);
  CHECK(line == "ca,0.5,0.5,0,2");
  int rows = 2;
  while (std::getline(buf, line)) ++rows;
  CHECK(rows == 9);  // 3 edges times 3 nodes; the center repeats
}

TEST_CASE("field CSV reader rejects malformed input") {
  const auto mesh = build_mesh(mgip::testing::interval(), 0.5);
  auto read = [&](const std::string& text) {
    std::stringstream ss(text);
    return read_field_csv(ss, mesh);
  };
  const std::string header = "edge_id,t,z1,z2,value\n";
  CHECK_NOTHROW(read(header + "e0,0,0,0,1\ne0,0.5,0.5,0,2\ne0,1,1,0,3\n"));
  CHECK(read(header + "e0,0,0,0,1\r\ne0,0.5,0.5,0,2\r\ne0,1,1,0,3\r\n").values[2] == 2.0);
  CHECK_THROWS_AS(read(""), ValidationError);
  CHECK_THROWS_AS(read("a,b,c\n"), ValidationError);
  CHECK_THROWS_AS(read(header + "e0,0,0,0,1\ne0,1,1,0,3\n"), ValidationError);                  // missing node
  CHECK_THROWS_AS(read(header + "e0,0,0,0,1\ne0,0.3,0,0,2\ne0,1,1,0,3\n"), ValidationError);     // not a node
  CHECK_THROWS_AS(read(header + "e0,0,0,0,x\ne0,0.5,0.5,0,2\ne0,1,1,0,3\n"), ValidationError);   // bad number
  CHECK_THROWS_AS(read(header + "zz,0,0,0,1\n"), ValidationError);                               // unknown edge
  CHECK_THROWS_AS(read(header + "e0,0,0,1\n"), ValidationError);                                 // short row
  CHECK_THROWS_AS(read_field_csv("/nonexistent/u.csv", mesh), ValidationError);
}

TEST_CASE("shared vertex values must agree across edges") {
  const auto mesh = build_mesh(mgip::testing::star3(), 1.0);
  const std::string header = "edge_id,t,z1,z2,value\n";
  std::stringstream ok(header + "ca,0,0,0,5\nca,1,1,0,1\ncb,0,0,0,5\ncb,1,0,0,2\ncd,0,0,0,5\ncd,1,0,0,3\n");
  CHECK(read_field_csv(ok, mesh).values[0] == 5.0);
  std::stringstream bad(header + "ca,0,0,0,5\nca,1,1,0,1\ncb,0,0,0,4\ncb,1,0,0,2\ncd,0,0,0,5\ncd,1,0,0,3\n");
  CHECK_THROWS_AS(read_field_csv(bad, mesh), ValidationError);
}

TEST_CASE("observations CSV round trip") {
  const auto mesh = build_mesh(mgip::testing::star3(), 0.1);
  const ForwardSpec fwd(mesh, 1.0, 1.0, source_z1sq_minus_z2sq(mesh));
  const ObservationSet obs =
      make_synthetic(fwd, Field::constant(mesh, 0.2), NoiseModel{}, std::vector<GraphPoint>{{0, 0.25}, {2, 1.0}}, 4);
  const auto dir = mgip::testing::scratch_dir("io_obs");
  write_observations_csv(dir / "obs.csv", *mesh, obs);
  const ObservationSet back = read_observations_csv(dir / "obs.csv", *mesh);
  REQUIRE(back.size() == 2);
  CHECK(back.y == obs.y);
  CHECK((back.sigma2 - obs.sigma2).lpNorm<Eigen::Infinity>() < 1e-15);
  CHECK(std::get<PointEval>(back.functionals[1]).point.edge == 2);
  CHECK(std::get<PointEval>(back.functionals[1]).point.t == 1.0);

  ObservationSet weights = obs;
  weights.functionals[0] = WeightVector{Eigen::VectorXd::Ones(static_cast<Eigen::Index>(mesh->n_dof()))};
  CHECK_THROWS_AS(write_observations_csv(dir / "w.csv", *mesh, weights), ValidationError);
}

TEST_CASE("trace and eigenvalue tables") {
  ChainResult r;
  r.accepted = {1, 0};
  r.tau = {0.3, 0.3};
  r.temperature = {5.0, 5.0};
  r.phi = {1.5, 1.5};
  r.prior_quad = {0.25, 0.25};
  const auto dir = mgip::testing::scratch_dir("io_tables");
  write_trace_csv(dir / "trace.csv", r);
  CHECK(slurp(dir / "trace.csv") == "n,accepted,tau,T,phi,prior_quad\n1,1,0.29999999999999999,5,1.5,0.25\n"
                                    "2,0,0.29999999999999999,5,1.5,0.25\n");
  Eigen::VectorXd lambda(3);
  lambda << 1.0, 8.0, 18.0;
  write_eigenvalues_csv(dir / "eig.csv", lambda);
  CHECK(slurp(dir / "eig.csv") == "j,lambda,weyl_ratio\n1,1,1\n2,8,2\n3,18,2\n");
}
