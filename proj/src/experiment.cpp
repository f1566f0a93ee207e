#include "mgip/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "mgip/error.hpp"
#include "mgip/io.hpp"

namespace mgip {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <class T>
void read_if(const json& obj, const char* key, T& out) {
  if (!obj.is_object() || !obj.contains(key) || obj[key].is_null()) return;
  try {
    out = obj[key].get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("config key '") + key + "' has the wrong type");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::string id_of(const json& node) {
  if (node.is_string()) return node.get<std::string>();
  if (node.is_number_integer()) return std::to_string(node.get<long long>());
  throw ValidationError("observation edge must be a string or integer id");
}

/// Runs one pipeline stage, prefixing any error with the stage name.
template <class F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ValidationError& err) {
    throw ValidationError(std::string(name) + ": " + err.what());
  } catch (const NumericalError& err) {
    throw NumericalError(std::string(name) + ": " + err.what());
  }
}

double rmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

std::string timestamp_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

Field make_source(const ExperimentConfig& cfg, const MeshPtr& mesh) {
  if (cfg.source_file) return read_field_csv(*cfg.source_file, mesh, FieldRole::Source);
  if (cfg.source == "z1sq_minus_z2sq") return source_z1sq_minus_z2sq(mesh);
  if (cfg.source == "one") return Field::constant(mesh, 1.0, FieldRole::Source);
  throw ValidationError("unknown builtin source '" + cfg.source + "'");
}

std::optional<std::vector<GraphPoint>> observation_points(const ExperimentConfig& cfg, const Mesh& mesh) {
  if (cfg.observation_points.empty()) return std::nullopt;
  std::vector<GraphPoint> pts;
  for (const auto& [edge, t] : cfg.observation_points) pts.push_back(GraphPoint{mesh.graph().edge_index(edge), t});
  return pts;
}

/// Shared setup of the inverse problem described by a config.
struct Problem {
  MeshPtr mesh;
  PriorSpec prior;
  ForwardSpec forward;
  Field truth_u;
  Field truth_p;
  ObservationSet obs;
};

Problem build_problem(const ExperimentConfig& cfg) {
  MeshPtr mesh = stage("mesh", [&] { return build_mesh(load_graph(cfg.graph), cfg.h); });
  PriorSpec prior = stage("prior", [&] { return PriorSpec(mesh, cfg.resolved_kappa0(), cfg.a, cfg.alpha); });
  ForwardSpec fwd = stage("forward", [&] { return ForwardSpec(mesh, cfg.kappa, cfg.beta, make_source(cfg, mesh)); });
  Field u0 = stage("truth", [&] {
    if (cfg.truth_file) return read_field_csv(*cfg.truth_file, mesh, FieldRole::Parameter);
    return sample_prior(prior, cfg.truth_seed);
  });
  Field p0 = stage("truth solve", [&] { return forward_map(fwd, u0); });
  ObservationSet obs = stage("synthetic data", [&] {
    return make_synthetic(fwd, u0, cfg.noise, observation_points(cfg, *mesh), cfg.noise_seed);
  });
  return Problem{mesh, std::move(prior), std::move(fwd), std::move(u0), std::move(p0), std::move(obs)};
}

}  // namespace

void ExperimentConfig::validate() const {
  if (graph.empty()) throw ValidationError("config: graph file is required");
  if (!fs::exists(graph)) throw ValidationError("config: graph file " + graph.string() + " does not exist");
  if (!(h > 0.0)) throw ValidationError("config: mesh h must be positive");
  if (!(kappa > 0.0)) throw ValidationError("config: forward kappa must be positive");
  if (!(beta >= 1.0)) throw ValidationError("config: forward beta must satisfy beta >= 1");
  if (!(kappa0 >= 0.0)) throw ValidationError("config: prior kappa0 must be positive");
  if (!(a > 0.0)) throw ValidationError("config: prior a must be positive");
  if (!(alpha > 0.75)) throw ValidationError("config: prior alpha must satisfy alpha > 3/4");
  if (!(noise.n_rel >= 0.0) || !(noise.n_abs >= 0.0) || !(noise.n_rel + noise.n_abs > 0.0))
    throw ValidationError("config: noise needs n_rel, n_abs >= 0 with n_rel + n_abs > 0");
  if (source_file && !fs::exists(*source_file))
    throw ValidationError("config: source file " + source_file->string() + " does not exist");
  if (truth_file && !fs::exists(*truth_file))
    throw ValidationError("config: truth file " + truth_file->string() + " does not exist");
  if (replicates == 0) throw ValidationError("config: replicates must be positive");
  chain.validate();
}

double ExperimentConfig::resolved_kappa0() const { return kappa0 > 0.0 ? kappa0 : PriorSpec::preset_kappa0(); }

ExperimentConfig parse_config(std::string_view text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ValidationError(std::string("config parse error: ") + err.what());
  }
  if (doc.is_object() && doc.contains("config")) doc = doc["config"];  // a run manifest
  if (!doc.is_object()) throw ValidationError("config must be a JSON object");

  ExperimentConfig cfg;
  std::string path;
  read_if(doc, "graph", path);
  if (!path.empty()) cfg.graph = resolve(base_dir, path);
  if (doc.contains("mesh")) read_if(doc["mesh"], "h", cfg.h);

  if (doc.contains("forward")) {
    const auto& f = doc["forward"];
    read_if(f, "kappa", cfg.kappa);
    read_if(f, "beta", cfg.beta);
    if (f.contains("source")) {
      const auto& s = f["source"];
      if (s.is_string()) {
        cfg.source = s.get<std::string>();
      } else if (s.is_object() && s.contains("file")) {
        cfg.source_file = resolve(base_dir, s["file"].get<std::string>());
      } else {
        throw ValidationError("config: forward.source must be a builtin name or {\"file\": path}");
      }
    }
  }
  if (doc.contains("prior")) {
    read_if(doc["prior"], "kappa0", cfg.kappa0);
    read_if(doc["prior"], "a", cfg.a);
    read_if(doc["prior"], "alpha", cfg.alpha);
  }
  if (doc.contains("noise")) {
    read_if(doc["noise"], "n_rel", cfg.noise.n_rel);
    read_if(doc["noise"], "n_abs", cfg.noise.n_abs);
    read_if(doc["noise"], "seed", cfg.noise_seed);
  }
  if (doc.contains("chain")) {
    const auto& c = doc["chain"];
    read_if(c, "tau", cfg.chain.tau);
    read_if(c, "tau_min", cfg.chain.tau_min);
    read_if(c, "T0", cfg.chain.T0);
    read_if(c, "zeta", cfg.chain.zeta);
    read_if(c, "N", cfg.chain.N);
    read_if(c, "N_adapt", cfg.chain.N_adapt);
    read_if(c, "r_target", cfg.chain.r_target);
    read_if(c, "burn_in", cfg.chain.burn_in);
    read_if(c, "thin", cfg.chain.thin);
    read_if(c, "seed", cfg.chain.seed);
  }
  if (doc.contains("truth")) {
    const auto& t = doc["truth"];
    read_if(t, "seed", cfg.truth_seed);
    if (t.contains("file")) cfg.truth_file = resolve(base_dir, t["file"].get<std::string>());
  }
  if (doc.contains("observations")) {
    const auto& o = doc["observations"];
    if (!o.is_array()) throw ValidationError("config: observations must be a list of {edge, t}");
    for (const auto& pt : o) {
      if (!pt.contains("edge") || !pt.contains("t")) throw ValidationError("config: observation needs edge and t");
      cfg.observation_points.emplace_back(id_of(pt["edge"]), pt["t"].get<double>());
    }
  }
  if (doc.contains("hellinger")) {
    const auto& hl = doc["hellinger"];
    read_if(hl, "delta", cfg.hellinger_delta);
    read_if(hl, "n_samples", cfg.hellinger_samples);
    read_if(hl, "steps", cfg.hellinger_steps);
    read_if(hl, "seed", cfg.hellinger_seed);
  }
  std::string output;
  read_if(doc, "output", output);
  if (!output.empty()) cfg.output = resolve(base_dir, output);
  read_if(doc, "replicates", cfg.replicates);

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), fs::absolute(path).parent_path());
}

namespace {

json config_json(const ExperimentConfig& cfg) {
  json doc;
  doc["graph"] = fs::absolute(cfg.graph).string();
  doc["mesh"] = {{"h", cfg.h}};
  doc["forward"] = {{"kappa", cfg.kappa}, {"beta", cfg.beta}};
  if (cfg.source_file)
    doc["forward"]["source"] = {{"file", fs::absolute(*cfg.source_file).string()}};
  else
    doc["forward"]["source"] = cfg.source;
  doc["prior"] = {{"kappa0", cfg.resolved_kappa0()}, {"a", cfg.a}, {"alpha", cfg.alpha}};
  doc["noise"] = {{"n_rel", cfg.noise.n_rel}, {"n_abs", cfg.noise.n_abs}, {"seed", cfg.noise_seed}};
  const auto& c = cfg.chain;
  doc["chain"] = {{"tau", c.tau},         {"tau_min", c.tau_min}, {"T0", c.T0},
                  {"zeta", c.zeta},       {"N", c.N},             {"N_adapt", c.N_adapt},
                  {"r_target", c.r_target}, {"burn_in", c.burn_in}, {"thin", c.thin},
                  {"seed", c.seed}};
  doc["truth"] = json::object();
  if (cfg.truth_file)
    doc["truth"]["file"] = fs::absolute(*cfg.truth_file).string();
  else
    doc["truth"]["seed"] = cfg.truth_seed;
  if (!cfg.observation_points.empty()) {
    doc["observations"] = json::array();
    for (const auto& [edge, t] : cfg.observation_points) doc["observations"].push_back({{"edge", edge}, {"t", t}});
  }
  doc["hellinger"] = {{"delta", cfg.hellinger_delta},
                      {"n_samples", cfg.hellinger_samples},
                      {"steps", cfg.hellinger_steps},
                      {"seed", cfg.hellinger_seed}};
  doc["output"] = fs::absolute(cfg.output).string();
  doc["replicates"] = cfg.replicates;
  return doc;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(2); }

void apply_seed_override(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.truth_seed = seed;
  cfg.noise_seed = seed + 1;
  cfg.chain.seed = seed + 2;
  cfg.hellinger_seed = seed + 3;
}

double spearman(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() < 2) throw ValidationError("spearman: need two equal-length vectors");
  auto ranks = [](const Eigen::VectorXd& v) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(v.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return v[i] < v[j]; });
    Eigen::VectorXd r(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const Eigen::VectorXd ra = ranks(a);
  const Eigen::VectorXd rb = ranks(b);
  const Eigen::VectorXd ca = ra.array() - ra.mean();
  const Eigen::VectorXd cb = rb.array() - rb.mean();
  const double denom = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
  return denom > 0.0 ? ca.dot(cb) / denom : 0.0;
}

namespace {

struct ChainOutputs {
  ChainResult chain;
  RunReport report;
};

ChainOutputs run_one_chain(const Problem& problem, const ChainConfig& chain_cfg, const fs::path& dir,
                           double mean_prior_std) {
  fs::create_directories(dir);
  ChainResult chain =
      stage("chain", [&] { return run_chain(chain_cfg, problem.prior, problem.forward, problem.obs); });
  const PosteriorSummary summary = stage("summaries", [&] { return posterior_summaries(chain, problem.prior); });
  const Field mean_p = stage("posterior-mean solve", [&] { return forward_map(problem.forward, summary.mean); });
  const Field map_p = stage("MAP solve", [&] { return forward_map(problem.forward, summary.map); });
  const Field diff(problem.mesh, (problem.truth_u.values - summary.mean.values).cwiseAbs(), FieldRole::Generic);

  stage("write outputs", [&] {
    write_trace_csv(dir / "chain_trace.csv", chain);
    write_field_csv(dir / "post_mean_u.csv", summary.mean);
    write_field_csv(dir / "post_std_u.csv", summary.std);
    write_field_csv(dir / "map_u.csv", summary.map);
    write_field_csv(dir / "post_mean_p.csv", mean_p);
    write_field_csv(dir / "map_p.csv", map_p);
    write_field_csv(dir / "diff_u.csv", diff);
    return 0;
  });

  RunReport report;
  report.output = dir;
  report.n_dof = problem.mesh->n_dof();
  report.rmse_mean_u = rmse(summary.mean.values, problem.truth_u.values);
  report.rmse_map_u = rmse(summary.map.values, problem.truth_u.values);
  report.rmse_mean_p = rmse(mean_p.values, problem.truth_p.values);
  report.rmse_map_p = rmse(map_p.values, problem.truth_p.values);
  report.mean_prior_std = mean_prior_std;
  report.stable_acceptance = chain.stable_acceptance();
  report.spearman_std_error = spearman(summary.std.values, diff.values);
  report.warnings = chain.warnings;
  return ChainOutputs{std::move(chain), std::move(report)};
}

json report_json(const RunReport& r, const ChainResult& chain) {
  return {{"n_dof", r.n_dof},
          {"rmse_post_mean_u", r.rmse_mean_u},
          {"rmse_map_u", r.rmse_map_u},
          {"rmse_post_mean_p", r.rmse_mean_p},
          {"rmse_map_p", r.rmse_map_p},
          {"mean_prior_marginal_std", r.mean_prior_std},
          {"stable_acceptance_rate", r.stable_acceptance},
          {"spearman_std_vs_abs_error", r.spearman_std_error},
          {"retained_samples", chain.samples.size()},
          {"potential_evaluations", chain.potential_evaluations},
          {"final_tau", chain.tau.empty() ? 0.0 : chain.tau.back()},
          {"warnings", r.warnings}};
}

}  // namespace

RunReport cmd_run(const ExperimentConfig& cfg, std::ostream& log) {
  const auto started = std::chrono::steady_clock::now();
  cfg.validate();
  log << "building problem from " << cfg.graph.string() << " (h=" << cfg.h << ", beta=" << cfg.beta << ")\n";
  const Problem problem = build_problem(cfg);
  log << "mesh: " << problem.mesh->n_dof() << " DOFs, " << problem.mesh->elements().size() << " elements; "
      << problem.obs.size() << " observations\n";

  const Field prior_var = stage("prior covariance", [&] { return covariance_diag(problem.prior); });
  const double mean_prior_std = prior_var.values.cwiseSqrt().mean();

  fs::create_directories(cfg.output);
  stage("write outputs", [&] {
    write_field_csv(cfg.output / "truth_u.csv", problem.truth_u);
    write_field_csv(cfg.output / "truth_p.csv", problem.truth_p);
    write_observations_csv(cfg.output / "observations.csv", *problem.mesh, problem.obs);
    return 0;
  });

  std::vector<ChainOutputs> runs(cfg.replicates);
  if (cfg.replicates == 1) {
    runs[0] = run_one_chain(problem, cfg.chain, cfg.output, mean_prior_std);
  } else {
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(cfg.replicates);
    for (std::size_t r = 0; r < cfg.replicates; ++r) {
      workers.emplace_back([&, r] {
        try {
          ChainConfig c = cfg.chain;
          c.seed = cfg.chain.seed + r;
          runs[r] = run_one_chain(problem, c, cfg.output / ("replicate_" + std::to_string(r)), mean_prior_std);
        } catch (...) {
          errors[r] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  for (const auto& w : runs.front().report.warnings) log << "warning: " << w << '\n';

  json manifest;
  manifest["config"] = config_json(cfg);
  manifest["seeds"] = {{"truth", cfg.truth_seed}, {"noise", cfg.noise_seed}, {"chain", cfg.chain.seed}};
  if (cfg.replicates == 1) {
    manifest["results"] = report_json(runs[0].report, runs[0].chain);
  } else {
    manifest["results"] = json::array();
    for (const auto& r : runs) manifest["results"].push_back(report_json(r.report, r.chain));
  }
  manifest["reference"] = {{"fractional_rmse_reported_below", 0.08},
                           {"elliptic_stable_acceptance_reported", {0.38, 0.42}}};
  manifest["timestamp"] = timestamp_now();
  manifest["elapsed_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  {
    std::ofstream out(cfg.output / "manifest.json");
    if (!out) throw NumericalError("write outputs: cannot write manifest");
    out << manifest.dump(2) << '\n';
  }

  const RunReport& rep = runs.front().report;
  log << "posterior-mean RMSE(u) = " << rep.rmse_mean_u << " (mean prior std " << rep.mean_prior_std
      << "), stable acceptance = " << rep.stable_acceptance << ", spearman(std, |err|) = " << rep.spearman_std_error
      << '\n';
  return rep;
}

std::vector<CheckOutcome> cmd_check(const ExperimentConfig& cfg, std::ostream& out) {
  cfg.validate();
  const MeshPtr mesh = stage("mesh", [&] { return build_mesh(load_graph(cfg.graph), cfg.h); });
  const PriorSpec prior = stage("prior", [&] { return PriorSpec(mesh, cfg.resolved_kappa0(), cfg.a, cfg.alpha); });
  const Field f = stage("forward", [&] { return make_source(cfg, mesh); });
  const Field u = stage("truth", [&] {
    if (cfg.truth_file) return read_field_csv(*cfg.truth_file, mesh, FieldRole::Parameter);
    return sample_prior(prior, cfg.truth_seed);
  });
  const std::size_t n = mesh->n_dof();

  std::vector<CheckOutcome> results;
  auto report = [&](std::string name, bool ok, std::string detail) {
    out << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    results.push_back(CheckOutcome{std::move(name), ok, std::move(detail)});
  };
  auto fmt = [](double v) {
    std::ostringstream s;
    s.precision(3);
    s << std::scientific << v;
    return s.str();
  };

  {
    std::size_t interior = 0;
    double worst = 0.0;
    for (std::size_t e = 0; e < mesh->graph().num_edges(); ++e) {
      interior += mesh->num_edge_elements(e) - 1;
      const double len = mesh->graph().edges()[e].length;
      double sum = 0.0;
      for (std::size_t k = 0; k < mesh->num_edge_elements(e); ++k) sum += mesh->elements()[mesh->first_element(e) + k].width;
      worst = std::max(worst, std::abs(sum - len) / len);
    }
    const bool ok = n == interior + mesh->graph().num_vertices() && worst <= 1e-12;
    report("mesh", ok, std::to_string(n) + " DOFs, width-sum error " + fmt(worst));
  }

  const OperatorPair op = assemble_stiffness(mesh, u, cfg.kappa);
  {
    const double total = Eigen::VectorXd(op.mass * Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n))).sum();
    const double len = mesh->graph().total_length();
    const SparseMatrix pure = op.stiffness - (cfg.kappa * cfg.kappa) * op.mass;
    const double rows = (pure * Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n))).lpNorm<Eigen::Infinity>();
    const double scale = std::max(1.0, Eigen::MatrixXd(pure).cwiseAbs().maxCoeff());
    report("mass total and stiffness kernel", std::abs(total - len) <= 1e-12 * len && rows <= 1e-10 * scale,
           "sum(M) - length = " + fmt(total - len) + ", max row sum of K - kappa^2 M = " + fmt(rows));
  }

  const Field p = solve_elliptic(op, f);
  {
    const double lhs = p.values.dot(op.stiffness * p.values);
    const double rhs = p.values.dot(op.mass * f.values);
    const double rel = std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300);
    report("energy identity", rel <= 1e-9, "|p'Kp - p'Mf| / |p'Kp| = " + fmt(rel));
  }

  constexpr std::size_t kDenseCap = 2500;
  if (n > kDenseCap) {
    report("spectral checks", true, "skipped: " + std::to_string(n) + " DOFs exceed the dense cap");
  } else {
    const EigenBasis basis = eigendecompose(op);
    const double k2 = cfg.kappa * cfg.kappa;
    report("lambda_1 = kappa^2", std::abs(basis.eigenvalues[0] - k2) <= 1e-9 * k2,
           "lambda_1 = " + fmt(basis.eigenvalues[0]));

    const double mnorm_p = std::sqrt(p.values.dot(op.mass * p.values));
    const Field p1 = solve_fractional(basis, f, 1.0);
    const Eigen::VectorXd d1 = p1.values - p.values;
    const double rel1 = std::sqrt(d1.dot(op.mass * d1)) / mnorm_p;
    report("fractional beta=1 vs elliptic", rel1 <= 1e-8, "M-norm relative difference " + fmt(rel1));

    const Field p2 = solve_fractional(basis, f, 2.0);
    const Field pp = solve_elliptic(op, Field(mesh, p.values, FieldRole::Source));
    const Eigen::VectorXd d2 = p2.values - pp.values;
    const double rel2 = std::sqrt(d2.dot(op.mass * d2)) / std::sqrt(pp.values.dot(op.mass * pp.values));
    report("fractional beta=2 vs double solve", rel2 <= 1e-8, "M-norm relative difference " + fmt(rel2));

    const Eigen::VectorXd lam0 = generalized_eigenvalues(assemble_stiffness(mesh, Field::constant(mesh, 0.0), cfg.kappa));
    const WeylBracket ref = weyl_ratio(lam0, 0.0);
    bool contained = std::isfinite(ref.lower) && ref.lower > 0.0 && ref.upper > 0.0;
    for (double c : {-1.0, -0.5, 0.5, 1.0}) {
      const WeylBracket b = weyl_ratio(generalized_eigenvalues(assemble_stiffness(mesh, Field::constant(mesh, c), cfg.kappa)), std::abs(c));
      contained = contained && b.lower >= ref.lower * (1.0 - 1e-10) && b.upper <= ref.upper * (1.0 + 1e-10);
    }
    const WeylBracket bu = weyl_ratio(basis, u);
    report("Weyl bracket", contained && std::isfinite(bu.lower) && bu.lower > 0.0 && bu.upper > 0.0,
           "u=0 bracket [" + fmt(ref.lower) + ", " + fmt(ref.upper) + "], sampled u [" + fmt(bu.lower) + ", " +
               fmt(bu.upper) + "]");

    write_eigenvalues_csv((fs::create_directories(cfg.output), cfg.output / "eigenvalues.csv"), basis.eigenvalues);
  }

  constexpr std::size_t kCovarianceCap = 600;
  if (n > kCovarianceCap || cfg.alpha != 1.0) {
    report("prior two-route covariance", true,
           cfg.alpha != 1.0 ? "skipped: direct route needs alpha = 1"
                            : "skipped: " + std::to_string(n) + " DOFs exceed the dense cap");
  } else {
    const Eigen::MatrixXd direct = covariance_dense(prior, SampleRoute::Direct);
    const Eigen::MatrixXd spectral = covariance_dense(prior, SampleRoute::Spectral);
    const double rel = (direct - spectral).norm() / direct.norm();
    const double diag = (covariance_diag(prior).values - direct.diagonal()).lpNorm<Eigen::Infinity>() /
                        direct.diagonal().lpNorm<Eigen::Infinity>();
    report("prior two-route covariance", rel <= 1e-8 && diag <= 1e-8,
           "Frobenius-relative difference " + fmt(rel) + ", diagonal difference " + fmt(diag));
  }
  return results;
}

std::vector<HellingerRow> cmd_hellinger(const ExperimentConfig& cfg, double delta, std::size_t n_samples,
                                        std::ostream& out) {
  cfg.validate();
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ValidationError("hellinger: delta must be nonnegative");
  {
    const MeshPtr mesh = stage("mesh", [&] { return build_mesh(load_graph(cfg.graph), cfg.h); });
    if (mesh->n_dof() > kHellingerMaxDof)
      throw ValidationError("hellinger: mesh has " + std::to_string(mesh->n_dof()) + " DOFs, the estimator is capped at " +
                            std::to_string(kHellingerMaxDof) + "; use a larger h or a smaller graph");
  }
  const Problem problem = build_problem(cfg);
  const ForwardModel model(problem.forward, problem.obs);
  const auto m = static_cast<Eigen::Index>(problem.obs.size());
  const Eigen::VectorXd direction = Eigen::VectorXd::Constant(m, 1.0 / std::sqrt(static_cast<double>(m)));

  std::vector<double> deltas;
  if (delta == 0.0) {
    deltas.push_back(0.0);
  } else {
    for (std::size_t i = 0; i < std::max<std::size_t>(1, cfg.hellinger_steps); ++i)
      deltas.push_back(delta / std::pow(2.0, static_cast<double>(i)));
  }
  std::vector<Eigen::VectorXd> perturbed;
  for (double d : deltas) perturbed.push_back(problem.obs.y + d * direction);

  const std::vector<double> dist =
      stage("hellinger", [&] { return hellinger_sweep(problem.prior, model, perturbed, n_samples, cfg.hellinger_seed); });
  std::vector<HellingerRow> rows;
  out << "delta,d_H,ratio\n";
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double ratio = deltas[i] > 0.0 ? dist[i] / deltas[i] : 0.0;
    rows.push_back(HellingerRow{deltas[i], dist[i], ratio});
    out << deltas[i] << ',' << dist[i] << ',' << ratio << '\n';
  }
  return rows;
}

}  // namespace mgip
