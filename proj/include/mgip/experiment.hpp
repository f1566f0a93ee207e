#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mgip/forward.hpp"
#include "mgip/sampler.hpp"

namespace mgip {

/// Everything needed to reproduce one experiment. Relative paths in a config
/// file are resolved against the file's directory.
struct ExperimentConfig {
  std::filesystem::path graph;
  double h = 0.05;

  double kappa = 1.0;
  double beta = 1.0;
  std::string source = "z1sq_minus_z2sq";
  std::optional<std::filesystem::path> source_file;

  double kappa0 = 0.0;  // 0 selects the letter-graph value sqrt(0.2) * 2 / 3
  double a = 0.2;
  double alpha = 1.0;

  NoiseModel noise;
  std::uint64_t noise_seed = 2;

  ChainConfig chain;

  std::uint64_t truth_seed = 1;
  std::optional<std::filesystem::path> truth_file;

  std::filesystem::path output = "out";

  double hellinger_delta = 0.1;
  std::size_t hellinger_samples = 100000;
  std::size_t hellinger_steps = 3;
  std::uint64_t hellinger_seed = 4;
  /// Observation locations as (edge id, t); empty means every mesh DOF.
  std::vector<std::pair<std::string, double>> observation_points;

  std::size_t replicates = 1;

  /// Range checks that need no computation (alpha > 3/4, beta >= 1, ...).
  void validate() const;
  double resolved_kappa0() const;
};

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);
/// JSON document with absolute paths that parse_config reads back unchanged.
std::string config_to_json(const ExperimentConfig& cfg);

/// Derives truth, noise, chain and Hellinger seeds from one value.
void apply_seed_override(ExperimentConfig& cfg, std::uint64_t seed);

struct RunReport {
  std::filesystem::path output;
  std::size_t n_dof = 0;
  double rmse_mean_u = 0.0;
  double rmse_map_u = 0.0;
  double rmse_mean_p = 0.0;
  double rmse_map_p = 0.0;
  double mean_prior_std = 0.0;
  double stable_acceptance = 0.0;
  double spearman_std_error = 0.0;  // rank correlation of posterior std and |u0 - mean|
  std::vector<std::string> warnings;
};

/// Full pipeline: mesh, ground truth, synthetic data, chain, summaries and
/// CSV/manifest output. Progress and warnings go to `log`.
RunReport cmd_run(const ExperimentConfig& cfg, std::ostream& log);

struct CheckOutcome {
  std::string name;
  bool passed;
  std::string detail;
};

/// Fast numerical diagnostics on the configured graph; one line per check.
std::vector<CheckOutcome> cmd_check(const ExperimentConfig& cfg, std::ostream& out);

struct HellingerRow {
  double delta;
  double distance;
  double ratio;  // distance / |delta|
};

/// Hellinger distance between posteriors for y and y + delta d (unit d) over
/// a geometric sweep delta, delta/2, ... Refuses meshes above 200 DOFs.
std::vector<HellingerRow> cmd_hellinger(const ExperimentConfig& cfg, double delta, std::size_t n_samples,
                                        std::ostream& out);

inline constexpr std::size_t kHellingerMaxDof = 200;

double spearman(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace mgip
