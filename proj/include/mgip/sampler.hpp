#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mgip/forward.hpp"
#include "mgip/prior.hpp"

namespace mgip {

/// Hyperparameters of adaptive pCN with temperature annealing. Defaults are
/// the letter-graph settings for the elliptic problem.
struct ChainConfig {
  double tau = 0.3;
  double tau_min = 0.01;
  double T0 = 5.0;
  double zeta = 0.95;
  std::size_t N = 100000;
  std::size_t N_adapt = 500;
  double r_target = 0.40;
  std::size_t burn_in = 7000;
  std::size_t thin = 1;
  std::uint64_t seed = 0;

  void validate() const;
  /// Smallest multiple of N_adapt after which T_n = 1.
  std::size_t annealing_length() const;
};

/// T_n = max(1, T0 zeta^floor(n / N_adapt)).
double temperature(const ChainConfig& cfg, std::size_t n);

using PotentialFn = std::function<double(const Field&)>;

struct StepResult {
  Field u;
  bool accepted;
  double phi;
};

/// One pCN move v = sqrt(1 - tau^2) u + tau xi, xi ~ prior, accepted with
/// probability min{1, exp((Phi(u) - Phi(v)) / T)}. Calls `phi` once, for v.
StepResult pcn_step(const Field& u, double tau, double T, const PriorSpec& prior, double phi_u,
                    const PotentialFn& phi, Rng& rng);

struct ChainResult {
  MeshPtr mesh;
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  std::vector<Eigen::VectorXd> samples;    // retained states, n > burn_in
  std::vector<std::size_t> sample_index;   // iteration n of each retained state
  std::vector<std::uint8_t> accepted;      // entry n-1 for iteration n
  std::vector<double> tau;                 // step size used at iteration n
  std::vector<double> temperature;
  std::vector<double> phi;                 // Phi of the state after iteration n
  std::vector<double> prior_quad;
  std::uint64_t potential_evaluations = 0; // including the initial state
  std::vector<std::string> warnings;

  std::size_t iterations() const { return accepted.size(); }
  /// Acceptance rate over iterations first..last (1-based, inclusive).
  double acceptance_rate(std::size_t first, std::size_t last) const;
  /// Acceptance rate after burn-in.
  double stable_acceptance() const;
};

ChainResult run_chain(const ChainConfig& cfg, const PriorSpec& prior, const PotentialFn& phi);
ChainResult run_chain(const ChainConfig& cfg, const PriorSpec& prior, const ForwardSpec& fwd,
                      const ObservationSet& obs);

struct PosteriorSummary {
  Field mean;
  Field std;
  Field map;
  double map_objective;  // Phi + prior quadratic at the MAP sample
};

/// Mean, marginal standard deviation and best-sample MAP over retained states.
PosteriorSummary posterior_summaries(const ChainResult& result, const PriorSpec& prior);

/// Prior Monte Carlo estimate of the Hellinger distance between the
/// posteriors for data y and y' (same functionals and Sigma). Throws
/// NumericalError when the importance weights degenerate.
double hellinger_estimate(const PriorSpec& prior, const ForwardSpec& fwd, const ObservationSet& obs_y,
                          const ObservationSet& obs_yprime, std::size_t n_samples, std::uint64_t seed);

/// Same estimator for several perturbed data vectors, sharing the prior draws.
std::vector<double> hellinger_sweep(const PriorSpec& prior, const ForwardModel& model,
                                    const std::vector<Eigen::VectorXd>& perturbed, std::size_t n_samples,
                                    std::uint64_t seed);

}  // namespace mgip
