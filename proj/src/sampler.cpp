#include "mgip/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mgip/error.hpp"

namespace mgip {

void ChainConfig::validate() const {
  if (!(tau_min > 0.0) || !(tau_min <= tau) || !(tau <= 1.0))
    throw ValidationError("chain: need 0 < tau_min <= tau <= 1");
  if (!(zeta > 0.0) || !(zeta <= 1.0)) throw ValidationError("chain: need 0 < zeta <= 1");
  if (!(T0 >= 1.0) || !std::isfinite(T0)) throw ValidationError("chain: need T0 >= 1");
  if (!(r_target > 0.0) || !(r_target < 1.0)) throw ValidationError("chain: need 0 < r_target < 1");
  if (N == 0) throw ValidationError("chain: N must be positive");
  if (N_adapt == 0) throw ValidationError("chain: N_adapt must be positive");
  if (burn_in >= N) throw ValidationError("chain: burn-in B must be smaller than N");
  if (thin == 0) throw ValidationError("chain: thin must be positive");
}

std::size_t ChainConfig::annealing_length() const {
  if (T0 <= 1.0) return 0;
  if (zeta >= 1.0) return std::numeric_limits<std::size_t>::max();
  const double blocks = std::ceil(std::log(1.0 / T0) / std::log(zeta));
  return N_adapt * static_cast<std::size_t>(blocks);
}

double temperature(const ChainConfig& cfg, std::size_t n) {
  const auto block = static_cast<double>(n / cfg.N_adapt);
  return std::max(1.0, cfg.T0 * std::pow(cfg.zeta, block));
}

StepResult pcn_step(const Field& u, double tau, double T, const PriorSpec& prior, double phi_u,
                    const PotentialFn& phi, Rng& rng) {
  const Field xi = sample_prior(prior, rng);
  Field v(u.mesh, std::sqrt(1.0 - tau * tau) * u.values + tau * xi.values, FieldRole::Parameter);
  const double phi_v = phi(v);
  if (!std::isfinite(phi_v)) return StepResult{u, false, phi_u};

  const double log_ratio = (phi_u - phi_v) / T;
  bool accept = log_ratio >= 0.0;
  if (!accept) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    accept = uniform(rng) < std::exp(log_ratio);
  }
  if (accept) return StepResult{std::move(v), true, phi_v};
  return StepResult{u, false, phi_u};
}

double ChainResult::acceptance_rate(std::size_t first, std::size_t last) const {
  if (first < 1 || last > accepted.size() || first > last) return 0.0;
  std::size_t hits = 0;
  for (std::size_t n = first; n <= last; ++n) hits += accepted[n - 1];
  return static_cast<double>(hits) / static_cast<double>(last - first + 1);
}

double ChainResult::stable_acceptance() const { return acceptance_rate(burn_in + 1, accepted.size()); }

ChainResult run_chain(const ChainConfig& cfg, const PriorSpec& prior, const PotentialFn& phi) {
  cfg.validate();
  ChainResult out;
  out.mesh = prior.mesh();
  out.burn_in = cfg.burn_in;
  out.thin = cfg.thin;
  if (cfg.burn_in < cfg.annealing_length()) {
    std::ostringstream msg;
    msg << "burn-in B=" << cfg.burn_in << " ends before annealing reaches T=1 at n=" << cfg.annealing_length();
    out.warnings.push_back(msg.str());
  }

  out.accepted.reserve(cfg.N);
  out.tau.reserve(cfg.N);
  out.temperature.reserve(cfg.N);
  out.phi.reserve(cfg.N);
  out.prior_quad.reserve(cfg.N);
  out.samples.reserve((cfg.N - cfg.burn_in) / cfg.thin + 1);

  Rng rng(cfg.seed);
  Field u = sample_prior(prior, rng);
  double phi_u = phi(u);
  std::uint64_t evaluations = 1;
  if (!std::isfinite(phi_u)) throw NumericalError("chain: potential of the initial state is not finite");
  double quad_u = prior_precision_quadratic(prior, u);

  double tau = cfg.tau;
  std::size_t window_hits = 0;
  for (std::size_t n = 1; n <= cfg.N; ++n) {
    const double T = temperature(cfg, n);
    StepResult step = [&] {
      try {
        return pcn_step(u, tau, T, prior, phi_u, phi, rng);
      } catch (const NumericalError& err) {
        throw NumericalError("chain iteration " + std::to_string(n) + ": " + err.what());
      }
    }();
    ++evaluations;
    if (step.accepted) {
      u = std::move(step.u);
      phi_u = step.phi;
      quad_u = prior_precision_quadratic(prior, u);
      ++window_hits;
    }
    out.accepted.push_back(step.accepted ? 1 : 0);
    out.tau.push_back(tau);
    out.temperature.push_back(T);
    out.phi.push_back(phi_u);
    out.prior_quad.push_back(quad_u);

    if (n > cfg.burn_in && (n - cfg.burn_in) % cfg.thin == 0) {
      out.samples.push_back(u.values);
      out.sample_index.push_back(n);
    }

    if (n % cfg.N_adapt == 0) {
      const double rate = static_cast<double>(window_hits) / static_cast<double>(cfg.N_adapt);
      if (rate < 0.9 * cfg.r_target)
        tau = std::max(0.9 * tau, cfg.tau_min);
      else if (rate > 1.1 * cfg.r_target)
        tau = std::min(1.2 * tau, 1.0);
      window_hits = 0;
    }
  }
  out.potential_evaluations = evaluations;
  return out;
}

ChainResult run_chain(const ChainConfig& cfg, const PriorSpec& prior, const ForwardSpec& fwd,
                      const ObservationSet& obs) {
  const ForwardModel model(fwd, obs);
  return run_chain(cfg, prior, [&model](const Field& u) { return model.potential(u); });
}

PosteriorSummary posterior_summaries(const ChainResult& result, const PriorSpec& prior) {
  if (result.samples.empty()) throw ValidationError("posterior summaries: no retained samples");
  const auto n = result.samples.front().size();
  const auto count = static_cast<double>(result.samples.size());

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  for (const auto& s : result.samples) mean += s;
  mean /= count;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(n);
  for (const auto& s : result.samples) var += (s - mean).cwiseAbs2();
  var /= count;

  std::size_t best = 0;
  double best_objective = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < result.samples.size(); ++k) {
    const std::size_t it = result.sample_index[k] - 1;
    const double objective = result.phi[it] + result.prior_quad[it];
    if (objective < best_objective) {
      best_objective = objective;
      best = k;
    }
  }
  const MeshPtr& mesh = prior.mesh();
  return PosteriorSummary{Field(mesh, std::move(mean), FieldRole::Parameter),
                          Field(mesh, var.cwiseSqrt(), FieldRole::Generic),
                          Field(mesh, result.samples[best], FieldRole::Parameter), best_objective};
}

namespace {

constexpr double kMinEffectiveSamples = 10.0;

struct LogWeights {
  double max = -std::numeric_limits<double>::infinity();
  std::vector<double> values;
};

double effective_samples(const std::vector<double>& log_w, double max) {
  double s1 = 0.0;
  double s2 = 0.0;
  for (double a : log_w) {
    const double w = std::exp(a - max);
    s1 += w;
    s2 += w * w;
  }
  return s1 * s1 / s2;
}

}  // namespace

std::vector<double> hellinger_sweep(const PriorSpec& prior, const ForwardModel& model,
                                    const std::vector<Eigen::VectorXd>& perturbed, std::size_t n_samples,
                                    std::uint64_t seed) {
  if (n_samples == 0) throw ValidationError("hellinger: n_samples must be positive");
  const auto& obs = model.observations();
  for (const auto& yp : perturbed)
    if (yp.size() != obs.y.size()) throw ValidationError("hellinger: perturbed data has the wrong length");

  std::vector<double> base(n_samples);
  std::vector<std::vector<double>> other(perturbed.size(), std::vector<double>(n_samples));
  for (std::size_t k = 0; k < n_samples; ++k) {
    // Per-draw seeding keeps the draws independent of evaluation order.
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    Rng rng(seq);
    const Field u = sample_prior(prior, rng);
    const Eigen::VectorXd g = model.predict(u);
    base[k] = -potential(g, obs.y, obs.sigma2);
    for (std::size_t i = 0; i < perturbed.size(); ++i) other[i][k] = -potential(g, perturbed[i], obs.sigma2);
  }

  const double max_a = *std::max_element(base.begin(), base.end());
  const double ess_a = effective_samples(base, max_a);
  if (!(ess_a >= kMinEffectiveSamples))
    throw NumericalError("hellinger: importance weights degenerate (effective sample size " +
                         std::to_string(ess_a) + " of " + std::to_string(n_samples) + ")");

  std::vector<double> out;
  out.reserve(perturbed.size());
  for (std::size_t i = 0; i < perturbed.size(); ++i) {
    if (perturbed[i] == obs.y) {
      out.push_back(0.0);
      continue;
    }
    const auto& b = other[i];
    const double max_b = *std::max_element(b.begin(), b.end());
    const double ess_b = effective_samples(b, max_b);
    if (!(ess_b >= kMinEffectiveSamples))
      throw NumericalError("hellinger: importance weights for y' degenerate (effective sample size " +
                           std::to_string(ess_b) + ")");
    double sa = 0.0;
    double sb = 0.0;
    double sab = 0.0;
    for (std::size_t k = 0; k < n_samples; ++k) {
      const double da = base[k] - max_a;
      const double db = b[k] - max_b;
      sa += std::exp(da);
      sb += std::exp(db);
      sab += std::exp(0.5 * (da + db));
    }
    const double affinity = sab / std::sqrt(sa * sb);
    out.push_back(std::sqrt(std::clamp(1.0 - affinity, 0.0, 1.0)));
  }
  return out;
}

double hellinger_estimate(const PriorSpec& prior, const ForwardSpec& fwd, const ObservationSet& obs_y,
                          const ObservationSet& obs_yprime, std::size_t n_samples, std::uint64_t seed) {
  if (obs_y.size() != obs_yprime.size() || obs_y.sigma2 != obs_yprime.sigma2)
    throw ValidationError("hellinger: observation sets must share functionals and Sigma");
  const ForwardModel model(fwd, obs_y);
  return hellinger_sweep(prior, model, {obs_yprime.y}, n_samples, seed).front();
}

}  // namespace mgip
