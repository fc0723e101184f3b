// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "aet/forward.hpp"
#include "aet/prior.hpp"
#include "aet/rng.hpp"
#include "aet/types.hpp"

namespace aet {

/// Negative log-likelihood as a function of the latent KL coefficients.
using Potential = std::function<double(const VectorXd&)>;

/// Sum over observations of ||G_k - y_k||^l / (l tau_k^l) in the L^l norm
/// of the mesh, l in {1, 2}.
double misfit(const TriMesh& mesh, const std::vector<NodalField>& predictions, const std::vector<NodalField>& data,
              const std::vector<double>& taus, NormKind norm_kind);

/// Posterior over latent coefficients: forward model composed with the KL
/// expansion and a pushforward, against one observation per forward pair.
class Posterior {
 public:
  Posterior(const ForwardModel& forward, const KLBasis& basis, Pushforward map, std::vector<NodalField> data,
            std::vector<double> taus, NormKind norm_kind);

  NodalField conductivity(const VectorXd& x) const;
  std::vector<NodalField> predict(const VectorXd& x) const;
  double neg_log_likelihood(const VectorXd& x) const;
  double misfit_of(const std::vector<NodalField>& predictions) const;
  Potential potential() const;

  const ForwardModel& forward() const { return *forward_; }
  const KLBasis& basis() const { return *basis_; }
  const Pushforward& map() const { return map_; }
  const std::vector<NodalField>& data() const { return data_; }
  const std::vector<double>& taus() const { return taus_; }
  NormKind norm_kind() const { return norm_kind_; }
  int dimension() const { return basis_->size(); }

 private:
  const ForwardModel* forward_;
  const KLBasis* basis_;
  Pushforward map_;
  std::vector<NodalField> data_;
  std::vector<double> taus_;
  NormKind norm_kind_;
};

// ---------------------------------------------------------------------------
// pCN

struct PcnState {
  VectorXd x;
  double phi = 0.0;
};

/// One preconditioned Crank-Nicolson step: propose sqrt(1 - beta^2) x + beta z
/// and accept with probability min(1, exp(phi(x) - phi(x*))). Returns whether
/// the proposal was accepted; on rejection the state is unchanged.
bool pcn_step(const Potential& phi, PcnState& state, double beta, Rng& rng);

struct SamplerOptions {
  int n_warmup = 1000;
  int n_samples = 5000;
  double beta0 = 0.2;
  int thin = 1;
  std::uint64_t seed = 1;
  int n_chains = 1;
  double target_accept = 0.23;
  int adapt_window = 50;
  double adapt_decay = 0.6;
  double beta_min = 1e-4;
  double beta_max = 0.999;
  int burn_in_drop = 0;
};

/// beta * exp(iteration^(-decay) * (window_rate - target)), clamped.
double adapt_beta(double beta, double window_rate, int iteration, const SamplerOptions& options);

enum class Phase { Warmup, Online };

struct Chain {
  MatrixXd samples;             // one row per iteration, state after the step
  std::vector<char> accepted;
  std::vector<double> beta;     // step size used at each iteration
  std::vector<double> phi;      // potential of the recorded state
  int n_warmup = 0;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(accepted.size()); }
  Phase phase(int iteration) const { return iteration < n_warmup ? Phase::Warmup : Phase::Online; }
  /// Acceptance rate over [begin, end).
  double acceptance_rate(int begin, int end) const;
  double online_acceptance_rate() const { return acceptance_rate(n_warmup, size()); }
  double final_beta() const { return beta.empty() ? 0.0 : beta.back(); }
};

/// Warm-up with per-iteration adaptation over a sliding window, then a frozen
/// step size. Starts from x = 0 unless `start` is given.
Chain run_chain(const Potential& phi, int dimension, const SamplerOptions& options, std::uint64_t seed,
                const VectorXd& start = VectorXd());

/// Independent chains seeded from `options.seed`; run concurrently unless
/// `deterministic` is set. Results are identical either way.
std::vector<Chain> run_chains(const Potential& phi, int dimension, const SamplerOptions& options,
                              bool deterministic);

// ---------------------------------------------------------------------------
// Summaries

/// Shortest interval containing ceil(mass * n) of the samples.
std::pair<double, double> highest_density_interval(std::vector<double> samples, double mass = 0.95);

/// Effective sample size with Geyer's initial positive sequence estimator.
double effective_sample_size(const VectorXd& series);

struct CoefficientSummary {
  double mean = 0.0;
  double hdi_low = 0.0;
  double hdi_high = 0.0;
  double ess = 0.0;
};

struct PosteriorSummary {
  NodalField mean;  // of the pushed conductivity samples
  NodalField std;   // sample standard deviation, N - 1 denominator
  std::vector<CoefficientSummary> coefficients;
  VectorXd latent_mean;
  double acceptance_rate = 0.0;
  double warmup_acceptance_rate = 0.0;
  double final_beta = 0.0;
  int n_used = 0;
};

/// Online samples of every chain after dropping `burn_in_drop` per chain.
/// Nodal moments are accumulated in one pass (Welford). Coefficient
/// summaries cover the first `n_coefficients` latent coordinates.
PosteriorSummary summarize(const std::vector<Chain>& chains, const KLBasis& basis, const Pushforward& map,
                           int burn_in_drop, int n_coefficients = 10);

}  // namespace aet
