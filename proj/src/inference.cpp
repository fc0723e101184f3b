// SPDX-License-Identifier: Apache-2.0

#include "aet/inference.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

namespace aet {

double misfit(const TriMesh& mesh, const std::vector<NodalField>& predictions, const std::vector<NodalField>& data,
              const std::vector<double>& taus, NormKind norm_kind) {
  if (predictions.size() != data.size() || data.size() != taus.size()) {
    throw DomainError("misfit: predictions, data and noise scales differ in count");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const double r = norm(mesh, predictions[k] - data[k], norm_kind);
    total += norm_kind == NormKind::L1 ? r / taus[k] : 0.5 * (r * r) / (taus[k] * taus[k]);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Posterior

Posterior::Posterior(const ForwardModel& forward, const KLBasis& basis, Pushforward map, std::vector<NodalField> data,
                     std::vector<double> taus, NormKind norm_kind)
    : forward_(&forward), basis_(&basis), map_(map), data_(std::move(data)), taus_(std::move(taus)),
      norm_kind_(norm_kind) {
  if (data_.size() != forward.pairs().size() || taus_.size() != data_.size()) {
    throw DomainError("posterior needs one observation and one noise scale per measurement pair");
  }
  for (const auto& y : data_) {
    if (y.size() != forward.mesh().num_vertices()) throw DomainError("observation does not match the forward mesh");
  }
  for (double t : taus_) {
    if (!(t > 0.0)) throw DataQualityError("noise scale tau must be positive for the likelihood (noise-free data?)");
  }
  if (basis.num_vertices() != forward.mesh().num_vertices()) throw DomainError("KL basis built on a different mesh");
}

NodalField Posterior::conductivity(const VectorXd& x) const { return push(map_, basis_->realize(x)); }

std::vector<NodalField> Posterior::predict(const VectorXd& x) const {
  return forward_->power_densities(conductivity(x));
}

double Posterior::misfit_of(const std::vector<NodalField>& predictions) const {
  return misfit(forward_->mesh(), predictions, data_, taus_, norm_kind_);
}

double Posterior::neg_log_likelihood(const VectorXd& x) const { return misfit_of(predict(x)); }

Potential Posterior::potential() const {
  return [this](const VectorXd& x) { return neg_log_likelihood(x); };
}

// ---------------------------------------------------------------------------
// pCN

bool pcn_step(const Potential& phi, PcnState& state, double beta, Rng& rng) {
  const VectorXd z = standard_normal(rng, static_cast<int>(state.x.size()));
  VectorXd proposal = std::sqrt(1.0 - beta * beta) * state.x + beta * z;
  const double phi_new = phi(proposal);
  const double log_alpha = state.phi - phi_new;
  // Always draw, so the random stream does not depend on the outcome.
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (log_alpha >= 0.0 || std::log(u) < log_alpha) {
    state.x = std::move(proposal);
    state.phi = phi_new;
    return true;
  }
  return false;
}

double adapt_beta(double beta, double window_rate, int iteration, const SamplerOptions& options) {
  const double gain = std::pow(static_cast<double>(std::max(iteration, 1)), -options.adapt_decay);
  return std::clamp(beta * std::exp(gain * (window_rate - options.target_accept)), options.beta_min,
                    options.beta_max);
}

double Chain::acceptance_rate(int begin, int end) const {
  begin = std::max(begin, 0);
  end = std::min(end, size());
  if (end <= begin) return 0.0;
  int count = 0;
  for (int i = begin; i < end; ++i) count += accepted[i];
  return static_cast<double>(count) / (end - begin);
}

Chain run_chain(const Potential& phi, int dimension, const SamplerOptions& options, std::uint64_t seed,
                const VectorXd& start) {
  if (options.n_warmup < 0 || options.n_samples < 0) throw DomainError("sample counts must be nonnegative");
  if (!(options.beta0 > 0.0 && options.beta0 < 1.0)) throw DomainError("beta0 must lie in (0, 1)");
  const int total = options.n_warmup + options.n_samples;
  Rng rng = make_stream(seed, "pcn");
  PcnState state;
  state.x = start.size() == dimension ? start : VectorXd::Zero(dimension);
  state.phi = phi(state.x);

  Chain chain;
  chain.seed = seed;
  chain.n_warmup = options.n_warmup;
  chain.samples.resize(total, dimension);
  chain.accepted.reserve(total);
  chain.beta.reserve(total);
  chain.phi.reserve(total);

  const int window = std::max(1, options.adapt_window);
  std::vector<char> recent;
  recent.reserve(window);
  int recent_pos = 0;
  int recent_sum = 0;
  double beta = options.beta0;
  for (int it = 0; it < total; ++it) {
    const bool acc = pcn_step(phi, state, beta, rng);
    chain.samples.row(it) = state.x.transpose();
    chain.accepted.push_back(acc);
    chain.beta.push_back(beta);
    chain.phi.push_back(state.phi);
    if (it < options.n_warmup) {
      if (static_cast<int>(recent.size()) < window) {
        recent.push_back(acc);
      } else {
        recent_sum -= recent[recent_pos];
        recent[recent_pos] = acc;
        recent_pos = (recent_pos + 1) % window;
      }
      recent_sum += acc;
      beta = adapt_beta(beta, static_cast<double>(recent_sum) / recent.size(), it + 1, options);
    }
  }
  return chain;
}

std::vector<Chain> run_chains(const Potential& phi, int dimension, const SamplerOptions& options,
                              bool deterministic) {
  const int n = std::max(1, options.n_chains);
  auto chain_seed = [&](int c) { return splitmix64(options.seed ^ fnv1a("chain/" + std::to_string(c))); };
  std::vector<Chain> out(n);
  if (deterministic || n == 1) {
    for (int c = 0; c < n; ++c) out[c] = run_chain(phi, dimension, options, chain_seed(c));
    return out;
  }
  std::vector<std::future<Chain>> jobs;
  for (int c = 0; c < n; ++c) {
    jobs.push_back(std::async(std::launch::async, [&, c] { return run_chain(phi, dimension, options, chain_seed(c)); }));
  }
  for (int c = 0; c < n; ++c) out[c] = jobs[c].get();
  return out;
}

// ---------------------------------------------------------------------------
// Summaries

std::pair<double, double> highest_density_interval(std::vector<double> samples, double mass) {
  if (samples.empty()) throw DomainError("highest_density_interval: no samples");
  std::sort(samples.begin(), samples.end());
  const int n = static_cast<int>(samples.size());
  const int inside = std::clamp(static_cast<int>(std::ceil(mass * n - 1e-9)), 1, n);
  int best = 0;
  double width = std::numeric_limits<double>::infinity();
  for (int i = 0; i + inside - 1 < n; ++i) {
    const double w = samples[i + inside - 1] - samples[i];
    if (w < width) {
      width = w;
      best = i;
    }
  }
  return {samples[best], samples[best + inside - 1]};
}

double effective_sample_size(const VectorXd& series) {
  const int n = static_cast<int>(series.size());
  if (n < 4) return n;
  const VectorXd c = series.array() - series.mean();
  const double c0 = c.squaredNorm() / n;
  if (!(c0 > 0.0)) return n;
  auto rho = [&](int lag) { return c.head(n - lag).dot(c.tail(n - lag)) / (n * c0); };
  double sum = 0.0;
  double previous = std::numeric_limits<double>::infinity();
  for (int m = 0; 2 * m + 1 < n; ++m) {
    double pair = rho(2 * m) + rho(2 * m + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, previous);  // initial monotone sequence
    previous = pair;
    sum += pair;
  }
  const double tau = std::max(2.0 * sum - 1.0, 1.0 / n);
  return n / tau;
}

PosteriorSummary summarize(const std::vector<Chain>& chains, const KLBasis& basis, const Pushforward& map,
                           int burn_in_drop, int n_coefficients) {
  PosteriorSummary out;
  const int nv = basis.num_vertices();
  const int k = std::min(n_coefficients, basis.size());
  out.mean = NodalField::Zero(nv);
  NodalField m2 = NodalField::Zero(nv);
  out.latent_mean = VectorXd::Zero(basis.size());
  std::vector<std::vector<double>> coeffs(k);
  int count = 0;
  int accepted = 0;
  int warm_total = 0;
  int warm_accepted = 0;
  for (const auto& chain : chains) {
    const int begin = std::min(chain.size(), chain.n_warmup + std::max(0, burn_in_drop));
    for (int i = 0; i < std::min(chain.n_warmup, chain.size()); ++i) warm_accepted += chain.accepted[i];
    warm_total += std::min(chain.n_warmup, chain.size());
    for (int i = begin; i < chain.size(); ++i) {
      const VectorXd x = chain.samples.row(i).transpose();
      const NodalField sigma = push(map, basis.realize(x));
      ++count;
      const NodalField delta = sigma - out.mean;
      out.mean += delta / count;
      m2 += delta.cwiseProduct(sigma - out.mean);
      out.latent_mean += (x - out.latent_mean) / count;
      for (int c = 0; c < k; ++c) coeffs[c].push_back(x[c]);
      accepted += chain.accepted[i];
    }
  }
  if (count == 0) throw DomainError("summarize: no samples left after warm-up and burn-in");
  out.std = count > 1 ? NodalField((m2 / (count - 1)).cwiseMax(0.0).cwiseSqrt()) : NodalField::Zero(nv);
  out.n_used = count;
  out.acceptance_rate = static_cast<double>(accepted) / count;
  out.warmup_acceptance_rate = warm_total > 0 ? static_cast<double>(warm_accepted) / warm_total : 0.0;
  out.final_beta = chains.back().final_beta();
  for (int c = 0; c < k; ++c) {
    CoefficientSummary s;
    s.mean = out.latent_mean[c];
    std::tie(s.hdi_low, s.hdi_high) = highest_density_interval(coeffs[c]);
    s.ess = effective_sample_size(Eigen::Map<const VectorXd>(coeffs[c].data(), coeffs[c].size()));
    out.coefficients.push_back(s);
  }
  return out;
}

}  // namespace aet
