// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "aet/analytic.hpp"
#include "aet/eigs.hpp"
#include "aet/forward.hpp"
#include "aet/inference.hpp"
#include "aet/prior.hpp"

namespace aet {

inline constexpr int kConfigSchema = 1;

struct MeshConfig {
  double target_h = 0.06;
  double view_fraction = 1.0;
  double view_offset = 0.0;
};

/// Which measured pairs enter the likelihood: the diagonal pairs of the
/// cosine inputs, or every pair present in the data.
enum class LikelihoodPairs { CosineDiagonal, All };

struct NoiseConfig {
  double d_noise = 0.01;
  NormKind norm = NormKind::L2;
  std::uint64_t seed = 1;
};

struct PriorConfig {
  Pushforward map;
  double matern_tau = 30.0;
  double matern_alpha = 2.0;
  int n_kl = 100;
  int pool_size = 0;  // 0: twice n_kl
};

struct CompareConfig {
  double trusted_std_threshold = 0.5;
};

struct OutputConfig {
  std::string dir = "out";
  /// Directory for cached KL bases; empty disables caching.
  std::string basis_cache = "";
};

struct ExperimentConfig {
  int schema = kConfigSchema;
  std::string name = "experiment";
  MeshConfig mesh;
  PhantomSpec phantom;
  InputSpec inputs;
  LikelihoodPairs likelihood_pairs = LikelihoodPairs::CosineDiagonal;
  NoiseConfig noise;
  PriorConfig prior;
  SamplerOptions sampler;
  AnalyticOptions analytic;  // solver member is ignored; see `solver`
  CompareConfig compare;
  SolverOptions solver;
  EigenOptions eigen;  // solver member is ignored; see `solver`
  OutputConfig output;

  KLOptions kl_options() const;
};

/// Parses and validates. Syntax errors report line and column; semantic
/// errors report the JSON path of the offending value. Missing keys take the
/// defaults above, unknown keys are rejected. Throws ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Complete document, every key present.
std::string serialize_config(const ExperimentConfig& config);

}  // namespace aet
