// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aet/config.hpp"

namespace aet {

/// File layout of one experiment directory.
struct RunPaths {
  std::filesystem::path root;

  std::filesystem::path mesh_coarse() const { return root / "mesh_coarse.aetmesh"; }
  std::filesystem::path mesh_fine() const { return root / "mesh_fine.aetmesh"; }
  std::filesystem::path phantom() const { return root / "phantom.csv"; }
  std::filesystem::path phantom_fine() const { return root / "phantom_fine.csv"; }
  std::filesystem::path config() const { return root / "config.json"; }
  std::filesystem::path data_csv(const MeasurementPair& p) const;
  std::filesystem::path data_json(const MeasurementPair& p) const;
  std::filesystem::path bayes_dir() const { return root / "bayes"; }
  std::filesystem::path analytic_dir() const { return root / "analytic"; }
};

/// Pairs entering the likelihood, in data order.
std::vector<MeasurementPair> likelihood_pairs(const ExperimentConfig& config);

void cmd_generate(const ExperimentConfig& config, std::ostream& log);

struct BayesReport {
  PosteriorSummary summary;
  std::vector<double> chain_acceptance;  // online rate per chain
  std::vector<double> chain_beta;        // frozen beta per chain
  double variance_retained = 0.0;
  double phi_at_mean_latent = 0.0;
  double phi_at_zero = 0.0;
};
BayesReport cmd_bayes(const ExperimentConfig& config, bool deterministic, std::ostream& log);
std::string summary_json(const ExperimentConfig& config, const BayesReport& report,
                         const std::vector<MeasurementPair>& pairs, const std::vector<double>& taus);

/// Throws DataQualityError after writing the report when the Jacobian check
/// or the thresholded data fail.
AnalyticResult cmd_analytic(const ExperimentConfig& config, std::ostream& log);

struct FieldError {
  std::string name;
  double relative_l2 = 0.0;
  double relative_l1 = 0.0;
};
struct CompareReport {
  std::vector<FieldError> errors;
  double trusted_std_threshold = 0.0;
  double trusted_area = 0.0;  // lumped-mass area of vertices with std below the threshold
  double mesh_area = 0.0;
  bool has_std = false;
};
/// Relative L2/L1 errors of each named field against the truth; trusted
/// region from `std` when given.
CompareReport compare_fields(const TriMesh& mesh, const NodalField& truth,
                             const std::vector<std::pair<std::string, NodalField>>& fields,
                             const NodalField* std, double trusted_std_threshold);
std::string compare_markdown(const CompareReport& report);
std::string compare_json(const CompareReport& report);
/// Compares whatever of bayes/ and analytic/ exists in the output directory.
CompareReport cmd_compare(const ExperimentConfig& config, std::ostream& log);

/// Mesh statistics for the configured coarse and fine meshes as JSON.
std::string cmd_mesh_info(const ExperimentConfig& config);

}  // namespace aet
