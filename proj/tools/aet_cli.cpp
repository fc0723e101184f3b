// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "aet/app.hpp"

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kDataQuality = 3, kSolver = 4 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acousto-electric tomography: synthetic data, Bayesian and analytic reconstruction"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
  app.add_option("--config", config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
  app.add_option("--seed", seed, "Seed override: noise seed for generate, sampler seed for bayes");
  app.add_flag("--deterministic", deterministic, "Run chains sequentially");

  auto* generate = app.add_subcommand("generate", "Mesh, phantom and noisy power-density data");
  auto* bayes = app.add_subcommand("bayes", "pCN posterior sampling");
  auto* analytic = app.add_subcommand("analytic", "Two-step analytic reconstruction");
  auto* compare = app.add_subcommand("compare", "Errors of the reconstructions against the phantom");
  auto* mesh_info = app.add_subcommand("mesh-info", "Mesh statistics");
  for (auto* sub : {generate, bayes, analytic, compare, mesh_info}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  try {
    aet::ExperimentConfig config = config_path.empty() ? aet::ExperimentConfig{} : aet::load_config(config_path);
    if (!out_dir.empty()) config.output.dir = out_dir;
    if (seed) {
      if (generate->parsed()) config.noise.seed = *seed;
      if (bayes->parsed()) config.sampler.seed = *seed;
    }
    if (generate->parsed()) aet::cmd_generate(config, std::cerr);
    if (bayes->parsed()) aet::cmd_bayes(config, deterministic, std::cerr);
    if (analytic->parsed()) aet::cmd_analytic(config, std::cerr);
    if (compare->parsed()) aet::cmd_compare(config, std::cerr);
    if (mesh_info->parsed()) std::cout << aet::cmd_mesh_info(config);
  } catch (const aet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const aet::DataQualityError& e) {
    std::cerr << "data-quality abort: " << e.what() << "\n";
    return kDataQuality;
  } catch (const aet::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
