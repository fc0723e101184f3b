// SPDX-License-Identifier: Apache-2.0

#include "aet/app.hpp"

#include <cmath>
#include <ostream>

#include "aet/io.hpp"
#include "json.hpp"

namespace aet {

using nlohmann::json;
using nlohmann::ordered_json;

std::filesystem::path RunPaths::data_csv(const MeasurementPair& p) const {
  return root / ("data_" + std::to_string(p.i) + "_" + std::to_string(p.j) + ".csv");
}

std::filesystem::path RunPaths::data_json(const MeasurementPair& p) const {
  return root / ("data_" + std::to_string(p.i) + "_" + std::to_string(p.j) + ".json");
}

namespace {

std::string pair_name(const MeasurementPair& p) { return "(" + std::to_string(p.i) + "," + std::to_string(p.j) + ")"; }

// The mesh on disk must be the one this configuration describes.
TriMesh read_run_mesh(const ExperimentConfig& config, const RunPaths& paths) {
  if (!std::filesystem::exists(paths.mesh_coarse())) {
    throw Error(paths.mesh_coarse().string() + " not found; run `generate` first");
  }
  TriMesh mesh = read_mesh_file(paths.mesh_coarse());
  const TriMesh expected = build_disk_mesh(config.mesh.target_h, config.mesh.view_fraction, config.mesh.view_offset);
  if (mesh.num_vertices() != expected.num_vertices() || std::abs(mesh.arc().fraction - expected.arc().fraction) > 1e-12 ||
      std::abs(mesh.arc().offset - expected.arc().offset) > 1e-12) {
    throw ConfigError(paths.mesh_coarse().string() + " was generated with a different mesh or view than the config");
  }
  return mesh;
}

NoisySignal read_pair(const RunPaths& paths, const TriMesh& mesh, const MeasurementPair& p) {
  if (!std::filesystem::exists(paths.data_csv(p)) || !std::filesystem::exists(paths.data_json(p))) {
    throw Error("data for pair " + pair_name(p) + " not found in " + paths.root.string() + "; run `generate` first");
  }
  return read_signal(paths.data_csv(p), paths.data_json(p), mesh);
}

ordered_json mesh_stats(const TriMesh& mesh) {
  int gamma1 = 0;
  for (int v : mesh.boundary_loop()) gamma1 += mesh.in_gamma1(v);
  ordered_json j;
  j["vertices"] = mesh.num_vertices();
  j["triangles"] = mesh.num_triangles();
  j["interior_vertices"] = mesh.interior_vertices().size();
  j["boundary_vertices"] = mesh.boundary_loop().size();
  j["gamma1_vertices"] = gamma1;
  j["gamma1_length"] = mesh.gamma1_length();
  j["area"] = mesh.area();
  j["min_angle_deg"] = mesh.min_angle_degrees();
  j["max_edge_length"] = mesh.max_edge_length();
  j["view_fraction"] = mesh.arc().fraction;
  j["view_offset"] = mesh.arc().offset;
  return j;
}

}  // namespace

std::vector<MeasurementPair> likelihood_pairs(const ExperimentConfig& config) {
  const auto all = measurement_pairs(config.inputs);
  if (config.likelihood_pairs == LikelihoodPairs::All) return all;
  std::vector<MeasurementPair> out;
  const int n_cos = static_cast<int>(config.inputs.ell_bound.size());
  for (const auto& p : all) {
    if (p.i == p.j && p.i < n_cos) out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------

void cmd_generate(const ExperimentConfig& config, std::ostream& log) {
  const RunPaths paths{config.output.dir};
  const NestedMeshPair meshes =
      refine_nested(build_disk_mesh(config.mesh.target_h, config.mesh.view_fraction, config.mesh.view_offset));
  const NodalField sigma_fine = evaluate_phantom(meshes.fine, config.phantom);
  const NodalField sigma_coarse = meshes.restrict_to_coarse(sigma_fine);
  const auto signals = generate_data(sigma_fine, meshes, config.inputs, config.noise.d_noise, config.noise.norm,
                                     config.noise.seed, config.solver);

  write_text_file(paths.config(), serialize_config(config));
  write_mesh_file(paths.mesh_coarse(), meshes.coarse);
  write_mesh_file(paths.mesh_fine(), meshes.fine);
  write_nodal_field(paths.phantom(), meshes.coarse, sigma_coarse);
  write_nodal_field(paths.phantom_fine(), meshes.fine, sigma_fine);
  for (const auto& s : signals) write_signal(paths.data_csv(s.pair), paths.data_json(s.pair), meshes.coarse, s);

  log << "generate: coarse mesh " << meshes.coarse.num_vertices() << " vertices, fine mesh "
      << meshes.fine.num_vertices() << " vertices, " << signals.size() << " signals -> " << paths.root.string()
      << "\n";
}

// ---------------------------------------------------------------------------

BayesReport cmd_bayes(const ExperimentConfig& config, bool deterministic, std::ostream& log) {
  const RunPaths paths{config.output.dir};
  const TriMesh mesh = read_run_mesh(config, paths);
  const auto pairs = likelihood_pairs(config);

  std::vector<NodalField> data;
  std::vector<double> taus;
  for (const auto& p : pairs) {
    NoisySignal s = read_pair(paths, mesh, p);
    if (s.norm_kind != config.noise.norm) {
      throw ConfigError("data for pair " + pair_name(p) + " were generated in the " + to_string(s.norm_kind) +
                        " norm but the config asks for " + to_string(config.noise.norm));
    }
    if (s.zero_noise) {
      throw DataQualityError("data for pair " + pair_name(p) +
                             " are noise-free (tau = 0); the likelihood needs d_noise > 0");
    }
    data.push_back(std::move(s.y));
    taus.push_back(s.tau_noise);
  }

  const ForwardModel forward(mesh, make_inputs(mesh, config.inputs), pairs, config.solver);
  const KLBasis basis = load_or_build_kl_basis(mesh, config.kl_options(), config.output.basis_cache);
  const Posterior posterior(forward, basis, config.prior.map, data, taus, config.noise.norm);
  log << "bayes: " << basis.size() << " KL modes (variance retained " << basis.variance_retained << "), "
      << pairs.size() << " observations, " << config.sampler.n_chains << " chain(s)\n";

  const auto chains = run_chains(posterior.potential(), posterior.dimension(), config.sampler, deterministic);

  BayesReport report;
  report.summary = summarize(chains, basis, config.prior.map, config.sampler.burn_in_drop);
  report.variance_retained = basis.variance_retained;
  for (const auto& c : chains) {
    report.chain_acceptance.push_back(c.online_acceptance_rate());
    report.chain_beta.push_back(c.final_beta());
  }
  report.phi_at_mean_latent = posterior.neg_log_likelihood(report.summary.latent_mean);
  report.phi_at_zero = posterior.neg_log_likelihood(VectorXd::Zero(basis.size()));

  const auto dir = paths.bayes_dir();
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const std::string name = c == 0 ? "chain.csv" : "chain_" + std::to_string(c) + ".csv";
    write_text_file(dir / name, chain_csv(chains[c], config.sampler.thin));
  }
  write_text_file(dir / "summary.json", summary_json(config, report, pairs, taus));
  write_nodal_field(dir / "mean.csv", mesh, report.summary.mean);
  write_nodal_field(dir / "std.csv", mesh, report.summary.std);

  log << "bayes: acceptance " << report.summary.acceptance_rate << ", final beta " << report.summary.final_beta
      << " -> " << dir.string() << "\n";
  return report;
}

std::string summary_json(const ExperimentConfig& config, const BayesReport& report,
                         const std::vector<MeasurementPair>& pairs, const std::vector<double>& taus) {
  ordered_json j;
  j["schema"] = kConfigSchema;
  j["name"] = config.name;
  j["prior"] = {{"kind", to_string(config.prior.map.kind)},
                {"n_kl", config.prior.n_kl},
                {"pool_size", config.kl_options().effective_pool()},
                {"matern_tau", config.prior.matern_tau},
                {"matern_alpha", config.prior.matern_alpha},
                {"variance_retained", report.variance_retained}};
  ordered_json pair_list = ordered_json::array();
  for (const auto& p : pairs) pair_list.push_back({p.i, p.j});
  j["likelihood"] = {{"norm", to_string(config.noise.norm)}, {"pairs", pair_list}, {"taus", taus}};
  j["sampler"] = {{"n_chains", config.sampler.n_chains},     {"n_warmup", config.sampler.n_warmup},
                  {"n_samples", config.sampler.n_samples},   {"thin", config.sampler.thin},
                  {"seed", config.sampler.seed},             {"target_accept", config.sampler.target_accept},
                  {"burn_in_drop", config.sampler.burn_in_drop}};
  const auto& s = report.summary;
  j["acceptance_rate"] = s.acceptance_rate;
  j["warmup_acceptance_rate"] = s.warmup_acceptance_rate;
  j["final_beta"] = s.final_beta;
  ordered_json chains = ordered_json::array();
  for (std::size_t c = 0; c < report.chain_acceptance.size(); ++c) {
    chains.push_back({{"acceptance_rate", report.chain_acceptance[c]}, {"final_beta", report.chain_beta[c]}});
  }
  j["chains"] = chains;
  j["n_used"] = s.n_used;
  j["phi_at_mean_latent"] = report.phi_at_mean_latent;
  j["phi_at_zero"] = report.phi_at_zero;
  ordered_json coefficients = ordered_json::array();
  for (std::size_t c = 0; c < s.coefficients.size(); ++c) {
    const auto& k = s.coefficients[c];
    coefficients.push_back(
        {{"index", c}, {"mean", k.mean}, {"hdi_low", k.hdi_low}, {"hdi_high", k.hdi_high}, {"ess", k.ess}});
  }
  j["coefficients"] = coefficients;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

AnalyticResult cmd_analytic(const ExperimentConfig& config, std::ostream& log) {
  if (!config.inputs.include_f2) {
    throw ConfigError("/inputs/include_f2: the analytic reconstruction needs the companion input");
  }
  const RunPaths paths{config.output.dir};
  const TriMesh mesh = read_run_mesh(config, paths);
  const int n = static_cast<int>(config.inputs.ell_bound.size());
  MatrixField h{read_pair(paths, mesh, {0, 0}).y, read_pair(paths, mesh, {0, n}).y, read_pair(paths, mesh, {n, n}).y};
  // Boundary data come from the noise-free truth on the fine mesh, restricted
  // to the coarse boundary vertices.
  const NestedMeshPair meshes = refine_nested(mesh);
  const NodalField truth_fine = read_nodal_field(paths.phantom_fine(), &meshes.fine);
  const auto inputs = make_inputs(meshes.fine, config.inputs);

  AnalyticOptions options = config.analytic;
  options.solver = config.solver;
  TruthBoundary boundary = boundary_from_truth(meshes.fine, truth_fine, inputs[0], inputs[n], options.solver);
  boundary.theta = meshes.restrict_to_coarse(boundary.theta);
  boundary.log_sigma = meshes.restrict_to_coarse(boundary.log_sigma);

  const auto dir = paths.analytic_dir();
  ordered_json report;
  report["threshold_b"] = options.threshold_b;
  report["gauge"] = to_string(options.gauge);
  report["jacobian_tolerance"] = options.jacobian_tolerance;
  report["min_det_jacobian"] = boundary.min_det_jacobian;
  report["max_abs_det_jacobian"] = boundary.max_abs_det_jacobian;
  report["fraction_nonpositive"] = boundary.fraction_nonpositive;
  auto abort_with = [&](const std::string& status, const std::string& message) {
    report["status"] = status;
    report["message"] = message;
    write_text_file(dir / "report.json", report.dump(2) + "\n");
    throw DataQualityError(message);
  };
  if (boundary.min_det_jacobian < -options.jacobian_tolerance * boundary.max_abs_det_jacobian) {
    abort_with("aborted_jacobian", "det[grad u1, grad u2] changes sign (min " +
                                       format_double(boundary.min_det_jacobian) + ", max |det| " +
                                       format_double(boundary.max_abs_det_jacobian) + ")");
  }

  AnalyticResult result;
  try {
    result = reconstruct_analytic(mesh, h, boundary, options);
  } catch (const DataQualityError& e) {
    abort_with("aborted_data", e.what());
  }
  report["min_eig_before"] = result.threshold.min_eig_before;
  report["fraction_thresholded"] = result.threshold.fraction_thresholded;
  report["status"] = "ok";
  write_nodal_field(dir / "theta.csv", mesh, result.theta);
  write_nodal_field(dir / "log_sigma.csv", mesh, result.log_sigma);
  write_nodal_field(dir / "sigma.csv", mesh, result.sigma);
  write_text_file(dir / "report.json", report.dump(2) + "\n");
  log << "analytic: thresholded " << result.threshold.fraction_thresholded << " of vertices -> " << dir.string()
      << "\n";
  return result;
}

// ---------------------------------------------------------------------------

CompareReport compare_fields(const TriMesh& mesh, const NodalField& truth,
                             const std::vector<std::pair<std::string, NodalField>>& fields, const NodalField* std,
                             double trusted_std_threshold) {
  if (truth.size() != mesh.num_vertices()) throw DomainError("truth does not match the mesh");
  const double t2 = norm_l2(mesh, truth);
  const double t1 = norm_l1(mesh, truth);
  if (!(t2 > 0.0) || !(t1 > 0.0)) throw DomainError("truth field has zero norm");
  CompareReport out;
  for (const auto& [name, f] : fields) {
    if (f.size() != mesh.num_vertices()) throw DomainError(name + " does not match the mesh");
    const NodalField diff = f - truth;
    out.errors.push_back({name, norm_l2(mesh, diff) / t2, norm_l1(mesh, diff) / t1});
  }
  out.trusted_std_threshold = trusted_std_threshold;
  const VectorXd lumped = lumped_mass(mesh);
  out.mesh_area = lumped.sum();
  if (std) {
    if (std->size() != mesh.num_vertices()) throw DomainError("std field does not match the mesh");
    out.has_std = true;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      if ((*std)[v] < trusted_std_threshold) out.trusted_area += lumped[v];
    }
  }
  return out;
}

std::string compare_markdown(const CompareReport& r) {
  std::string md = "# Reconstruction comparison\n\n| field | relative L2 error | relative L1 error |\n|---|---|---|\n";
  for (const auto& e : r.errors) {
    md += "| " + e.name + " | " + format_double(e.relative_l2) + " | " + format_double(e.relative_l1) + " |\n";
  }
  if (r.has_std) {
    md += "\nTrusted region (posterior std < " + format_double(r.trusted_std_threshold) +
          "): area " + format_double(r.trusted_area) + " of " + format_double(r.mesh_area) + "\n";
  }
  return md;
}

std::string compare_json(const CompareReport& r) {
  ordered_json j;
  ordered_json errors = ordered_json::array();
  for (const auto& e : r.errors) {
    errors.push_back({{"field", e.name}, {"relative_l2", e.relative_l2}, {"relative_l1", e.relative_l1}});
  }
  j["errors"] = errors;
  j["mesh_area"] = r.mesh_area;
  if (r.has_std) {
    j["trusted_std_threshold"] = r.trusted_std_threshold;
    j["trusted_area"] = r.trusted_area;
  }
  return j.dump(2) + "\n";
}

CompareReport cmd_compare(const ExperimentConfig& config, std::ostream& log) {
  const RunPaths paths{config.output.dir};
  const TriMesh mesh = read_run_mesh(config, paths);
  const NodalField truth = read_nodal_field(paths.phantom(), &mesh);
  std::vector<std::pair<std::string, NodalField>> fields;
  std::optional<NodalField> std;
  if (std::filesystem::exists(paths.bayes_dir() / "mean.csv")) {
    fields.emplace_back("bayes_mean", read_nodal_field(paths.bayes_dir() / "mean.csv", &mesh));
    std = read_nodal_field(paths.bayes_dir() / "std.csv", &mesh);
  }
  if (std::filesystem::exists(paths.analytic_dir() / "sigma.csv")) {
    fields.emplace_back("analytic", read_nodal_field(paths.analytic_dir() / "sigma.csv", &mesh));
  }
  if (fields.empty()) throw Error("nothing to compare in " + paths.root.string() + "; run `bayes` or `analytic` first");
  const CompareReport report =
      compare_fields(mesh, truth, fields, std ? &*std : nullptr, config.compare.trusted_std_threshold);
  write_text_file(paths.root / "compare.md", compare_markdown(report));
  write_text_file(paths.root / "compare.json", compare_json(report));
  for (const auto& e : report.errors) log << "compare: " << e.name << " relative L2 error " << e.relative_l2 << "\n";
  return report;
}

std::string cmd_mesh_info(const ExperimentConfig& config) {
  const NestedMeshPair meshes =
      refine_nested(build_disk_mesh(config.mesh.target_h, config.mesh.view_fraction, config.mesh.view_offset));
  ordered_json j;
  j["target_h"] = config.mesh.target_h;
  j["coarse"] = mesh_stats(meshes.coarse);
  j["fine"] = mesh_stats(meshes.fine);
  return j.dump(2) + "\n";
}

}  // namespace aet
