// SPDX-License-Identifier: Apache-2.0

#include "aet/forward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "aet/rng.hpp"

namespace aet {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

// Position along the arc in [0, length]; points within tolerance before the
// start would otherwise wrap to nearly 2*pi.
double arc_position(const ViewArc& arc, double t) {
  const double s = arc.local_angle(t);
  if (arc.fraction < 1.0 && s > arc.length()) return s > 0.5 * (arc.length() + kTwoPi) ? 0.0 : arc.length();
  return s;
}

double pulse_phase(const ViewArc& arc, int ell_bound, double t) {
  return kTwoPi * pulse_periods(arc, ell_bound) * arc_position(arc, t) / arc.length();
}

BoundaryInput sample_trace(const TriMesh& mesh, InputKind kind, int ell_bound,
                           const std::function<double(int)>& value_at) {
  if (mesh.boundary_loop().empty()) throw DomainError("mesh has no boundary");
  bool any_gamma1 = false;
  for (int v : mesh.boundary_loop()) any_gamma1 = any_gamma1 || mesh.in_gamma1(v);
  if (!any_gamma1) throw DomainError("boundary input requires a nonempty driven arc");
  BoundaryInput in;
  in.kind = kind;
  in.ell_bound = ell_bound;
  in.arc = mesh.arc();
  in.trace = NodalField::Zero(mesh.num_vertices());
  for (int v : mesh.boundary_loop()) in.trace[v] = mesh.in_gamma1(v) ? value_at(v) : 0.0;
  return in;
}

}  // namespace

int pulse_periods(const ViewArc& arc, int ell_bound) {
  if (ell_bound < 1) throw DomainError("ell_bound must be at least 1");
  return std::max(1, static_cast<int>(std::lround(ell_bound * arc.fraction)));
}

double cosine_pulse(const ViewArc& arc, int ell_bound, double t) {
  if (!arc.contains(t)) return 0.0;
  return std::cos(pulse_phase(arc, ell_bound, t)) - 1.0;
}

double sine_pulse(const ViewArc& arc, int ell_bound, double t) {
  if (!arc.contains(t)) return 0.0;
  const double value = std::sin(pulse_phase(arc, ell_bound, t));
  if (arc.fraction >= 1.0) return value;
  const double s = arc_position(arc, t);
  const double edge = std::min(s, arc.length() - s);
  return value * smoothstep(edge / (0.1 * arc.length()));
}

BoundaryInput make_boundary_input(const TriMesh& mesh, int ell_bound) {
  pulse_periods(mesh.arc(), ell_bound);
  return sample_trace(mesh, InputKind::CosinePulse, ell_bound,
                      [&](int v) { return cosine_pulse(mesh.arc(), ell_bound, mesh.boundary_angle(v)); });
}

BoundaryInput make_companion_input(const TriMesh& mesh, int ell_bound) {
  pulse_periods(mesh.arc(), ell_bound);
  return sample_trace(mesh, InputKind::SinePulse, ell_bound,
                      [&](int v) { return sine_pulse(mesh.arc(), ell_bound, mesh.boundary_angle(v)); });
}

BoundaryInput make_custom_input(const TriMesh& mesh, const std::function<double(const Vec2&)>& g) {
  BoundaryInput in;
  in.kind = InputKind::Custom;
  in.arc = mesh.arc();
  in.trace = NodalField::Zero(mesh.num_vertices());
  for (int v : mesh.boundary_loop()) in.trace[v] = g(mesh.vertex(v));
  return in;
}

std::vector<BoundaryInput> make_inputs(const TriMesh& mesh, const InputSpec& spec) {
  if (spec.ell_bound.empty()) throw DomainError("at least one ell_bound is required");
  std::vector<BoundaryInput> out;
  for (int ell : spec.ell_bound) out.push_back(make_boundary_input(mesh, ell));
  if (spec.include_f2) out.push_back(make_companion_input(mesh, spec.ell_bound.front()));
  return out;
}

std::vector<MeasurementPair> measurement_pairs(const InputSpec& spec) {
  std::vector<MeasurementPair> out;
  const int n = static_cast<int>(spec.ell_bound.size());
  for (int i = 0; i < n; ++i) out.push_back({i, i});
  if (spec.include_f2) {
    out.push_back({0, n});
    out.push_back({n, n});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Phantoms

double phantom_value(const PhantomSpec& spec, const Vec2& p) {
  const double jump = spec.inclusion_value - spec.background;
  if (spec.kind == PhantomKind::Gaussian) {
    double bump = 0.0;
    for (const auto& inc : spec.inclusions) {
      bump += std::exp(-(p - inc.center).squaredNorm() / (2.0 * inc.radius * inc.radius));
    }
    return spec.background + jump * bump;
  }
  double weight = 0.0;
  for (const auto& inc : spec.inclusions) {
    const double r = (p - inc.center).norm();
    double w;
    if (spec.ramp_width <= 0.0) {
      w = r <= inc.radius ? 1.0 : 0.0;
    } else {
      w = smoothstep((inc.radius + 0.5 * spec.ramp_width - r) / spec.ramp_width);
    }
    weight = std::max(weight, w);
  }
  return spec.background + jump * weight;
}

NodalField evaluate_phantom(const TriMesh& mesh, const PhantomSpec& spec) {
  return interpolate(mesh, [&](const Vec2& p) { return phantom_value(spec, p); });
}

// ---------------------------------------------------------------------------
// ForwardModel

ForwardModel::ForwardModel(const TriMesh& mesh, std::vector<BoundaryInput> inputs,
                           std::vector<MeasurementPair> pairs, const SolverOptions& options)
    : mesh_(&mesh), inputs_(std::move(inputs)), pairs_(std::move(pairs)), options_(options),
      mass_(assemble_mass(mesh), options) {
  const int n = static_cast<int>(inputs_.size());
  for (const auto& in : inputs_) {
    if (in.trace.size() != mesh.num_vertices()) throw DomainError("boundary input built on a different mesh");
  }
  for (const auto& p : pairs_) {
    if (p.i < 0 || p.j < 0 || p.i >= n || p.j >= n) throw DomainError("measurement pair references a missing input");
  }
}

std::vector<NodalField> ForwardModel::potentials(const NodalField& sigma) const {
  const DirichletSolver solver(*mesh_, sigma, options_);
  std::vector<NodalField> out;
  out.reserve(inputs_.size());
  for (const auto& in : inputs_) out.push_back(solver.solve(in.trace));
  return out;
}

std::vector<NodalField> ForwardModel::power_densities(const NodalField& sigma) const {
  return power_densities(sigma, potentials(sigma));
}

std::vector<NodalField> ForwardModel::power_densities(const NodalField& sigma,
                                                      const std::vector<NodalField>& u) const {
  std::vector<NodalField> out;
  out.reserve(pairs_.size());
  for (const auto& p : pairs_) out.push_back(project(cell_power_density(*mesh_, sigma, u[p.i], u[p.j])));
  return out;
}

NodalField ForwardModel::project(const VectorXd& cell_values) const {
  return mass_.solve(assemble_cell_load(*mesh_, cell_values));
}

VectorXd cell_power_density(const TriMesh& mesh, const NodalField& sigma, const NodalField& ui,
                            const NodalField& uj) {
  const VectorXd s = cell_average(mesh, sigma);
  const CellVectorField gi = gradient(mesh, ui);
  const CellVectorField gj = gradient(mesh, uj);
  return s.cwiseProduct(gi.cwiseProduct(gj).rowwise().sum());
}

// ---------------------------------------------------------------------------
// Data

NoisySignal add_noise(const TriMesh& mesh, const NodalField& h, const MeasurementPair& pair, double d_noise,
                      NormKind norm_kind, std::uint64_t seed) {
  if (!(d_noise >= 0.0)) throw DomainError("d_noise must be nonnegative");
  NoisySignal out;
  out.pair = pair;
  out.h = h;
  out.d_noise = d_noise;
  out.norm_kind = norm_kind;
  out.seed = seed;
  const double h_norm = norm(mesh, h, norm_kind);
  out.tau_noise = d_noise * h_norm;
  if (d_noise == 0.0 || h_norm == 0.0) {
    out.y = h;
    out.tau_noise = 0.0;
    out.zero_noise = true;
    return out;
  }
  Rng rng = make_stream(seed, "noise/" + std::to_string(pair.i) + "," + std::to_string(pair.j));
  const VectorXd eps = standard_normal(rng, mesh.num_vertices());
  const double scale = out.tau_noise / norm(mesh, eps, norm_kind);
  out.y = h + scale * eps;
  return out;
}

std::vector<NoisySignal> generate_data(const NodalField& sigma_fine, const NestedMeshPair& meshes,
                                       const InputSpec& inputs, double d_noise, NormKind norm_kind,
                                       std::uint64_t seed, const SolverOptions& options) {
  if (!(d_noise >= 0.0)) throw DomainError("d_noise must be nonnegative");
  const ForwardModel fine(meshes.fine, make_inputs(meshes.fine, inputs), measurement_pairs(inputs), options);
  const std::vector<NodalField> h_fine = fine.power_densities(sigma_fine);
  std::vector<NoisySignal> out;
  for (std::size_t k = 0; k < h_fine.size(); ++k) {
    const MeasurementPair pair = fine.pairs()[k];
    NoisySignal s = add_noise(meshes.coarse, meshes.restrict_to_coarse(h_fine[k]), pair, d_noise, norm_kind, seed);
    s.ell_bound = fine.inputs()[pair.i].ell_bound;
    s.view_fraction = meshes.coarse.arc().fraction;
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------

JacobianReport check_jacobian_condition(const TriMesh& mesh, const NodalField& u1, const NodalField& u2) {
  const CellVectorField g1 = gradient(mesh, u1);
  const CellVectorField g2 = gradient(mesh, u2);
  JacobianReport out;
  out.det = g1.col(0).cwiseProduct(g2.col(1)) - g1.col(1).cwiseProduct(g2.col(0));
  out.min_det = out.det.size() > 0 ? out.det.minCoeff() : 0.0;
  out.max_abs_det = out.det.size() > 0 ? out.det.cwiseAbs().maxCoeff() : 0.0;
  int bad = 0;
  for (int t = 0; t < out.det.size(); ++t) bad += out.det[t] <= 0.0;
  out.fraction_nonpositive = out.det.size() > 0 ? static_cast<double>(bad) / out.det.size() : 0.0;
  return out;
}

}  // namespace aet
