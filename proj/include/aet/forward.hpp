// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "aet/fem.hpp"
#include "aet/mesh.hpp"
#include "aet/types.hpp"

namespace aet {

// ---------------------------------------------------------------------------
// Boundary inputs

enum class InputKind { CosinePulse, SinePulse, Custom };

/// Applied boundary voltage. `trace` is the lifting: prescribed values on the
/// boundary vertices, zero at interior vertices.
struct BoundaryInput {
  InputKind kind = InputKind::Custom;
  int ell_bound = 1;
  ViewArc arc;
  NodalField trace;
};

/// Number of full periods placed on the driven arc: round(ell * fraction),
/// at least one. Paired values (full:1, half:2, quarter:4, eighth:8) give one.
int pulse_periods(const ViewArc& arc, int ell_bound);

/// cos(phase) - 1 on the arc and 0 elsewhere, where the phase runs from 0 to
/// 2*pi*periods across the arc.
double cosine_pulse(const ViewArc& arc, int ell_bound, double t);

/// sin(phase) on the arc, tapered to zero with a C1 ramp over the outer 10%
/// of each end for a limited view; plain sin(t) on the full circle.
double sine_pulse(const ViewArc& arc, int ell_bound, double t);

BoundaryInput make_boundary_input(const TriMesh& mesh, int ell_bound);
BoundaryInput make_companion_input(const TriMesh& mesh, int ell_bound);
/// Arbitrary boundary data g(x, y) sampled at the boundary vertices.
BoundaryInput make_custom_input(const TriMesh& mesh, const std::function<double(const Vec2&)>& g);

struct InputSpec {
  std::vector<int> ell_bound{1};
  bool include_f2 = false;
};

/// Cosine pulses for every ell in order, then the companion of the first ell
/// when include_f2 is set.
std::vector<BoundaryInput> make_inputs(const TriMesh& mesh, const InputSpec& spec);

struct MeasurementPair {
  int i = 0;
  int j = 0;
  bool operator==(const MeasurementPair&) const = default;
};

/// (i, i) for every cosine input; with include_f2, additionally the upper
/// triangle involving the companion input.
std::vector<MeasurementPair> measurement_pairs(const InputSpec& spec);

// ---------------------------------------------------------------------------
// Phantoms

enum class PhantomKind { Inclusions, Gaussian };

struct Inclusion {
  Vec2 center = Vec2::Zero();
  double radius = 0.1;  // disk radius, or standard deviation for Gaussian bumps
};

struct PhantomSpec {
  PhantomKind kind = PhantomKind::Inclusions;
  double background = 4.0;
  double inclusion_value = 8.0;
  std::vector<Inclusion> inclusions;
  double ramp_width = 0.03;
};

/// Disk inclusions: background raised to inclusion_value inside each disk,
/// with a C1 radial ramp of the given width centred on the rim, overlapping
/// inclusions combined by max. Gaussian: background plus one smooth bump per
/// entry with peak (inclusion_value - background).
double phantom_value(const PhantomSpec& spec, const Vec2& p);
NodalField evaluate_phantom(const TriMesh& mesh, const PhantomSpec& spec);

// ---------------------------------------------------------------------------
// Forward operator

/// sigma -> power densities h_ij = sigma grad(u_i) . grad(u_j), L2-projected
/// onto the P1 space. Holds the mass factorization; immutable and shareable.
class ForwardModel {
 public:
  ForwardModel(const TriMesh& mesh, std::vector<BoundaryInput> inputs, std::vector<MeasurementPair> pairs,
               const SolverOptions& options = {});

  const TriMesh& mesh() const { return *mesh_; }
  const std::vector<BoundaryInput>& inputs() const { return inputs_; }
  const std::vector<MeasurementPair>& pairs() const { return pairs_; }

  std::vector<NodalField> potentials(const NodalField& sigma) const;
  /// One field per measurement pair, in pair order.
  std::vector<NodalField> power_densities(const NodalField& sigma) const;
  std::vector<NodalField> power_densities(const NodalField& sigma, const std::vector<NodalField>& potentials) const;

  /// L2 projection of a cellwise constant field onto P1.
  NodalField project(const VectorXd& cell_values) const;

 private:
  const TriMesh* mesh_;
  std::vector<BoundaryInput> inputs_;
  std::vector<MeasurementPair> pairs_;
  SolverOptions options_;
  SpdSolver mass_;
};

/// Per-cell sigma grad(u_i) . grad(u_j) with sigma averaged per cell.
VectorXd cell_power_density(const TriMesh& mesh, const NodalField& sigma, const NodalField& ui,
                            const NodalField& uj);

// ---------------------------------------------------------------------------
// Synthetic data

struct NoisySignal {
  MeasurementPair pair;
  NodalField h;      // noise-free, coarse mesh
  NodalField y;      // observed
  double tau_noise = 0.0;
  double d_noise = 0.0;
  NormKind norm_kind = NormKind::L2;
  std::uint64_t seed = 0;
  int ell_bound = 1;
  double view_fraction = 1.0;
  /// Set when d_noise = 0: the data are usable by the analytic pipeline only.
  bool zero_noise = false;
};

/// y = h + s * eps with eps iid standard normal per coarse vertex and
/// s = d * ||h|| / ||eps|| in the chosen norm, so that ||y - h|| / ||h|| = d.
NoisySignal add_noise(const TriMesh& mesh, const NodalField& h, const MeasurementPair& pair, double d_noise,
                      NormKind norm_kind, std::uint64_t seed);

/// Power densities computed on the fine mesh, restricted to the coarse
/// vertices through the injection map, then perturbed by add_noise. Each pair
/// draws from its own named random stream.
std::vector<NoisySignal> generate_data(const NodalField& sigma_fine, const NestedMeshPair& meshes,
                                       const InputSpec& inputs, double d_noise, NormKind norm_kind,
                                       std::uint64_t seed, const SolverOptions& options = {});

// ---------------------------------------------------------------------------
// Jacobian condition

struct JacobianReport {
  VectorXd det;  // per cell det[grad u1, grad u2]
  double min_det = 0.0;
  double max_abs_det = 0.0;
  double fraction_nonpositive = 0.0;
  /// True when some cell has det < -tolerance * max|det|, i.e. a genuinely
  /// reversed orientation rather than rounding on the grounded arc.
  bool reversed(double tolerance) const { return min_det < -tolerance * max_abs_det; }
};

JacobianReport check_jacobian_condition(const TriMesh& mesh, const NodalField& u1, const NodalField& u2);

}  // namespace aet
