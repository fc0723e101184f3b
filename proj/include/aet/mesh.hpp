// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "aet/types.hpp"

namespace aet {

/// Closed boundary arc [offset, offset + 2*pi*fraction] on the unit circle.
struct ViewArc {
  double offset = 0.0;
  double fraction = 1.0;

  double length() const;
  /// Angle of `t` measured counterclockwise from the arc start, in [0, 2*pi).
  double local_angle(double t) const;
  bool contains(double t, double tol = 1e-12) const;
};

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  double t_mid = 0.0;  // arc parameter of the edge midpoint, in [0, 2*pi)
  bool gamma1 = false;
};

/// Triangulated unit disk with the boundary split into the driven arc
/// (Gamma_1) and the grounded remainder (Gamma_2).
///
/// Immutable after construction; `validate()` checks every structural
/// invariant and throws DomainError on the first violation.
class TriMesh {
 public:
  TriMesh() = default;
  TriMesh(Eigen::Matrix<double, Eigen::Dynamic, 2> vertices,
          Eigen::Matrix<int, Eigen::Dynamic, 3> triangles,
          std::vector<BoundaryEdge> boundary, ViewArc arc);

  int num_vertices() const { return static_cast<int>(vertices_.rows()); }
  int num_triangles() const { return static_cast<int>(triangles_.rows()); }

  const Eigen::Matrix<double, Eigen::Dynamic, 2>& vertices() const { return vertices_; }
  const Eigen::Matrix<int, Eigen::Dynamic, 3>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }
  const ViewArc& arc() const { return arc_; }

  Vec2 vertex(int i) const { return vertices_.row(i).transpose(); }
  std::array<int, 3> triangle(int t) const {
    return {triangles_(t, 0), triangles_(t, 1), triangles_(t, 2)};
  }

  bool is_boundary(int v) const { return boundary_mask_[v] != 0; }
  bool in_gamma1(int v) const { return gamma1_mask_[v] != 0; }
  /// Boundary vertices in counterclockwise order starting nearest angle 0.
  const std::vector<int>& boundary_loop() const { return boundary_loop_; }
  /// Vertices not on the boundary, ascending.
  const std::vector<int>& interior_vertices() const { return interior_; }

  double signed_area(int t) const;
  double area() const;
  double min_angle_degrees() const;
  double max_edge_length() const;
  /// Summed length of boundary edges marked Gamma_1.
  double gamma1_length() const;

  /// Arc parameter of a boundary vertex in [0, 2*pi).
  double boundary_angle(int v) const;

  void validate() const;

  void write(std::ostream& os) const;
  static TriMesh read(std::istream& is);

 private:
  void index_boundary();

  Eigen::Matrix<double, Eigen::Dynamic, 2> vertices_;
  Eigen::Matrix<int, Eigen::Dynamic, 3> triangles_;
  std::vector<BoundaryEdge> boundary_;
  ViewArc arc_;
  std::vector<char> boundary_mask_;
  std::vector<char> gamma1_mask_;
  std::vector<int> boundary_loop_;
  std::vector<int> interior_;
};

struct NestedMeshPair {
  TriMesh coarse;
  TriMesh fine;
  std::vector<int> injection;  // coarse vertex -> fine vertex

  /// Nodal values of a fine-mesh field at the coarse vertices.
  NodalField restrict_to_coarse(const NodalField& fine_values) const;
};

/// Ring count used for a target cell size.
int rings_for_cell_size(double target_h);

/// Structured-polar triangulation of the unit disk: ring k (k = 1..N) holds
/// 6k equally spaced vertices at radius k/N, neighbouring rings are zipped
/// together by angle. Pure function of its arguments.
TriMesh build_disk_mesh(double target_h, double view_fraction, double view_offset);

/// Uniform 1-to-4 refinement with boundary midpoints projected onto the circle.
NestedMeshPair refine_nested(const TriMesh& coarse);

}  // namespace aet
