// SPDX-License-Identifier: Apache-2.0

#include "aet/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace aet {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double t) {
  double w = std::fmod(t, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w -= kTwoPi;
  return w;
}

double polar_angle(const Vec2& p) { return wrap_angle(std::atan2(p.y(), p.x())); }

}  // namespace

// ---------------------------------------------------------------------------
// ViewArc

double ViewArc::length() const { return kTwoPi * fraction; }

double ViewArc::local_angle(double t) const { return wrap_angle(t - offset); }

bool ViewArc::contains(double t, double tol) const {
  if (fraction >= 1.0) return true;
  const double s = local_angle(t);
  return s <= length() + tol || s >= kTwoPi - tol;
}

// ---------------------------------------------------------------------------
// TriMesh

TriMesh::TriMesh(Eigen::Matrix<double, Eigen::Dynamic, 2> vertices,
                 Eigen::Matrix<int, Eigen::Dynamic, 3> triangles,
                 std::vector<BoundaryEdge> boundary, ViewArc arc)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_(std::move(boundary)),
      arc_(arc) {
  index_boundary();
}

void TriMesh::index_boundary() {
  const int nv = num_vertices();
  boundary_mask_.assign(nv, 0);
  gamma1_mask_.assign(nv, 0);
  for (const auto& e : boundary_) {
    if (e.a < 0 || e.a >= nv || e.b < 0 || e.b >= nv) {
      throw DomainError("boundary edge references a vertex out of range");
    }
    boundary_mask_[e.a] = 1;
    boundary_mask_[e.b] = 1;
  }
  boundary_loop_.clear();
  interior_.clear();
  for (int v = 0; v < nv; ++v) {
    if (boundary_mask_[v]) {
      boundary_loop_.push_back(v);
      gamma1_mask_[v] = arc_.contains(boundary_angle(v)) ? 1 : 0;
    } else {
      interior_.push_back(v);
    }
  }
  std::stable_sort(boundary_loop_.begin(), boundary_loop_.end(),
                   [this](int a, int b) { return boundary_angle(a) < boundary_angle(b); });
  for (auto& e : boundary_) {
    const Vec2 mid = 0.5 * (vertex(e.a) + vertex(e.b));
    e.t_mid = polar_angle(mid);
    e.gamma1 = gamma1_mask_[e.a] && gamma1_mask_[e.b];
  }
}

double TriMesh::boundary_angle(int v) const { return polar_angle(vertex(v)); }

double TriMesh::signed_area(int t) const {
  const Vec2 a = vertex(triangles_(t, 0));
  const Vec2 b = vertex(triangles_(t, 1));
  const Vec2 c = vertex(triangles_(t, 2));
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

double TriMesh::area() const {
  double total = 0.0;
  for (int t = 0; t < num_triangles(); ++t) total += signed_area(t);
  return total;
}

double TriMesh::min_angle_degrees() const {
  double worst = 180.0;
  for (int t = 0; t < num_triangles(); ++t) {
    const auto tri = triangle(t);
    for (int k = 0; k < 3; ++k) {
      const Vec2 p = vertex(tri[k]);
      const Vec2 u = vertex(tri[(k + 1) % 3]) - p;
      const Vec2 w = vertex(tri[(k + 2) % 3]) - p;
      const double cosine = u.dot(w) / (u.norm() * w.norm());
      const double angle = std::acos(std::clamp(cosine, -1.0, 1.0)) * 180.0 / std::numbers::pi;
      worst = std::min(worst, angle);
    }
  }
  return worst;
}

double TriMesh::max_edge_length() const {
  double longest = 0.0;
  for (int t = 0; t < num_triangles(); ++t) {
    const auto tri = triangle(t);
    for (int k = 0; k < 3; ++k) {
      longest = std::max(longest, (vertex(tri[k]) - vertex(tri[(k + 1) % 3])).norm());
    }
  }
  return longest;
}

double TriMesh::gamma1_length() const {
  double len = 0.0;
  for (const auto& e : boundary_) {
    if (e.gamma1) len += (vertex(e.a) - vertex(e.b)).norm();
  }
  return len;
}

void TriMesh::validate() const {
  const int nv = num_vertices();
  for (int t = 0; t < num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) {
      if (triangles_(t, k) < 0 || triangles_(t, k) >= nv) {
        throw DomainError("triangle " + std::to_string(t) + " references a vertex out of range");
      }
    }
    if (!(signed_area(t) > 0.0)) {
      throw DomainError("triangle " + std::to_string(t) + " has nonpositive signed area");
    }
  }
  for (int v : boundary_loop_) {
    if (std::abs(vertex(v).norm() - 1.0) > 1e-9) {
      throw DomainError("boundary vertex " + std::to_string(v) + " is off the unit circle");
    }
  }

  // Duplicate vertices: sort by x and compare within the tolerance window.
  std::vector<int> order(nv);
  for (int i = 0; i < nv; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [this](int a, int b) { return vertices_(a, 0) < vertices_(b, 0); });
  for (int i = 0; i < nv; ++i) {
    for (int j = i + 1; j < nv && vertices_(order[j], 0) - vertices_(order[i], 0) <= 1e-12; ++j) {
      if (std::abs(vertices_(order[j], 1) - vertices_(order[i], 1)) <= 1e-12) {
        throw DomainError("duplicate vertices " + std::to_string(order[i]) + " and " +
                          std::to_string(order[j]));
      }
    }
  }

  // Gamma_1 must be one nonempty contiguous run along the boundary loop.
  const auto& loop = boundary_loop_;
  const int nb = static_cast<int>(loop.size());
  int members = 0;
  int transitions = 0;
  for (int i = 0; i < nb; ++i) {
    members += gamma1_mask_[loop[i]];
    if (gamma1_mask_[loop[i]] != gamma1_mask_[loop[(i + 1) % nb]]) ++transitions;
  }
  if (members == 0) throw DomainError("Gamma_1 is empty");
  if (transitions > 2) throw DomainError("Gamma_1 is not a single contiguous arc");
  if (static_cast<int>(boundary_.size()) != nb) {
    throw DomainError("boundary edge count does not match boundary vertex count");
  }
}

void TriMesh::write(std::ostream& os) const {
  std::ostringstream buf;
  buf.precision(17);
  buf << "aetmesh v1\n";
  buf << "vertices " << num_vertices() << '\n';
  for (int v = 0; v < num_vertices(); ++v) buf << vertices_(v, 0) << ' ' << vertices_(v, 1) << '\n';
  buf << "triangles " << num_triangles() << '\n';
  for (int t = 0; t < num_triangles(); ++t) {
    buf << triangles_(t, 0) << ' ' << triangles_(t, 1) << ' ' << triangles_(t, 2) << '\n';
  }
  buf << "boundary " << boundary_.size() << '\n';
  for (const auto& e : boundary_) {
    buf << e.a << ' ' << e.b << ' ' << e.t_mid << ' ' << (e.gamma1 ? 1 : 0) << '\n';
  }
  buf << "arc " << arc_.offset << ' ' << arc_.fraction << '\n';
  os << buf.str();
}

TriMesh TriMesh::read(std::istream& is) {
  auto expect = [&is](const std::string& word) {
    std::string got;
    if (!(is >> got) || got != word) {
      throw DomainError("mesh file: expected '" + word + "', got '" + got + "'");
    }
  };
  expect("aetmesh");
  expect("v1");
  int nv = 0;
  expect("vertices");
  is >> nv;
  Eigen::Matrix<double, Eigen::Dynamic, 2> verts(nv, 2);
  for (int v = 0; v < nv; ++v) is >> verts(v, 0) >> verts(v, 1);
  int nt = 0;
  expect("triangles");
  is >> nt;
  Eigen::Matrix<int, Eigen::Dynamic, 3> tris(nt, 3);
  for (int t = 0; t < nt; ++t) is >> tris(t, 0) >> tris(t, 1) >> tris(t, 2);
  int nb = 0;
  expect("boundary");
  is >> nb;
  std::vector<BoundaryEdge> edges(nb);
  for (auto& e : edges) {
    int flag = 0;
    is >> e.a >> e.b >> e.t_mid >> flag;
    e.gamma1 = flag != 0;
  }
  if (!is) throw DomainError("mesh file: truncated or malformed");

  std::string word;
  if (is >> word) {
    if (word != "arc") throw DomainError("mesh file: expected 'arc', got '" + word + "'");
    ViewArc arc;
    if (!(is >> arc.offset >> arc.fraction)) throw DomainError("mesh file: malformed arc line");
    return TriMesh(std::move(verts), std::move(tris), std::move(edges), arc);
  }

  // No arc line: recover the driven arc from the flagged edges.
  // The run of flagged edges along the loop starts and ends at the arc endpoints.
  ViewArc arc;
  const bool all = std::all_of(edges.begin(), edges.end(), [](const auto& e) { return e.gamma1; });
  if (!all) {
    std::vector<char> flagged(nv, 0);
    for (const auto& e : edges) {
      if (e.gamma1) flagged[e.a] = flagged[e.b] = 1;
    }
    TriMesh probe(verts, tris, edges, ViewArc{});
    const auto& loop = probe.boundary_loop();
    const int n = static_cast<int>(loop.size());
    int start = -1;
    int stop = -1;
    for (int i = 0; i < n; ++i) {
      const bool cur = flagged[loop[i]];
      const bool prev = flagged[loop[(i + n - 1) % n]];
      const bool next = flagged[loop[(i + 1) % n]];
      if (cur && !prev) start = loop[i];
      if (cur && !next) stop = loop[i];
    }
    if (start < 0 || stop < 0) throw DomainError("mesh file: no Gamma_1 edges flagged");
    arc.offset = probe.boundary_angle(start);
    arc.fraction = wrap_angle(probe.boundary_angle(stop) - arc.offset) / kTwoPi;
  }
  return TriMesh(std::move(verts), std::move(tris), std::move(edges), arc);
}

// ---------------------------------------------------------------------------
// Generation

int rings_for_cell_size(double target_h) {
  return std::max(1, static_cast<int>(std::ceil(1.0 / target_h - 1e-9)));
}

TriMesh build_disk_mesh(double target_h, double view_fraction, double view_offset) {
  if (!(target_h > 0.0 && target_h <= 0.5)) {
    throw DomainError("target_h must lie in (0, 0.5]");
  }
  if (!(view_fraction > 0.0 && view_fraction <= 1.0)) {
    throw DomainError("view_fraction must lie in (0, 1]");
  }
  if (!(view_offset >= 0.0 && view_offset < kTwoPi)) {
    throw DomainError("view_offset must lie in [0, 2*pi)");
  }

  const int rings = rings_for_cell_size(target_h);
  const int nv = 1 + 3 * rings * (rings + 1);
  auto ring_start = [](int k) { return 1 + 3 * k * (k - 1); };

  Eigen::Matrix<double, Eigen::Dynamic, 2> verts(nv, 2);
  verts.row(0).setZero();
  for (int k = 1; k <= rings; ++k) {
    const int count = 6 * k;
    const double radius = static_cast<double>(k) / rings;
    for (int j = 0; j < count; ++j) {
      const double angle = kTwoPi * j / count;
      verts(ring_start(k) + j, 0) = k == rings ? std::cos(angle) : radius * std::cos(angle);
      verts(ring_start(k) + j, 1) = k == rings ? std::sin(angle) : radius * std::sin(angle);
    }
  }

  std::vector<std::array<int, 3>> tris;
  tris.reserve(6 * rings * rings);
  for (int j = 0; j < 6; ++j) tris.push_back({0, ring_start(1) + j, ring_start(1) + (j + 1) % 6});

  for (int k = 2; k <= rings; ++k) {
    const int n_in = 6 * (k - 1);
    const int n_out = 6 * k;
    const int s_in = ring_start(k - 1);
    const int s_out = ring_start(k);
    int i = 0;
    int o = 0;
    while (i < n_in || o < n_out) {
      const double next_in = static_cast<double>(i + 1) / n_in;
      const double next_out = static_cast<double>(o + 1) / n_out;
      const bool advance_outer = i == n_in || (o < n_out && next_out <= next_in);
      if (advance_outer) {
        tris.push_back({s_in + i % n_in, s_out + o % n_out, s_out + (o + 1) % n_out});
        ++o;
      } else {
        tris.push_back({s_in + i % n_in, s_out + o % n_out, s_in + (i + 1) % n_in});
        ++i;
      }
    }
  }

  Eigen::Matrix<int, Eigen::Dynamic, 3> tri_mat(static_cast<int>(tris.size()), 3);
  for (int t = 0; t < tri_mat.rows(); ++t) {
    tri_mat.row(t) << tris[t][0], tris[t][1], tris[t][2];
  }

  std::vector<BoundaryEdge> edges;
  const int s_bd = ring_start(rings);
  const int n_bd = 6 * rings;
  for (int j = 0; j < n_bd; ++j) {
    edges.push_back({s_bd + j, s_bd + (j + 1) % n_bd, 0.0, false});
  }

  TriMesh mesh(std::move(verts), std::move(tri_mat), std::move(edges),
               ViewArc{view_offset, view_fraction});
  mesh.validate();
  return mesh;
}

NestedMeshPair refine_nested(const TriMesh& coarse) {
  coarse.validate();
  const int nv = coarse.num_vertices();
  const int nt = coarse.num_triangles();

  std::unordered_map<long long, int> midpoint;
  std::vector<Vec2> new_vertices;
  std::unordered_map<long long, char> on_boundary;
  for (const auto& e : coarse.boundary_edges()) {
    on_boundary[static_cast<long long>(std::min(e.a, e.b)) * nv + std::max(e.a, e.b)] = 1;
  }

  auto mid_index = [&](int a, int b) {
    const long long key = static_cast<long long>(std::min(a, b)) * nv + std::max(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    Vec2 m = 0.5 * (coarse.vertex(a) + coarse.vertex(b));
    if (on_boundary.count(key)) m.normalize();
    const int idx = nv + static_cast<int>(new_vertices.size());
    new_vertices.push_back(m);
    midpoint.emplace(key, idx);
    return idx;
  };

  Eigen::Matrix<int, Eigen::Dynamic, 3> tris(4 * nt, 3);
  for (int t = 0; t < nt; ++t) {
    const auto [a, b, c] = coarse.triangle(t);
    const int ab = mid_index(a, b);
    const int bc = mid_index(b, c);
    const int ca = mid_index(c, a);
    tris.row(4 * t + 0) << a, ab, ca;
    tris.row(4 * t + 1) << ab, b, bc;
    tris.row(4 * t + 2) << ca, bc, c;
    tris.row(4 * t + 3) << ab, bc, ca;
  }

  Eigen::Matrix<double, Eigen::Dynamic, 2> verts(nv + static_cast<int>(new_vertices.size()), 2);
  verts.topRows(nv) = coarse.vertices();
  for (std::size_t i = 0; i < new_vertices.size(); ++i) {
    verts.row(nv + static_cast<int>(i)) = new_vertices[i].transpose();
  }

  std::vector<BoundaryEdge> edges;
  for (const auto& e : coarse.boundary_edges()) {
    const int m = mid_index(e.a, e.b);
    edges.push_back({e.a, m, 0.0, false});
    edges.push_back({m, e.b, 0.0, false});
  }

  NestedMeshPair pair;
  pair.coarse = coarse;
  pair.fine = TriMesh(std::move(verts), std::move(tris), std::move(edges), coarse.arc());
  pair.fine.validate();
  pair.injection.resize(nv);
  for (int v = 0; v < nv; ++v) pair.injection[v] = v;
  return pair;
}

NodalField NestedMeshPair::restrict_to_coarse(const NodalField& fine_values) const {
  if (fine_values.size() != fine.num_vertices()) {
    throw DomainError("restrict_to_coarse: field length does not match the fine mesh");
  }
  NodalField out(coarse.num_vertices());
  for (int v = 0; v < coarse.num_vertices(); ++v) out[v] = fine_values[injection[v]];
  return out;
}

}  // namespace aet
