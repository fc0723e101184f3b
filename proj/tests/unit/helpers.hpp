// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "aet/fem.hpp"
#include "aet/mesh.hpp"

namespace aet::test {

/// Nodal values of g at boundary vertices, zero in the interior.
template <typename Fn>
NodalField boundary_lifting(const TriMesh& mesh, Fn&& g) {
  NodalField out = NodalField::Zero(mesh.num_vertices());
  for (int v : mesh.boundary_loop()) out[v] = g(mesh.vertex(v));
  return out;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("aet_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace aet::test
