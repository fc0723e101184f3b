// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aet/forward.hpp"
#include "aet/inference.hpp"
#include "aet/mesh.hpp"
#include "aet/types.hpp"

namespace aet {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary file and renames it into place.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

void write_mesh_file(const std::filesystem::path& path, const TriMesh& mesh);
TriMesh read_mesh_file(const std::filesystem::path& path);

/// CSV with header `vertex,x,y,value`.
std::string nodal_field_csv(const TriMesh& mesh, const NodalField& field);
void write_nodal_field(const std::filesystem::path& path, const TriMesh& mesh, const NodalField& field);
/// Checks the vertex count and coordinates against the mesh when given.
NodalField read_nodal_field(const std::filesystem::path& path, const TriMesh* mesh = nullptr);

/// CSV `vertex,x,y,h,y_obs` plus a JSON sidecar with the noise metadata.
void write_signal(const std::filesystem::path& csv_path, const std::filesystem::path& json_path, const TriMesh& mesh,
                  const NoisySignal& signal);
NoisySignal read_signal(const std::filesystem::path& csv_path, const std::filesystem::path& json_path,
                        const TriMesh& mesh);

/// CSV `iter,accepted,beta,phase,x_0..x_{K-1}`, keeping every `thin`-th row.
std::string chain_csv(const Chain& chain, int thin);

}  // namespace aet
