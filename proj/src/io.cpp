// SPDX-License-Identifier: Apache-2.0

#include "aet/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace aet {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& text, const std::filesystem::path& path, int line) {
  double v = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin < end && *begin == ' ') ++begin;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw DataQualityError(path.string() + ":" + std::to_string(line) + ": not a number: '" + text + "'");
  }
  return v;
}

// Rows of a numeric CSV with the expected header.
std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path, const std::string& header) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw DataQualityError(path.string() + ": expected header '" + header + "'");
  }
  const std::size_t columns = split_csv_line(header).size();
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != columns) {
      throw DataQualityError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                             " columns");
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(c, path, line_no));
    rows.push_back(std::move(row));
  }
  return rows;
}

void check_rows_match_mesh(const std::vector<std::vector<double>>& rows, const TriMesh& mesh,
                           const std::filesystem::path& path) {
  if (static_cast<int>(rows.size()) != mesh.num_vertices()) {
    throw DomainError(path.string() + ": " + std::to_string(rows.size()) + " rows but the mesh has " +
                      std::to_string(mesh.num_vertices()) + " vertices");
  }
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const auto& r = rows[v];
    if (static_cast<int>(r[0]) != v || (Vec2(r[1], r[2]) - mesh.vertex(v)).norm() > 1e-9) {
      throw DomainError(path.string() + ": row " + std::to_string(v) + " does not match the mesh vertex");
    }
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << contents;
    if (!out) throw Error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_mesh_file(const std::filesystem::path& path, const TriMesh& mesh) {
  std::ostringstream ss;
  mesh.write(ss);
  write_text_file(path, ss.str());
}

TriMesh read_mesh_file(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  try {
    return TriMesh::read(in);
  } catch (const DomainError& e) {
    throw DomainError(path.string() + ": " + e.what());
  }
}

std::string nodal_field_csv(const TriMesh& mesh, const NodalField& field) {
  if (field.size() != mesh.num_vertices()) throw DomainError("field length does not match the mesh");
  std::string out = "vertex,x,y,value\n";
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    out += std::to_string(v) + ',' + format_double(mesh.vertex(v).x()) + ',' + format_double(mesh.vertex(v).y()) +
           ',' + format_double(field[v]) + '\n';
  }
  return out;
}

void write_nodal_field(const std::filesystem::path& path, const TriMesh& mesh, const NodalField& field) {
  write_text_file(path, nodal_field_csv(mesh, field));
}

NodalField read_nodal_field(const std::filesystem::path& path, const TriMesh* mesh) {
  const auto rows = read_numeric_csv(path, "vertex,x,y,value");
  if (mesh) check_rows_match_mesh(rows, *mesh, path);
  NodalField out(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<int>(i)] = rows[i][3];
  return out;
}

void write_signal(const std::filesystem::path& csv_path, const std::filesystem::path& json_path, const TriMesh& mesh,
                  const NoisySignal& s) {
  std::string csv = "vertex,x,y,h,y_obs\n";
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    csv += std::to_string(v) + ',' + format_double(mesh.vertex(v).x()) + ',' + format_double(mesh.vertex(v).y()) +
           ',' + format_double(s.h[v]) + ',' + format_double(s.y[v]) + '\n';
  }
  write_text_file(csv_path, csv);
  json meta;
  meta["d_noise"] = s.d_noise;
  meta["norm_kind"] = to_string(s.norm_kind);
  meta["tau_noise"] = s.tau_noise;
  meta["seed"] = s.seed;
  meta["ell_bound"] = s.ell_bound;
  meta["view_fraction"] = s.view_fraction;
  meta["pair"] = {s.pair.i, s.pair.j};
  meta["zero_noise"] = s.zero_noise;
  write_text_file(json_path, meta.dump(2) + "\n");
}

NoisySignal read_signal(const std::filesystem::path& csv_path, const std::filesystem::path& json_path,
                        const TriMesh& mesh) {
  const auto rows = read_numeric_csv(csv_path, "vertex,x,y,h,y_obs");
  check_rows_match_mesh(rows, mesh, csv_path);
  NoisySignal s;
  s.h.resize(mesh.num_vertices());
  s.y.resize(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    s.h[v] = rows[v][3];
    s.y[v] = rows[v][4];
  }
  try {
    const json meta = json::parse(read_text_file(json_path));
    s.d_noise = meta.at("d_noise").get<double>();
    const std::string kind = meta.at("norm_kind").get<std::string>();
    if (kind != "L1" && kind != "L2") throw DataQualityError(json_path.string() + ": norm_kind must be L1 or L2");
    s.norm_kind = kind == "L1" ? NormKind::L1 : NormKind::L2;
    s.tau_noise = meta.at("tau_noise").get<double>();
    s.seed = meta.at("seed").get<std::uint64_t>();
    s.ell_bound = meta.at("ell_bound").get<int>();
    s.view_fraction = meta.at("view_fraction").get<double>();
    s.pair = {meta.at("pair").at(0).get<int>(), meta.at("pair").at(1).get<int>()};
    s.zero_noise = meta.value("zero_noise", s.tau_noise == 0.0);
  } catch (const json::exception& e) {
    throw DataQualityError(json_path.string() + ": " + e.what());
  }
  return s;
}

std::string chain_csv(const Chain& chain, int thin) {
  thin = std::max(1, thin);
  const int k = static_cast<int>(chain.samples.cols());
  std::string out = "iter,accepted,beta,phase";
  for (int c = 0; c < k; ++c) out += ",x_" + std::to_string(c);
  out += '\n';
  for (int it = 0; it < chain.size(); it += thin) {
    out += std::to_string(it) + ',' + (chain.accepted[it] ? "1" : "0") + ',' + format_double(chain.beta[it]) + ',' +
           (chain.phase(it) == Phase::Warmup ? "warmup" : "online");
    for (int c = 0; c < k; ++c) out += ',' + format_double(chain.samples(it, c));
    out += '\n';
  }
  return out;
}

}  // namespace aet
