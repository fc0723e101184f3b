// SPDX-License-Identifier: Apache-2.0

#include "aet/prior.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "aet/fem.hpp"

namespace aet {

NodalField KLBasis::realize(const VectorXd& x) const {
  if (x.size() != size()) {
    throw DomainError("latent vector has length " + std::to_string(x.size()) + ", basis has " +
                      std::to_string(size()) + " modes");
  }
  return modes * lambdas.cwiseSqrt().cwiseProduct(x);
}

NodalField KLBasis::pointwise_variance() const { return modes.array().square().matrix() * lambdas; }

KLBasis build_kl_basis(const TriMesh& mesh, const KLOptions& options) {
  if (!(options.matern_alpha > 1.5)) throw DomainError("matern_alpha must exceed 1.5");
  if (!(options.matern_tau > 0.0)) throw DomainError("matern_tau must be positive");
  const InteriorSplit split(mesh);
  const int pool = options.effective_pool();
  if (options.n_kl < 1 || options.n_kl > pool || pool > split.size()) {
    throw DomainError("need 1 <= n_kl <= pool_size <= interior vertex count (" + std::to_string(split.size()) +
                      "), got n_kl=" + std::to_string(options.n_kl) + " pool=" + std::to_string(pool));
  }
  const SparseMatrix m = split.restrict_matrix(assemble_mass(mesh));
  const SparseMatrix a = SparseMatrix(split.restrict_matrix(assemble_laplacian(mesh)) + options.matern_tau * m);
  const EigenResult eig = eigs_smallest(a, m, pool, options.eigen);

  const VectorXd weights = eig.values.array().pow(-options.matern_alpha).matrix();
  const double total = weights.sum();

  KLBasis out;
  out.matern_tau = options.matern_tau;
  out.matern_alpha = options.matern_alpha;
  out.pool_size = pool;
  out.gammas = eig.values.head(options.n_kl);
  out.lambdas = weights.head(options.n_kl) / total;
  out.variance_retained = out.lambdas.sum();
  out.modes = MatrixXd::Zero(mesh.num_vertices(), options.n_kl);
  for (int i = 0; i < split.size(); ++i) out.modes.row(split.interior[i]) = eig.vectors.row(i).head(options.n_kl);
  return out;
}

// ---------------------------------------------------------------------------
// Cache

namespace {

constexpr char kMagic[8] = {'a', 'e', 't', 'k', 'l', 'v', '1', '\n'};

template <typename T>
std::uint64_t hash_bytes(const T* data, std::size_t count, std::uint64_t h) {
  return fnv1a(std::string_view(reinterpret_cast<const char*>(data), count * sizeof(T)), h);
}

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::istream& is, T& v) {
  return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

}  // namespace

std::uint64_t kl_cache_key(const TriMesh& mesh, const KLOptions& options) {
  std::uint64_t h = fnv1a("kl-basis");
  h = hash_bytes(mesh.vertices().data(), static_cast<std::size_t>(mesh.vertices().size()), h);
  h = hash_bytes(mesh.triangles().data(), static_cast<std::size_t>(mesh.triangles().size()), h);
  for (int v : mesh.boundary_loop()) h = hash_bytes(&v, 1, h);
  const double params[2] = {options.matern_tau, options.matern_alpha};
  const int counts[2] = {options.n_kl, options.effective_pool()};
  h = hash_bytes(params, 2, h);
  return hash_bytes(counts, 2, h);
}

void write_kl_basis(std::ostream& os, const KLBasis& basis, std::uint64_t key) {
  os.write(kMagic, sizeof(kMagic));
  put(os, key);
  put(os, basis.matern_tau);
  put(os, basis.matern_alpha);
  put(os, static_cast<std::int64_t>(basis.pool_size));
  put(os, static_cast<std::int64_t>(basis.num_vertices()));
  put(os, static_cast<std::int64_t>(basis.size()));
  put(os, basis.variance_retained);
  os.write(reinterpret_cast<const char*>(basis.gammas.data()), basis.gammas.size() * sizeof(double));
  os.write(reinterpret_cast<const char*>(basis.lambdas.data()), basis.lambdas.size() * sizeof(double));
  os.write(reinterpret_cast<const char*>(basis.modes.data()), basis.modes.size() * sizeof(double));
}

bool read_kl_basis(std::istream& is, std::uint64_t key, KLBasis& out) {
  char magic[sizeof(kMagic)];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) return false;
  std::uint64_t stored_key = 0;
  std::int64_t pool = 0, nv = 0, nkl = 0;
  KLBasis b;
  if (!get(is, stored_key) || stored_key != key) return false;
  if (!get(is, b.matern_tau) || !get(is, b.matern_alpha) || !get(is, pool) || !get(is, nv) || !get(is, nkl) ||
      !get(is, b.variance_retained)) {
    return false;
  }
  if (nv <= 0 || nkl <= 0 || pool < nkl) return false;
  b.pool_size = static_cast<int>(pool);
  b.gammas.resize(nkl);
  b.lambdas.resize(nkl);
  b.modes.resize(nv, nkl);
  if (!is.read(reinterpret_cast<char*>(b.gammas.data()), nkl * sizeof(double)) ||
      !is.read(reinterpret_cast<char*>(b.lambdas.data()), nkl * sizeof(double)) ||
      !is.read(reinterpret_cast<char*>(b.modes.data()), nv * nkl * sizeof(double))) {
    return false;
  }
  out = std::move(b);
  return true;
}

KLBasis load_or_build_kl_basis(const TriMesh& mesh, const KLOptions& options, const std::filesystem::path& dir) {
  if (dir.empty()) return build_kl_basis(mesh, options);
  const std::uint64_t key = kl_cache_key(mesh, options);
  char name[32];
  std::snprintf(name, sizeof(name), "kl_%016llx.bin", static_cast<unsigned long long>(key));
  const std::filesystem::path path = dir / name;
  {
    std::ifstream in(path, std::ios::binary);
    KLBasis cached;
    if (in && read_kl_basis(in, key, cached) && cached.num_vertices() == mesh.num_vertices()) return cached;
  }
  KLBasis basis = build_kl_basis(mesh, options);
  std::filesystem::create_directories(dir);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    write_kl_basis(out, basis, key);
    if (!out) throw Error("could not write basis cache " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
  return basis;
}

// ---------------------------------------------------------------------------
// Pushforwards

const char* to_string(PushforwardKind kind) {
  switch (kind) {
    case PushforwardKind::LogGaussian: return "F1";
    case PushforwardKind::Heaviside: return "F2";
    case PushforwardKind::Sigmoid: return "F3";
  }
  return "?";
}

PushforwardKind pushforward_from_string(const std::string& name) {
  if (name == "F1" || name == "log_gaussian") return PushforwardKind::LogGaussian;
  if (name == "F2" || name == "heaviside") return PushforwardKind::Heaviside;
  if (name == "F3" || name == "sigmoid") return PushforwardKind::Sigmoid;
  throw ConfigError("unknown pushforward '" + name + "' (expected F1, F2 or F3)");
}

double Pushforward::operator()(double x) const {
  switch (kind) {
    case PushforwardKind::LogGaussian:
      return a + b * std::exp(x);
    case PushforwardKind::Heaviside:
      return x >= 0.0 ? sigma_plus : sigma_minus;
    case PushforwardKind::Sigmoid: {
      const double z = sharpness * x;
      // Logistic function written so neither branch overflows.
      const double s = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
      return sigma_minus + (sigma_plus - sigma_minus) * s;
    }
  }
  return 0.0;
}

NodalField push(const Pushforward& map, const NodalField& x) { return x.unaryExpr([&](double v) { return map(v); }); }

}  // namespace aet
