// SPDX-License-Identifier: Apache-2.0

#include "aet/config.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "aet/io.hpp"
#include "json.hpp"

namespace aet {

using nlohmann::json;

KLOptions ExperimentConfig::kl_options() const {
  KLOptions kl;
  kl.matern_tau = prior.matern_tau;
  kl.matern_alpha = prior.matern_alpha;
  kl.n_kl = prior.n_kl;
  kl.pool_size = prior.pool_size;
  kl.eigen = eigen;
  kl.eigen.solver = solver;
  return kl;
}

namespace {

// Walks one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& message) {
    throw ConfigError((path.empty() ? std::string("/") : path) + ": " + message);
  }

  std::string path_of(const char* key) const { return path_ + "/" + key; }

  const json* find(const char* key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  void number(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(path_of(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) fail(path_of(key), "must be finite");
    }
  }

  void integer(const char* key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(path_of(key), "expected an integer");
      const auto value = v->get<std::int64_t>();
      if (value < -2147483647 || value > 2147483647) fail(path_of(key), "integer out of range");
      out = static_cast<int>(value);
    }
  }

  void seed(const char* key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) fail(path_of(key), "expected a nonnegative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void boolean(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(path_of(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(path_of(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  template <typename Fn>
  void object(const char* key, Fn&& fn) {
    if (const json* v = find(key)) {
      Reader child(*v, path_of(key));
      fn(child);
      child.finish();
    }
  }

  template <typename Fn>
  void array(const char* key, Fn&& fn) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(path_of(key), "expected an array");
      for (std::size_t i = 0; i < v->size(); ++i) fn((*v)[i], path_of(key) + "/" + std::to_string(i));
    }
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) fail(path_ + "/" + it.key(), "unknown key");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) Reader::fail(path, message);
}

std::string solver_kind_name(SolverKind k) {
  switch (k) {
    case SolverKind::Auto: return "auto";
    case SolverKind::Cholesky: return "cholesky";
    case SolverKind::ConjugateGradient: return "cg";
  }
  return "auto";
}

void read_mesh(Reader& r, MeshConfig& m) {
  r.number("target_h", m.target_h);
  r.number("view_fraction", m.view_fraction);
  r.number("view_offset", m.view_offset);
  require(m.target_h > 0.0 && m.target_h <= 0.5, r.path_of("target_h"), "must lie in (0, 0.5]");
  require(m.view_fraction > 0.0 && m.view_fraction <= 1.0, r.path_of("view_fraction"), "must lie in (0, 1]");
  require(m.view_offset >= 0.0 && m.view_offset < 2.0 * std::numbers::pi, r.path_of("view_offset"),
          "must lie in [0, 2*pi)");
}

void read_phantom(Reader& r, PhantomSpec& p) {
  std::string kind = p.kind == PhantomKind::Gaussian ? "gaussian" : "inclusions";
  r.string("kind", kind);
  require(kind == "inclusions" || kind == "gaussian", r.path_of("kind"), "must be \"inclusions\" or \"gaussian\"");
  p.kind = kind == "gaussian" ? PhantomKind::Gaussian : PhantomKind::Inclusions;
  r.number("background", p.background);
  r.number("inclusion_value", p.inclusion_value);
  r.number("ramp_width", p.ramp_width);
  require(p.background > 0.0, r.path_of("background"), "must be positive");
  require(p.inclusion_value > 0.0, r.path_of("inclusion_value"), "must be positive");
  require(p.ramp_width >= 0.0, r.path_of("ramp_width"), "must be nonnegative");
  if (r.find("inclusions")) p.inclusions.clear();
  r.array("inclusions", [&](const json& item, const std::string& path) {
    Reader ir(item, path);
    Inclusion inc;
    ir.array("center", [&](const json& c, const std::string& cpath) {
      require(c.is_number(), cpath, "expected a number");
      const int idx = std::stoi(cpath.substr(cpath.rfind('/') + 1));
      require(idx < 2, cpath, "center has two coordinates");
      inc.center[idx] = c.get<double>();
    });
    if (const json* c = ir.find("center")) require(c->size() == 2, path + "/center", "expected [x, y]");
    ir.number("radius", inc.radius);
    ir.finish();
    require(inc.radius > 0.0, path + "/radius", "must be positive");
    require(inc.center.norm() < 1.0, path + "/center", "must lie inside the unit disk");
    p.inclusions.push_back(inc);
  });
  if (p.kind == PhantomKind::Inclusions) {
    require(p.background + std::min(0.0, p.inclusion_value - p.background) > 0.0, r.path_of("inclusion_value"),
            "conductivity must stay positive");
  }
}

void read_inputs(Reader& r, InputSpec& in, LikelihoodPairs& pairs) {
  if (r.find("ell_bound")) in.ell_bound.clear();
  r.array("ell_bound", [&](const json& v, const std::string& path) {
    require(v.is_number_integer() && v.get<std::int64_t>() >= 1 && v.get<std::int64_t>() <= 1000, path,
            "must be an integer in [1, 1000]");
    in.ell_bound.push_back(v.get<int>());
  });
  require(!in.ell_bound.empty(), r.path_of("ell_bound"), "needs at least one entry");
  r.boolean("include_f2", in.include_f2);
  std::string lp = pairs == LikelihoodPairs::All ? "all" : "cosine_diagonal";
  r.string("likelihood_pairs", lp);
  require(lp == "all" || lp == "cosine_diagonal", r.path_of("likelihood_pairs"),
          "must be \"cosine_diagonal\" or \"all\"");
  pairs = lp == "all" ? LikelihoodPairs::All : LikelihoodPairs::CosineDiagonal;
}

void read_noise(Reader& r, NoiseConfig& n) {
  r.number("d_noise", n.d_noise);
  require(n.d_noise >= 0.0, r.path_of("d_noise"), "must be nonnegative");
  std::string norm = to_string(n.norm);
  r.string("norm", norm);
  require(norm == "L1" || norm == "L2", r.path_of("norm"), "must be \"L1\" or \"L2\"");
  n.norm = norm == "L1" ? NormKind::L1 : NormKind::L2;
  r.seed("seed", n.seed);
}

void read_prior(Reader& r, PriorConfig& p) {
  std::string kind = to_string(p.map.kind);
  r.string("kind", kind);
  require(kind == "F1" || kind == "F2" || kind == "F3", r.path_of("kind"), "must be \"F1\", \"F2\" or \"F3\"");
  p.map.kind = pushforward_from_string(kind);
  r.number("matern_tau", p.matern_tau);
  r.number("matern_alpha", p.matern_alpha);
  r.integer("n_kl", p.n_kl);
  r.integer("pool_size", p.pool_size);
  r.number("sigma_minus", p.map.sigma_minus);
  r.number("sigma_plus", p.map.sigma_plus);
  r.number("sharpness", p.map.sharpness);
  r.number("a", p.map.a);
  r.number("b", p.map.b);
  require(p.matern_tau > 0.0, r.path_of("matern_tau"), "must be positive");
  require(p.matern_alpha > 1.5, r.path_of("matern_alpha"), "must exceed 1.5");
  require(p.n_kl >= 1, r.path_of("n_kl"), "must be at least 1");
  require(p.pool_size == 0 || p.pool_size >= p.n_kl, r.path_of("pool_size"), "must be 0 or at least n_kl");
  require(p.map.sigma_minus > 0.0, r.path_of("sigma_minus"), "must be positive");
  require(p.map.sigma_plus > p.map.sigma_minus, r.path_of("sigma_plus"), "must exceed sigma_minus");
  require(p.map.sharpness > 0.0, r.path_of("sharpness"), "must be positive");
  require(p.map.a >= 0.0, r.path_of("a"), "must be nonnegative");
  require(p.map.b > 0.0, r.path_of("b"), "must be positive");
}

void read_sampler(Reader& r, SamplerOptions& s) {
  r.integer("n_warmup", s.n_warmup);
  r.integer("n_samples", s.n_samples);
  r.number("beta0", s.beta0);
  r.integer("thin", s.thin);
  r.seed("seed", s.seed);
  r.integer("n_chains", s.n_chains);
  r.number("target_accept", s.target_accept);
  r.integer("adapt_window", s.adapt_window);
  r.number("adapt_decay", s.adapt_decay);
  r.number("beta_min", s.beta_min);
  r.number("beta_max", s.beta_max);
  r.integer("burn_in_drop", s.burn_in_drop);
  require(s.n_warmup >= 0, r.path_of("n_warmup"), "must be nonnegative");
  require(s.n_samples >= 1, r.path_of("n_samples"), "must be at least 1");
  require(s.beta0 > 0.0 && s.beta0 < 1.0, r.path_of("beta0"), "must lie in (0, 1)");
  require(s.thin >= 1, r.path_of("thin"), "must be at least 1");
  require(s.n_chains >= 1, r.path_of("n_chains"), "must be at least 1");
  require(s.target_accept > 0.0 && s.target_accept < 1.0, r.path_of("target_accept"), "must lie in (0, 1)");
  require(s.adapt_window >= 1, r.path_of("adapt_window"), "must be at least 1");
  require(s.adapt_decay > 0.0 && s.adapt_decay <= 1.0, r.path_of("adapt_decay"), "must lie in (0, 1]");
  require(s.beta_min > 0.0 && s.beta_min < 1.0, r.path_of("beta_min"), "must lie in (0, 1)");
  require(s.beta_max > s.beta_min && s.beta_max < 1.0, r.path_of("beta_max"), "must lie in (beta_min, 1)");
  require(s.burn_in_drop >= 0 && s.burn_in_drop < s.n_samples, r.path_of("burn_in_drop"),
          "must lie in [0, n_samples)");
}

void read_analytic(Reader& r, AnalyticOptions& a) {
  r.number("threshold_b", a.threshold_b);
  require(a.threshold_b > 0.0, r.path_of("threshold_b"), "must be positive");
  std::string gauge = to_string(a.gauge);
  r.string("gauge", gauge);
  require(gauge == "derived" || gauge == "rotated" || gauge == "literal", r.path_of("gauge"),
          "must be \"derived\", \"rotated\" or \"literal\"");
  a.gauge = gauge_from_string(gauge);
  r.number("jacobian_tolerance", a.jacobian_tolerance);
  require(a.jacobian_tolerance >= 0.0 && a.jacobian_tolerance < 1.0, r.path_of("jacobian_tolerance"),
          "must lie in [0, 1)");
}

void read_solver(Reader& r, SolverOptions& s) {
  std::string kind = solver_kind_name(s.kind);
  r.string("kind", kind);
  require(kind == "auto" || kind == "cholesky" || kind == "cg", r.path_of("kind"),
          "must be \"auto\", \"cholesky\" or \"cg\"");
  s.kind = kind == "cholesky" ? SolverKind::Cholesky : kind == "cg" ? SolverKind::ConjugateGradient : SolverKind::Auto;
  r.number("cg_tolerance", s.cg_tolerance);
  r.integer("cg_max_iterations", s.cg_max_iterations);
  r.integer("cholesky_max_unknowns", s.cholesky_max_unknowns);
  require(s.cg_tolerance > 0.0 && s.cg_tolerance < 1.0, r.path_of("cg_tolerance"), "must lie in (0, 1)");
  require(s.cg_max_iterations >= 1, r.path_of("cg_max_iterations"), "must be at least 1");
  require(s.cholesky_max_unknowns >= 1, r.path_of("cholesky_max_unknowns"), "must be at least 1");
}

void read_eigen(Reader& r, EigenOptions& e) {
  r.number("tolerance", e.tolerance);
  r.integer("block_size", e.block_size);
  r.number("max_basis_factor", e.max_basis_factor);
  r.integer("dense_max_size", e.dense_max_size);
  r.seed("seed", e.seed);
  require(e.tolerance > 0.0 && e.tolerance < 1.0, r.path_of("tolerance"), "must lie in (0, 1)");
  require(e.block_size >= 1, r.path_of("block_size"), "must be at least 1");
  require(e.max_basis_factor >= 1.0, r.path_of("max_basis_factor"), "must be at least 1");
  require(e.dense_max_size >= 0, r.path_of("dense_max_size"), "must be nonnegative");
}

std::pair<int, int> line_and_column(const std::string& text, std::size_t byte) {
  int line = 1;
  int column = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_and_column(text, e.byte);
    std::string what = e.what();
    const auto pos = what.find("parse error");
    throw ConfigError("syntax error at line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                      (pos == std::string::npos ? what : what.substr(pos)));
  }
  ExperimentConfig c;
  Reader r(doc, "");
  r.integer("schema", c.schema);
  if (!r.find("schema")) Reader::fail("/schema", "missing (expected " + std::to_string(kConfigSchema) + ")");
  require(c.schema == kConfigSchema, "/schema", "unsupported schema version " + std::to_string(c.schema));
  r.string("name", c.name);
  r.object("mesh", [&](Reader& m) { read_mesh(m, c.mesh); });
  r.object("phantom", [&](Reader& p) { read_phantom(p, c.phantom); });
  r.object("inputs", [&](Reader& i) { read_inputs(i, c.inputs, c.likelihood_pairs); });
  r.object("noise", [&](Reader& n) { read_noise(n, c.noise); });
  r.object("prior", [&](Reader& p) { read_prior(p, c.prior); });
  r.object("sampler", [&](Reader& s) { read_sampler(s, c.sampler); });
  r.object("analytic", [&](Reader& a) { read_analytic(a, c.analytic); });
  r.object("compare", [&](Reader& cm) {
    cm.number("trusted_std_threshold", c.compare.trusted_std_threshold);
    require(c.compare.trusted_std_threshold > 0.0, cm.path_of("trusted_std_threshold"), "must be positive");
  });
  r.object("solver", [&](Reader& s) { read_solver(s, c.solver); });
  r.object("eigen", [&](Reader& e) { read_eigen(e, c.eigen); });
  r.object("output", [&](Reader& o) {
    o.string("dir", c.output.dir);
    o.string("basis_cache", c.output.basis_cache);
    require(!c.output.dir.empty(), o.path_of("dir"), "must not be empty");
  });
  r.finish();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  try {
    return parse_config(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string serialize_config(const ExperimentConfig& c) {
  json inclusions = json::array();
  for (const auto& inc : c.phantom.inclusions) {
    inclusions.push_back({{"center", {inc.center.x(), inc.center.y()}}, {"radius", inc.radius}});
  }
  json doc = {
      {"schema", c.schema},
      {"name", c.name},
      {"mesh", {{"target_h", c.mesh.target_h}, {"view_fraction", c.mesh.view_fraction},
                {"view_offset", c.mesh.view_offset}}},
      {"phantom", {{"kind", c.phantom.kind == PhantomKind::Gaussian ? "gaussian" : "inclusions"},
                   {"background", c.phantom.background},
                   {"inclusion_value", c.phantom.inclusion_value},
                   {"ramp_width", c.phantom.ramp_width},
                   {"inclusions", inclusions}}},
      {"inputs", {{"ell_bound", c.inputs.ell_bound},
                  {"include_f2", c.inputs.include_f2},
                  {"likelihood_pairs", c.likelihood_pairs == LikelihoodPairs::All ? "all" : "cosine_diagonal"}}},
      {"noise", {{"d_noise", c.noise.d_noise}, {"norm", to_string(c.noise.norm)}, {"seed", c.noise.seed}}},
      {"prior", {{"kind", to_string(c.prior.map.kind)},
                 {"matern_tau", c.prior.matern_tau},
                 {"matern_alpha", c.prior.matern_alpha},
                 {"n_kl", c.prior.n_kl},
                 {"pool_size", c.prior.pool_size},
                 {"sigma_minus", c.prior.map.sigma_minus},
                 {"sigma_plus", c.prior.map.sigma_plus},
                 {"sharpness", c.prior.map.sharpness},
                 {"a", c.prior.map.a},
                 {"b", c.prior.map.b}}},
      {"sampler", {{"n_warmup", c.sampler.n_warmup},
                   {"n_samples", c.sampler.n_samples},
                   {"beta0", c.sampler.beta0},
                   {"thin", c.sampler.thin},
                   {"seed", c.sampler.seed},
                   {"n_chains", c.sampler.n_chains},
                   {"target_accept", c.sampler.target_accept},
                   {"adapt_window", c.sampler.adapt_window},
                   {"adapt_decay", c.sampler.adapt_decay},
                   {"beta_min", c.sampler.beta_min},
                   {"beta_max", c.sampler.beta_max},
                   {"burn_in_drop", c.sampler.burn_in_drop}}},
      {"analytic", {{"threshold_b", c.analytic.threshold_b}, {"gauge", to_string(c.analytic.gauge)},
                    {"jacobian_tolerance", c.analytic.jacobian_tolerance}}},
      {"compare", {{"trusted_std_threshold", c.compare.trusted_std_threshold}}},
      {"solver", {{"kind", solver_kind_name(c.solver.kind)},
                  {"cg_tolerance", c.solver.cg_tolerance},
                  {"cg_max_iterations", c.solver.cg_max_iterations},
                  {"cholesky_max_unknowns", c.solver.cholesky_max_unknowns}}},
      {"eigen", {{"tolerance", c.eigen.tolerance},
                 {"block_size", c.eigen.block_size},
                 {"max_basis_factor", c.eigen.max_basis_factor},
                 {"dense_max_size", c.eigen.dense_max_size},
                 {"seed", c.eigen.seed}}},
      {"output", {{"dir", c.output.dir}, {"basis_cache", c.output.basis_cache}}},
  };
  return doc.dump(2) + "\n";
}

}  // namespace aet
