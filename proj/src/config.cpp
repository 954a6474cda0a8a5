#include "magplate/config.hpp"

#include <exception>
#include <fstream>
#include <set>
#include <sstream>

#include "magplate/field_io.hpp"

namespace magplate {

namespace {

using nlohmann::json;

// Walks one object, remembering which keys were read.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() == 0) check_unknown();
  }

  bool has(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k);
  }
  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  const json& at(const std::string& k) { return (seen_.insert(k), j_.at(k)); }

  void number(const std::string& k, double& out) {
    if (!has(k)) return;
    if (!j_[k].is_number()) throw ConfigError(key(k) + ": expected a number");
    out = j_[k].get<double>();
  }
  void integer(const std::string& k, int& out) {
    if (!has(k)) return;
    if (!j_[k].is_number_integer()) throw ConfigError(key(k) + ": expected an integer");
    out = j_[k].get<int>();
  }
  void boolean(const std::string& k, bool& out) {
    if (!has(k)) return;
    if (!j_[k].is_boolean()) throw ConfigError(key(k) + ": expected true or false");
    out = j_[k].get<bool>();
  }
  void string(const std::string& k, std::string& out) {
    if (!has(k)) return;
    if (!j_[k].is_string()) throw ConfigError(key(k) + ": expected a string");
    out = j_[k].get<std::string>();
  }
  std::vector<double> numbers(const std::string& k, std::size_t n = 0) {
    const json& a = at(k);
    if (!a.is_array() || (n && a.size() != n)) throw ConfigError(key(k) + ": expected an array of " + (n ? std::to_string(n) + " " : "") + "numbers");
    std::vector<double> v;
    for (const json& x : a) {
      if (!x.is_number()) throw ConfigError(key(k) + ": expected numbers");
      v.push_back(x.get<double>());
    }
    return v;
  }
  Expression expr(const std::string& k) {
    const json& x = at(k);
    if (x.is_number()) return Expression::parse(x.dump());
    if (!x.is_string()) throw ConfigError(key(k) + ": expected an expression string or number");
    try {
      return Expression::parse(x.get<std::string>());
    } catch (const ConfigError& e) {
      throw ConfigError(key(k) + ": " + e.what());
    }
  }
  template <std::size_t N>
  void exprs(const std::string& k, std::array<Expression, N>& out) {
    if (!has(k)) return;
    const json& a = j_[k];
    if (!a.is_array() || a.size() != N) throw ConfigError(key(k) + ": expected " + std::to_string(N) + " expressions");
    for (std::size_t i = 0; i < N; ++i) {
      json one{{std::to_string(i), a[i]}};
      Section s(one, key(k));
      out[i] = s.expr(std::to_string(i));
    }
  }
  void check_unknown() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown key '" + key(it.key()) + "'");
  }
  std::string where() const { return path_.empty() ? "config" : path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

StudyConfig config_from_json(const json& j) {
  StudyConfig c;
  c.source = j;
  Section root(j, "");
  if (root.has("density")) {
    Section s(root.at("density"), "density");
    s.number("p", c.density.p);
    s.number("beta", c.density.beta);
    s.number("alpha", c.density.alpha);
    s.number("kappa", c.density.kappa);
    s.number("det_tol", c.density.det_tol);
  }
  c.density.validate();
  if (root.has("grid")) {
    Section s(root.at("grid"), "grid");
    s.integer("nx", c.grid.nx);
    s.integer("ny", c.grid.ny);
    s.integer("nz", c.grid.nz);
    s.integer("margin", c.grid.margin);
    if (s.has("origin")) {
      auto v = s.numbers("origin", 2);
      c.grid.origin = Vec2(v[0], v[1]);
    }
    if (s.has("extent")) {
      auto v = s.numbers("extent", 2);
      c.grid.extent = Vec2(v[0], v[1]);
    }
  }
  if (c.grid.nx < 4 || c.grid.ny < 4) throw ConfigError("grid.nx, grid.ny: need at least 4 cells");
  if (c.grid.nz < 4 || c.grid.nz % 2) throw ConfigError("grid.nz: must be even and >= 4");
  if (c.grid.margin < 1) throw ConfigError("grid.margin: must be >= 1");
  if (!(c.grid.extent.minCoeff() > 0)) throw ConfigError("grid.extent: must be positive");
  if (root.has("poisson")) {
    Section s(root.at("poisson"), "poisson");
    s.number("padding", c.poisson.padding);
    s.number("grading", c.poisson.grading);
    s.integer("supersample", c.poisson.supersample);
    s.number("tol", c.poisson.tol);
    std::string solver = "spectral";
    s.string("solver", solver);
    if (solver == "spectral")
      c.poisson.solver = PoissonSolver::Spectral;
    else if (solver == "cg")
      c.poisson.solver = PoissonSolver::ConjugateGradient;
    else
      throw ConfigError("poisson.solver: expected \"spectral\" or \"cg\"");
  }
  if (c.poisson.padding < 2) throw ConfigError("poisson.padding: must be >= 2");
  if (c.poisson.grading < 1) throw ConfigError("poisson.grading: must be >= 1");
  if (c.poisson.supersample < 1) throw ConfigError("poisson.supersample: must be >= 1");
  c.state.u = {Expression::parse("0"), Expression::parse("0")};
  c.state.v = Expression::parse("0");
  c.state.lambda = {Expression::parse("1"), Expression::parse("0"), Expression::parse("0")};
  if (root.has("state")) {
    Section s(root.at("state"), "state");
    s.exprs("u", c.state.u);
    if (s.has("v")) c.state.v = s.expr("v");
    s.exprs("lambda", c.state.lambda);
  }
  if (root.has("inputs")) {
    Section s(root.at("inputs"), "inputs");
    s.string("u", c.inputs.u);
    s.string("v", c.inputs.v);
    s.string("lambda", c.inputs.lambda);
    s.string("deformation", c.inputs.deformation);
  }
  if (root.has("h")) {
    const json& a = root.at("h");
    if (!a.is_array()) throw ConfigError("h: expected an array of thicknesses");
    c.h.clear();
    for (const json& x : a) {
      if (!x.is_number()) throw ConfigError("h: expected numbers");
      c.h.push_back(x.get<double>());
    }
  }
  if (c.h.empty()) throw ConfigError("h: empty list");
  for (std::size_t i = 0; i < c.h.size(); ++i) {
    if (!(c.h[i] > 0 && c.h[i] < 1)) throw ConfigError("h: values must lie in (0, 1)");
    if (i && !(c.h[i] < c.h[i - 1])) throw ConfigError("h: list must be strictly decreasing");
  }
  if (root.has("components")) {
    Section s(root.at("components"), "components");
    s.boolean("elastic", c.components.elastic);
    s.boolean("exchange", c.components.exchange);
    s.boolean("magnetostatic", c.components.magnetostatic);
    s.boolean("loads", c.components.loads);
  }
  c.loads.f = {Expression::parse("0"), Expression::parse("0")};
  c.loads.g = Expression::parse("0");
  c.loads.hfield = {Expression::parse("0"), Expression::parse("0"), Expression::parse("0")};
  if (root.has("loads")) {
    Section s(root.at("loads"), "loads");
    s.exprs("f", c.loads.f);
    if (s.has("g")) c.loads.g = s.expr("g");
    s.exprs("hfield", c.loads.hfield);
  }
  if (root.has("minimize")) {
    Section s(root.at("minimize"), "minimize");
    s.number("tol", c.minimize.tol);
    s.integer("max_iter", c.minimize.max_iter);
    s.number("armijo", c.minimize.armijo);
    s.number("initial_step", c.minimize.initial_step);
    s.boolean("clamp", c.minimize.clamp);
    s.boolean("alternate", c.minimize.alternate);
    s.number("initial_jitter", c.minimize.initial_jitter);
    int seed = 0;
    s.integer("seed", seed);
    c.minimize.seed = std::uint64_t(seed);
  }
  if (c.minimize.max_iter < 0 || !(c.minimize.tol > 0)) throw ConfigError("minimize: need tol > 0 and max_iter >= 0");
  if (root.has("recovery")) {
    Section s(root.at("recovery"), "recovery");
    s.boolean("picard", c.recovery.picard);
    s.boolean("ciarlet_necas", c.recovery.ciarlet_necas);
  }
  if (root.has("queries")) {
    const json& a = root.at("queries");
    if (!a.is_array()) throw ConfigError("queries: expected an array");
    for (std::size_t i = 0; i < a.size(); ++i) {
      Section s(a[i], "queries[" + std::to_string(i) + "]");
      DegreeQueryConfig q;
      auto t = s.numbers("target", 3);
      q.target = Vec3(t[0], t[1], t[2]);
      s.number("r", q.r);
      if (q.r < 0) throw ConfigError(s.key("r") + ": must be positive");
      c.queries.push_back(q);
    }
  }
  if (root.has("reduce")) {
    Section s(root.at("reduce"), "reduce");
    if (s.has("H")) {
      const json& H = s.at("H");
      if (!H.is_array() || H.size() != 2 || !H[0].is_array() || !H[1].is_array() || H[0].size() != 2 || H[1].size() != 2)
        throw ConfigError("reduce.H: expected [[a, b], [c, d]]");
      for (int r = 0; r < 2; ++r)
        for (int q = 0; q < 2; ++q) {
          if (!H[r][q].is_number()) throw ConfigError("reduce.H: expected numbers");
          c.reduce.H(r, q) = H[r][q].get<double>();
        }
    }
    if (s.has("nu")) {
      auto v = s.numbers("nu", 3);
      c.reduce.nu = Vec3(v[0], v[1], v[2]);
    }
    if (s.has("k")) c.reduce.k = s.numbers("k");
    s.boolean("finite_difference", c.reduce.finite_difference);
    for (double k : c.reduce.k)
      if (!(k >= 0)) throw ConfigError("reduce.k: values must be >= 0");
  }
  if (root.has("output")) {
    Section s(root.at("output"), "output");
    s.string("dir", c.output);
  }
  return c;
}

StudyConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const StudyConfig& cfg) {
  // FNV-1a over the canonical dump.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : cfg.source.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

std::function<Vec3(const Vec2&)> lambda_function(const StudyConfig& cfg) {
  auto l = cfg.state.lambda;
  return [l](const Vec2& x) {
    Vec3 v(l[0](x.x(), x.y()), l[1](x.x(), x.y()), l[2](x.x(), x.y()));
    double n = v.norm();
    if (!(n > 0) || !std::isfinite(n)) throw ConfigError("state.lambda vanishes or is not finite somewhere");
    return Vec3(v / n);
  };
}

LimitState make_state(const StudyConfig& cfg) {
  Grid2 g = cfg.grid.grid2();
  LimitState s;
  const auto& st = cfg.state;
  s.u = VecField2::sample(g, [&](Vec2 x) { return Vec2(st.u[0](x.x(), x.y()), st.u[1](x.x(), x.y())); });
  s.v = ScalarField2::sample(g, [&](Vec2 x) { return st.v(x.x(), x.y()); });
  s.lambda = Vec3Field2::sample(g, lambda_function(cfg));
  auto load = [&](const std::string& path, auto& field, const char* what) {
    if (path.empty()) return;
    using F = std::decay_t<decltype(field)>;
    F f = field_from_dump<Grid2, typename F::value_type>(read_dump(path));
    if (!(f.grid() == g)) throw ConfigError(std::string("inputs.") + what + ": grid does not match the configured grid");
    field = std::move(f);
  };
  load(cfg.inputs.u, s.u, "u");
  load(cfg.inputs.v, s.v, "v");
  load(cfg.inputs.lambda, s.lambda, "lambda");
  s.validate();
  return s;
}

LoadSpec make_loads(const StudyConfig& cfg, const Grid2& g) {
  const auto& L = cfg.loads;
  LoadSpec s;
  s.f = VecField2::sample(g, [&](Vec2 x) { return Vec2(L.f[0](x.x(), x.y()), L.f[1](x.x(), x.y())); });
  s.g = ScalarField2::sample(g, [&](Vec2 x) { return L.g(x.x(), x.y()); });
  s.hfield = Vec3Field2::sample(g, [&](Vec2 x) {
    return Vec3(L.hfield[0](x.x(), x.y()), L.hfield[1](x.x(), x.y()), L.hfield[2](x.x(), x.y()));
  });
  s.validate(g);
  return s;
}

}  // namespace magplate
