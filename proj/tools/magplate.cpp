#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "magplate/field_io.hpp"
#include "magplate/parallel.hpp"
#include "magplate/quadratic_forms.hpp"
#include "magplate/study.hpp"

using namespace magplate;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumeric = 3, kAcceptance = 4 };

struct Options {
  std::string config, out;
  int threads = 0;
  long long seed = -1;
};

StudyConfig load(const Options& o) {
  StudyConfig c = o.config.empty() ? config_from_json(json::object()) : parse_config(o.config);
  if (!o.out.empty()) c.output = o.out;
  if (o.seed >= 0) c.minimize.seed = std::uint64_t(o.seed);
  return c;
}

void write_json(const StudyConfig& c, const std::string& name, const json& j) {
  fs::create_directories(c.output);
  std::ofstream out(fs::path(c.output) / name);
  if (!out) throw ConfigError("cannot write into '" + c.output + "'");
  out << j.dump(2) << "\n";
  std::cout << j.dump(2) << "\n";
}

std::string tag(double h) {
  std::ostringstream os;
  os << "h" << h;
  return os.str();
}

json mat_json(const Mat3& m) {
  json j = json::array();
  for (int r = 0; r < 3; ++r) j.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return j;
}

RecoveryState recover_at(const StudyConfig& c, const LimitState& s, double h) {
  RecoveryInput in;
  in.state = s;
  in.spec = c.density;
  in.h = h;
  in.nz = c.grid.nz;
  in.margin = c.grid.margin;
  in.picard = c.recovery.picard;
  if (c.inputs.lambda.empty()) in.lambda_fn = lambda_function(c);
  return build_recovery(in, c.recovery.ciarlet_necas);
}

// Deformation from a positions dump (meta.h gives the thickness), or nullopt.
std::optional<Deformation3> deformation_input(const StudyConfig& c) {
  if (c.inputs.deformation.empty()) return std::nullopt;
  FieldDump d = read_dump(c.inputs.deformation);
  auto y = field_from_dump<Grid3, Vec3>(d);
  double h = c.h.front();
  if (d.header.contains("meta") && d.header["meta"].contains("h")) h = d.header["meta"]["h"].get<double>();
  auto def = Deformation3::from_positions(y, h);
  def.validate();
  return def;
}

SphereMap sphere_map(const StudyConfig& c, const LimitState& s) {
  auto fn = c.inputs.lambda.empty() ? lambda_function(c) : nullptr;
  return SphereMap(extend_magnetization(s.lambda, c.grid.margin, fn), s.grid(), c.grid.margin);
}

int cmd_reduce(const Options& o) {
  StudyConfig c = load(o);
  const auto& r = c.reduce;
  require_unit(r.nu, 1e-10, "reduce.nu");
  std::shared_ptr<const TensorProvider> p;
  if (r.finite_difference)
    p = std::make_shared<FiniteDifferenceProvider>(c.density);
  else
    p = default_provider(c.density);
  ElasticTensor C = p->tensor(r.nu);
  ReductionResult inc = q2_inc(r.H, C);
  json ks = json::array();
  for (double k : r.k) {
    ReductionResult q = q2_k(r.H, k, C);
    ks.push_back({{"k", k}, {"value", q.value}, {"gap", inc.value - q.value}, {"c", {q.c.x(), q.c.y(), q.c.z()}}});
  }
  json out{{"H", {{r.H(0, 0), r.H(0, 1)}, {r.H(1, 0), r.H(1, 1)}}},
           {"nu", {r.nu.x(), r.nu.y(), r.nu.z()}},
           {"q2_inc", {{"value", inc.value}, {"c", {inc.c.x(), inc.c.y(), inc.c.z()}}, {"G", mat_json(inc.G)}}},
           {"q2_k", ks},
           {"tensor_fd_error", C.fd_error}};
  write_json(c, "reduce.json", out);
  return kOk;
}

int cmd_minimize(const Options& o) {
  StudyConfig c = load(o);
  LimitState s = make_state(c);
  LoadSpec L = make_loads(c, s.grid());
  LimitingModel model(c.density);
  MinimizeResult res = minimize_F(s, &L, model, c.minimize);
  fs::create_directories(c.output);
  fs::path dir(c.output);
  write_field((dir / "minimize_u.fld").string(), res.state.u);
  write_field((dir / "minimize_v.fld").string(), res.state.v);
  write_field((dir / "minimize_lambda.fld").string(), res.state.lambda);
  {
    std::ofstream tr(dir / "minimize_trace.csv");
    tr << "iter,F,gradnorm,step\n" << std::setprecision(17);
    for (const auto& t : res.trace) tr << t.iter << "," << t.F << "," << t.gradnorm << "," << t.step << "\n";
  }
  EnergyReport E = model.energy(res.state);
  E.loads = eval_L(res.state, L);
  write_json(c, "minimize.json",
             {{"converged", res.converged}, {"iterations", res.iterations}, {"F", res.F}, {"energy", E.to_json()}});
  if (!res.converged) {
    std::cerr << "minimize: no convergence within " << c.minimize.max_iter << " iterations\n";
    return kNumeric;
  }
  return kOk;
}

int cmd_eval3d(const Options& o) {
  StudyConfig c = load(o);
  LimitState s = make_state(c);
  LoadSpec L = make_loads(c, s.grid());
  Eh3Options opt;
  opt.mag = c.poisson;
  opt.elastic = c.components.elastic;
  opt.exchange = c.components.exchange;
  opt.magnetostatic = c.components.magnetostatic;
  const LoadSpec* lp = c.components.loads ? &L : nullptr;
  json rows = json::array();
  if (auto d = deformation_input(c)) {
    EnergyReport r = eval_E_h(*d, sphere_map(c, s), c.density, lp, opt);
    rows.push_back({{"h", d->h}, {"energy", r.to_json()}});
  } else {
    for (double h : c.h) {
      RecoveryState rs = recover_at(c, s, h);
      EnergyReport r = eval_E_h(rs.y, rs.Lambda, c.density, lp, opt);
      rows.push_back({{"h", h}, {"energy", r.to_json()}, {"recovery", rs.diag.to_json()}});
    }
  }
  EnergyReport E = LimitingModel(c.density).energy(s);
  if (lp) E.loads = eval_L(s, L);
  write_json(c, "eval3d.json", {{"limit", E.to_json()}, {"rows", rows}});
  return kOk;
}

int cmd_recover(const Options& o) {
  StudyConfig c = load(o);
  LimitState s = make_state(c);
  fs::create_directories(c.output);
  fs::path dir(c.output);
  json rows = json::array();
  for (double h : c.h) {
    RecoveryState r = recover_at(c, s, h);
    std::string t = tag(h);
    json meta{{"h", h}};
    write_field((dir / ("recover_" + t + "_y.fld")).string(), r.y.positions(), meta);
    ScalarField3 eta = r.delta;
    for (std::size_t p = 0; p < eta.size(); ++p) eta[p] += eta.grid().node(p).z();
    write_field((dir / ("recover_" + t + "_eta.fld")).string(), eta, meta);
    write_field((dir / ("recover_" + t + "_a.fld")).string(), r.ab.a, meta);
    write_field((dir / ("recover_" + t + "_b.fld")).string(), r.ab.b, meta);
    write_field((dir / ("recover_" + t + "_Lambda.fld")).string(), r.Lambda.values(), meta);
    rows.push_back({{"h", h}, {"diagnostics", r.diag.to_json()}});
    if (r.diag.det_residual > 1e-6) std::cerr << "recover: h = " << h << " det residual " << r.diag.det_residual << " above 1e-6\n";
  }
  write_json(c, "recover.json", rows);
  return kOk;
}

int cmd_stray(const Options& o) {
  StudyConfig c = load(o);
  LimitState s = make_state(c);
  Grid3 g(s.grid(), c.grid.nz);
  Vec3Field3 nu(g);
  for (std::size_t p = 0; p < nu.size(); ++p) nu[p] = s.lambda[p % g.base.node_count()];
  const double ref = thin_film_reference(s.lambda);
  json rows = json::array();
  for (double h : c.h) {
    double m = eval_mag_h(Deformation3::identity(g, h), nu, c.poisson);
    rows.push_back({{"h", h}, {"magnetostatic", m}, {"gap", std::abs(m - ref)}});
  }
  write_json(c, "stray_field.json", {{"thin_film_reference", ref}, {"rows", rows}});
  return kOk;
}

int cmd_degree(const Options& o) {
  StudyConfig c = load(o);
  std::optional<Deformation3> d = deformation_input(c);
  if (!d) d = recover_at(c, make_state(c), c.h.front()).y;
  const Grid2& S = d->grid().base;
  auto queries = c.queries;
  if (queries.empty()) queries.push_back({Vec3(S.origin.x() + S.extent.x() / 2, S.origin.y() + S.extent.y() / 2, 0), 0});
  json res = json::array();
  for (const auto& q : queries) {
    double r = q.r > 0 ? q.r : d->h / 4;
    DegreeResult dr = degree_at(*d, q.target, r);
    res.push_back({{"target", {q.target.x(), q.target.y(), q.target.z()}},
                   {"r", r},
                   {"degree", dr.degree},
                   {"raw", dr.raw},
                   {"residual", dr.residual},
                   {"boundary_distance", dr.boundary_distance}});
  }
  CiarletNecasResult cn = ciarlet_necas_check(*d);
  write_json(c, "degree.json",
             {{"h", d->h}, {"queries", res}, {"ciarlet_necas", {{"lhs", cn.lhs}, {"rhs", cn.rhs}, {"pass", cn.pass}}}});
  return kOk;
}

int cmd_gamma(const Options& o) {
  StudyConfig c = load(o);
  auto t = run_gamma_study(c, [](const StudyRow& r) {
    std::cerr << "h = " << r.h << "  elastic " << r.Eh.elastic << "  exchange " << r.Eh.exchange << "  magnetostatic "
              << r.Eh.magnetostatic << "\n";
  });
  auto paths = emit_reports(t, c.output);
  for (const auto& comp : t.components)
    std::cout << std::left << std::setw(14) << comp.name << " fitted rate " << std::setw(12) << comp.fitted_rate
              << (comp.pass ? " ok" : " FAIL (gap not decreasing)") << "\n";
  for (const auto& p : paths) std::cout << "wrote " << p << "\n";
  return t.ok() ? kOk : kAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Magnetoelastic thin plates: limiting model, recovery sequences and convergence studies"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "JSON configuration file");
  app.add_option("--out", o.out, "output directory (overrides output.dir)");
  app.add_option("--threads", o.threads, "worker threads (0: hardware)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", o.seed, "seed for randomized steps");

  std::vector<std::pair<CLI::App*, int (*)(const Options&)>> cmds{
      {app.add_subcommand("reduce", "reduced quadratic forms for one (H, nu)"), cmd_reduce},
      {app.add_subcommand("minimize", "minimize the limiting energy minus loads"), cmd_minimize},
      {app.add_subcommand("eval3d", "evaluate the 3D energy components"), cmd_eval3d},
      {app.add_subcommand("recover", "build recovery deformations and dump them"), cmd_recover},
      {app.add_subcommand("stray-field", "magnetostatic energy of the flat plate over h"), cmd_stray},
      {app.add_subcommand("degree", "degree queries and the Ciarlet-Necas check"), cmd_degree},
      {app.add_subcommand("gamma-study", "componentwise convergence E_h -> E over h"), cmd_gamma}};

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  try {
    set_thread_count(o.threads);
    for (auto& [sub, fn] : cmds)
      if (sub->parsed()) return fn(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  }
  return kOk;
}
