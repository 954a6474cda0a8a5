#include "magplate/study.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace magplate {

namespace {
const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}
}  // namespace

bool ConvergenceTable::ok() const {
  for (const auto& c : components)
    if (!c.pass) return false;
  return true;
}

double component(const EnergyReport& r, const std::string& name) {
  if (name == "elastic") return r.elastic;
  if (name == "exchange") return r.exchange;
  if (name == "magnetostatic") return r.magnetostatic;
  if (name == "loads") return r.loads;
  throw ConfigError("unknown energy component '" + name + "'");
}

std::vector<std::string> component_names(const ComponentsConfig& c) {
  std::vector<std::string> n;
  if (c.elastic) n.push_back("elastic");
  if (c.exchange) n.push_back("exchange");
  if (c.magnetostatic) n.push_back("magnetostatic");
  if (c.loads) n.push_back("loads");
  return n;
}

void summarize(ConvergenceTable& t, const std::vector<std::string>& names) {
  t.components.clear();
  for (const auto& name : names) {
    ComponentSummary s;
    s.name = name;
    const double lim = component(t.E, name);
    for (const auto& r : t.rows) {
      double g = std::abs(component(r.Eh, name) - lim);
      s.gaps.push_back(g);
      s.rel_gaps.push_back(lim != 0 ? g / std::abs(lim) : g);
    }
    const std::size_t n = s.gaps.size();
    auto settled = [](double g) { return g < kGapFloor; };
    for (std::size_t i = 0; i < n; ++i) {
      if (i == 0 || settled(s.gaps[i]) || settled(s.gaps[i - 1]))
        s.rates.push_back(kNaN);
      else
        s.rates.push_back(std::log(s.gaps[i - 1] / s.gaps[i]) / std::log(t.rows[i - 1].h / t.rows[i].h));
      if (i > 0 && !settled(s.gaps[i]) && !(s.gaps[i] < s.gaps[i - 1])) s.monotone = false;
    }
    if (n >= 3) {
      double a = s.gaps[n - 3], b = s.gaps[n - 2], c = s.gaps[n - 1];
      bool converged = settled(a) && settled(b) && settled(c);
      if (!converged && a <= b && b <= c) s.pass = false;
    }
    // Least-squares slope over the usable rows.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (settled(s.gaps[i])) continue;
      double x = std::log(t.rows[i].h), y = std::log(s.gaps[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
    s.fitted_rate = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : kNaN;
    t.components.push_back(std::move(s));
  }
}

ConvergenceTable run_gamma_study(const StudyConfig& cfg, const std::function<void(const StudyRow&)>& progress) {
  ConvergenceTable t;
  const LimitState state = make_state(cfg);
  const Grid2& S = state.grid();
  const LoadSpec loads = cfg.components.loads ? make_loads(cfg, S) : LoadSpec::zero(S);
  LimitingModel model(cfg.density);
  t.E = model.energy(state);
  if (cfg.components.loads) t.E.loads = eval_L(state, loads);
  auto names = component_names(cfg.components);
  t.meta = {{"config_hash", config_hash(cfg)},
            {"grid", {{"nx", S.nx}, {"ny", S.ny}, {"nz", cfg.grid.nz}}},
            {"density", {{"p", cfg.density.p}, {"beta", cfg.density.beta}, {"alpha", cfg.density.alpha}, {"kappa", cfg.density.kappa}}}};
  for (double h : cfg.h) {
    try {
      RecoveryInput in;
      in.state = state;
      in.spec = cfg.density;
      in.h = h;
      in.nz = cfg.grid.nz;
      in.margin = cfg.grid.margin;
      in.picard = cfg.recovery.picard;
      if (cfg.inputs.lambda.empty()) in.lambda_fn = lambda_function(cfg);
      RecoveryState r = build_recovery(in, cfg.recovery.ciarlet_necas);
      Vec3Field3 nu = pullback(r.Lambda, r.y);
      StudyRow row;
      row.h = h;
      row.diag = r.diag;
      if (cfg.components.elastic) row.Eh.elastic = eval_elastic_h(r.y, nu, cfg.density).value;
      if (cfg.components.exchange) row.Eh.exchange = eval_exchange_h_pullback(r.y, r.Lambda, cfg.density.alpha);
      if (cfg.components.magnetostatic) row.Eh.magnetostatic = eval_mag_h(r.y, nu, cfg.poisson);
      if (cfg.components.loads) row.Eh.loads = eval_loads_h(r.y, nu, loads, cfg.density);
      if (progress) progress(row);
      t.rows.push_back(std::move(row));
    } catch (const ConfigError& e) {
      throw ConfigError("h = " + fmt(h) + ": " + e.what());
    } catch (const NumericError& e) {
      throw NumericError("h = " + fmt(h) + ": " + e.what());
    }
  }
  // Components switched off stay zero in both models.
  if (!cfg.components.elastic) t.E.elastic = t.E.membrane = t.E.bending = 0;
  if (!cfg.components.exchange) t.E.exchange = 0;
  if (!cfg.components.magnetostatic) t.E.magnetostatic = 0;
  summarize(t, names);
  return t;
}

std::vector<std::string> emit_reports(const ConvergenceTable& t, const std::string& dir, const std::string& prefix) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  const std::string base = (std::filesystem::path(dir) / prefix).string();

  std::vector<std::pair<std::string, std::string>> cols{{"h", "plate thickness"}};
  for (const auto& c : t.components) {
    cols.push_back({"Eh_" + c.name, c.name + " component of the 3D energy"});
    cols.push_back({"E_" + c.name, c.name + " component of the limiting energy"});
    cols.push_back({"gap_" + c.name, "|Eh - E| for " + c.name});
    cols.push_back({"relgap_" + c.name, "gap divided by |E| (the gap itself when E = 0)"});
    cols.push_back({"rate_" + c.name, "log(gap_prev / gap) / log(h_prev / h); nan on the first row or below the floor"});
  }
  cols.push_back({"Eh_total", "sum of the evaluated 3D components (loads excluded)"});
  cols.push_back({"E_total", "sum of the limiting components (loads excluded)"});
  cols.push_back({"det_residual", "max |det grad_h y - 1| of the recovery deformation"});
  cols.push_back({"eta_sup", "max |eta - x3|"});
  cols.push_back({"sup_distance", "max |y - z_h|"});
  cols.push_back({"injectivity_margin", "max operator norm of the physical displacement gradient"});

  {
    std::string p = base + "_table.csv";
    auto out = open_out(p);
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i].first;
    out << "\n";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const StudyRow& row = t.rows[r];
      std::vector<double> v{row.h};
      double total = 0, ltotal = 0;
      for (const auto& c : t.components) {
        double eh = component(row.Eh, c.name), e = component(t.E, c.name);
        v.insert(v.end(), {eh, e, c.gaps[r], c.rel_gaps[r], c.rates[r]});
        if (c.name != "loads") {
          total += eh;
          ltotal += e;
        }
      }
      v.insert(v.end(), {total, ltotal, row.diag.det_residual, row.diag.eta_sup, row.diag.sup_distance,
                         row.diag.injectivity.margin});
      for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << fmt(v[i]);
      out << "\n";
    }
    paths.push_back(p);
  }
  {
    std::string p = base + "_table.schema.json";
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& [n, d] : cols) cs.push_back({{"name", n}, {"description", d}});
    auto out = open_out(p);
    out << nlohmann::json{{"file", prefix + "_table.csv"}, {"format", "comma separated, header row, 17 significant digits"}, {"columns", cs}}.dump(2)
        << "\n";
    paths.push_back(p);
  }
  {
    std::string p = base + "_summary.json";
    nlohmann::json comps = nlohmann::json::object();
    for (const auto& c : t.components) {
      nlohmann::json rates = nlohmann::json::array();
      for (double r : c.rates) rates.push_back(num(r));
      comps[c.name] = {{"limit", component(t.E, c.name)},
                       {"gaps", c.gaps},
                       {"rates", rates},
                       {"fitted_rate", num(c.fitted_rate)},
                       {"monotone", c.monotone},
                       {"pass", c.pass}};
    }
    nlohmann::json diag = nlohmann::json::array();
    for (const auto& r : t.rows) diag.push_back({{"h", r.h}, {"recovery", r.diag.to_json()}});
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    nlohmann::json meta = t.meta;
    meta["created"] = stamp;
    auto out = open_out(p);
    out << nlohmann::json{{"meta", meta}, {"limit", t.E.to_json()}, {"components", comps}, {"pass", t.ok()}, {"rows", diag}}.dump(2)
        << "\n";
    paths.push_back(p);
  }
  for (const auto& c : t.components) {
    std::string p = base + "_" + c.name + ".dat";
    auto out = open_out(p);
    out << "# h Eh E gap\n";
    for (std::size_t r = 0; r < t.rows.size(); ++r)
      out << fmt(t.rows[r].h) << " " << fmt(component(t.rows[r].Eh, c.name)) << " " << fmt(component(t.E, c.name)) << " "
          << fmt(c.gaps[r]) << "\n";
    paths.push_back(p);
  }
  return paths;
}

CsvTable read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("'" + path + "' is empty");
  std::stringstream hs(line);
  for (std::string c; std::getline(hs, c, ',');) t.columns.push_back(c);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) row.push_back(std::strtod(c.c_str(), nullptr));
    if (row.size() != t.columns.size()) throw ConfigError("'" + path + "': ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace magplate
