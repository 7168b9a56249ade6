#include "mcl/params.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mcl/legendre.hpp"

namespace mcl {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ValidationError(std::string("PhysicalParams.") + name + " must be strictly positive");
}

double to_double(const std::string& key, const std::string& s) {
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ValidationError("config key " + key + ": not a number: '" + s + "'");
  }
  if (s.find_first_not_of(" \t", pos) != std::string::npos)
    throw ValidationError("config key " + key + ": trailing characters in '" + s + "'");
  return v;
}

int to_int(const std::string& key, const std::string& s) {
  const double v = to_double(key, s);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ValidationError("config key " + key + ": not an integer");
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ValidationError("config key " + key + ": not a boolean: '" + s + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(to_double(key, item.substr(b)));
  }
  return out;
}

std::string list_str(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s;
}

struct Key {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

// Every recognised key, in output order.
const std::vector<std::pair<std::string, Key>>& key_table() {
  static const std::vector<std::pair<std::string, Key>> table = [] {
    std::vector<std::pair<std::string, Key>> t;
    auto dbl = [&t](const std::string& name, double SimParams::*m) {
      t.push_back({name, {[name, m](RunConfig& c, const std::string& s) { c.sim.*m = to_double(name, s); },
                          [m](const RunConfig& c) { return format_double(c.sim.*m); }}});
    };
    auto integer = [&t](const std::string& name, int SimParams::*m) {
      t.push_back({name, {[name, m](RunConfig& c, const std::string& s) { c.sim.*m = to_int(name, s); },
                          [m](const RunConfig& c) { return std::to_string(c.sim.*m); }}});
    };
    dbl("physics.Re", &SimParams::Re);
    dbl("physics.B", &SimParams::B);
    dbl("physics.ls", &SimParams::ls);
    dbl("physics.eps", &SimParams::eps);
    t.push_back({"physics.Ld",
                 {[](RunConfig& c, const std::string& s) {
                    c.sim.Ld = to_double("physics.Ld", s);
                    c.explicit_Ld = true;
                  },
                  [](const RunConfig& c) { return format_double(c.sim.Ld); }}});
    t.push_back({"physics.Vs",
                 {[](RunConfig& c, const std::string& s) {
                    c.sim.Vs = to_double("physics.Vs", s);
                    c.explicit_Vs = true;
                  },
                  [](const RunConfig& c) { return format_double(c.sim.Vs); }}});
    t.push_back({"physics.theta_s_deg",
                 {[](RunConfig& c, const std::string& s) {
                    c.sim.theta_s = to_double("physics.theta_s_deg", s) * std::numbers::pi / 180.0;
                  },
                  [](const RunConfig& c) { return format_double(c.sim.theta_s * 180.0 / std::numbers::pi); }}});
    dbl("physics.v_w_top", &SimParams::v_w_top);
    dbl("physics.v_w_bot", &SimParams::v_w_bot);
    dbl("physics.F_x", &SimParams::F_x);
    dbl("physics.F_y", &SimParams::F_y);
    t.push_back({"physics.young_stress_has_B",
                 {[](RunConfig& c, const std::string& s) {
                    c.sim.young_stress_has_B = to_bool("physics.young_stress_has_B", s);
                  },
                  [](const RunConfig& c) { return std::string(c.sim.young_stress_has_B ? "true" : "false"); }}});
    dbl("numerics.Lx", &SimParams::Lx);
    integer("numerics.Nx", &SimParams::Nx);
    integer("numerics.Ny", &SimParams::Ny);
    dbl("numerics.dt", &SimParams::dt);
    dbl("numerics.T_end", &SimParams::T_end);
    dbl("numerics.gmres_tol", &SimParams::gmres_tol);
    integer("numerics.gmres_max_iter", &SimParams::gmres_max_iter);
    integer("numerics.gmres_restart", &SimParams::gmres_restart);
    auto sdbl = [&t](const std::string& name, double ScalingSpec::*m) {
      t.push_back({name, {[name, m](RunConfig& c, const std::string& s) { c.scaling.*m = to_double(name, s); },
                          [m](const RunConfig& c) { return format_double(c.scaling.*m); }}});
    };
    sdbl("scaling.alpha", &ScalingSpec::alpha);
    sdbl("scaling.beta", &ScalingSpec::beta);
    sdbl("scaling.ld0", &ScalingSpec::ld0);
    sdbl("scaling.vs0", &ScalingSpec::vs0);
    t.push_back({"scaling.eps_list",
                 {[](RunConfig& c, const std::string& s) { c.scaling.eps_list = to_list("scaling.eps_list", s); },
                  [](const RunConfig& c) { return list_str(c.scaling.eps_list); }}});
    t.push_back({"scaling.alpha_list",
                 {[](RunConfig& c, const std::string& s) { c.scaling.alpha_list = to_list("scaling.alpha_list", s); },
                  [](const RunConfig& c) { return list_str(c.scaling.alpha_list); }}});
    t.push_back({"scaling.beta_list",
                 {[](RunConfig& c, const std::string& s) { c.scaling.beta_list = to_list("scaling.beta_list", s); },
                  [](const RunConfig& c) { return list_str(c.scaling.beta_list); }}});
    t.push_back({"experiment.scenario",
                 {[](RunConfig& c, const std::string& s) {
                    if (s != "couette" && s != "strip" && s != "drop")
                      throw ValidationError("config key experiment.scenario: unknown scenario '" + s + "'");
                    c.exp.scenario = s;
                  },
                  [](const RunConfig& c) { return c.exp.scenario; }}});
    t.push_back({"experiment.output_dir",
                 {[](RunConfig& c, const std::string& s) { c.exp.output_dir = s; },
                  [](const RunConfig& c) { return c.exp.output_dir; }}});
    t.push_back({"experiment.snapshot_times",
                 {[](RunConfig& c, const std::string& s) {
                    c.exp.snapshot_times = to_list("experiment.snapshot_times", s);
                  },
                  [](const RunConfig& c) { return list_str(c.exp.snapshot_times); }}});
    auto eint = [&t](const std::string& name, int ExperimentSettings::*m) {
      t.push_back({name, {[name, m](RunConfig& c, const std::string& s) { c.exp.*m = to_int(name, s); },
                          [m](const RunConfig& c) { return std::to_string(c.exp.*m); }}});
    };
    auto edbl = [&t](const std::string& name, double ExperimentSettings::*m) {
      t.push_back({name, {[name, m](RunConfig& c, const std::string& s) { c.exp.*m = to_double(name, s); },
                          [m](const RunConfig& c) { return format_double(c.exp.*m); }}});
    };
    eint("experiment.record_stride", &ExperimentSettings::record_stride);
    eint("experiment.checkpoint_every", &ExperimentSettings::checkpoint_every);
    edbl("experiment.theta_band_lo", &ExperimentSettings::theta_band_lo);
    edbl("experiment.theta_band_hi", &ExperimentSettings::theta_band_hi);
    eint("experiment.vcl_window", &ExperimentSettings::vcl_window);
    edbl("experiment.gnbc_halfwidth", &ExperimentSettings::gnbc_halfwidth);
    edbl("experiment.drop_radius", &ExperimentSettings::drop_radius);
    eint("experiment.ny_min", &ExperimentSettings::ny_min);
    eint("experiment.threads", &ExperimentSettings::threads);
    return t;
  }();
  return table;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double PhysicalParams::xi() const { return std::sqrt(K / r); }
double PhysicalParams::gamma() const { return 2.0 * std::numbers::sqrt2 * r * xi() / 3.0; }

DimensionlessGroups nondimensionalize(const PhysicalParams& p) {
  require_positive(p.M, "M");
  require_positive(p.K, "K");
  require_positive(p.r, "r");
  require_positive(p.rho, "rho");
  require_positive(p.eta, "eta");
  require_positive(p.beta_slip, "beta_slip");
  require_positive(p.gamma_relax, "gamma_relax");
  require_positive(p.l, "l");
  require_positive(p.vstar, "vstar");
  const double g = p.gamma();
  const double s = 2.0 * std::numbers::sqrt2;
  DimensionlessGroups d;
  d.Ld = 3.0 * p.M * g / (s * p.vstar * p.l * p.l);
  d.Re = p.rho * p.vstar * p.l / p.eta;
  d.B = 3.0 * g / (s * p.eta * p.vstar);
  d.Vs = 3.0 * g * p.gamma_relax * p.l / (s * p.vstar);
  d.ls = (p.eta / p.beta_slip) / p.l;
  d.eps = p.xi() / p.l;
  return d;
}

std::pair<double, double> resolve_scalings(const ScalingSpec& s, double eps) {
  const auto errs = validate(s);
  if (!errs.empty()) throw ValidationError(errs.front());
  const bool listed = std::any_of(s.eps_list.begin(), s.eps_list.end(),
                                  [eps](double e) { return std::abs(e - eps) <= 1e-14 * e; });
  if (!listed) throw ValidationError("resolve_scalings: eps = " + format_double(eps) + " is not in eps_list");
  return {s.ld0 * std::pow(eps, s.alpha), s.vs0 * std::pow(eps, s.beta)};
}

double lobatto_wall_spacing(int n) {
  const Eigen::VectorXd y = legendre::lobatto_nodes(n);
  return 1.0 - y(n - 1);
}

double lobatto_max_spacing(int n, double ymax) {
  const Eigen::VectorXd y = legendre::lobatto_nodes(n);
  double h = 0.0;
  for (int j = 0; j < n; ++j)
    if (std::min(std::abs(y(j)), std::abs(y(j + 1))) <= ymax) h = std::max(h, y(j + 1) - y(j));
  return h;
}

std::pair<int, int> auto_resolution(double eps, double Lx, int ny_min) {
  const double h = 0.5 * eps;
  int nx = 4;
  for (int cand = 4;; cand += 2) {
    int m = cand;
    for (int f : {2, 3, 5})
      while (m % f == 0) m /= f;
    if (m == 1 && Lx / cand <= h * (1.0 + 1e-12)) {
      nx = cand;
      break;
    }
  }
  int ny = std::max(ny_min, 4);
  while (lobatto_wall_spacing(ny) > h) ++ny;
  return {nx, ny};
}

std::vector<std::string> validate(const SimParams& sp) {
  std::vector<std::string> out;
  auto pos = [&out](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) out.push_back(std::string(name) + " must be > 0 (got " + format_double(v) + ")");
  };
  pos(sp.eps, "eps");
  pos(sp.Ld, "Ld");
  pos(sp.Vs, "Vs");
  pos(sp.ls, "ls");
  pos(sp.B, "B");
  pos(sp.Re, "Re");
  pos(sp.Lx, "Lx");
  pos(sp.dt, "dt");
  if (!(sp.theta_s > 0.0 && sp.theta_s < std::numbers::pi))
    out.push_back("theta_s must lie strictly between 0 and 180 degrees (got " +
                  format_double(sp.theta_s * 180.0 / std::numbers::pi) + ")");
  if (!(sp.T_end >= 0.0)) out.push_back("T_end must be >= 0");
  if (!(sp.gmres_tol > 0.0 && sp.gmres_tol < 1.0)) out.push_back("gmres_tol must lie in (0, 1)");
  if (sp.gmres_max_iter < 1 || sp.gmres_restart < 1) out.push_back("gmres_max_iter and gmres_restart must be >= 1");
  if (sp.Nx < 4 || sp.Nx % 2 != 0) out.push_back("Nx must be even and >= 4 (got " + std::to_string(sp.Nx) + ")");
  if (sp.Ny < 4) out.push_back("Ny must be >= 4 (got " + std::to_string(sp.Ny) + ")");
  if (sp.eps > 0.0 && sp.Nx >= 4 && sp.Ny >= 4) {
    const double h = 0.5 * sp.eps;
    if (sp.Lx / sp.Nx > h * (1.0 + 1e-12))
      out.push_back("resolution: Lx/Nx = " + format_double(sp.Lx / sp.Nx) + " exceeds eps/2 = " + format_double(h));
    const double hw = lobatto_wall_spacing(sp.Ny);
    if (hw > h * (1.0 + 1e-12))
      out.push_back("resolution: wall node spacing " + format_double(hw) + " exceeds eps/2 = " + format_double(h));
  }
  return out;
}

std::vector<std::string> validate(const ScalingSpec& s) {
  std::vector<std::string> out;
  if (!(s.ld0 > 0.0)) out.push_back("ld0 must be > 0");
  if (!(s.vs0 > 0.0)) out.push_back("vs0 must be > 0");
  for (double a : s.alphas())
    if (a != std::round(a) || a < 0.0 || a > 2.0)
      out.push_back("alpha must be one of 0, 1, 2 (got " + format_double(a) + ")");
  for (double b : s.betas())
    if (b != std::round(b) || b > 0.0 || b < -3.0)
      out.push_back("beta must be one of 0, -1, -2, -3 (got " + format_double(b) + ")");
  if (s.eps_list.empty()) out.push_back("eps_list must not be empty");
  for (size_t i = 0; i < s.eps_list.size(); ++i) {
    if (!(s.eps_list[i] > 0.0)) out.push_back("eps_list entries must be > 0");
    if (i > 0 && !(s.eps_list[i] < s.eps_list[i - 1])) out.push_back("eps_list must be strictly decreasing");
  }
  return out;
}

void finalize(RunConfig& cfg) {
  if (!cfg.explicit_Ld || !cfg.explicit_Vs) {
    ScalingSpec s = cfg.scaling;
    if (std::none_of(s.eps_list.begin(), s.eps_list.end(),
                     [&](double e) { return std::abs(e - cfg.sim.eps) <= 1e-14 * e; }))
      s.eps_list = {cfg.sim.eps};
    const auto [ld, vs] = resolve_scalings(s, cfg.sim.eps);
    if (!cfg.explicit_Ld) cfg.sim.Ld = ld;
    if (!cfg.explicit_Vs) cfg.sim.Vs = vs;
  }
  if (cfg.sim.Nx == 0 || cfg.sim.Ny == 0) {
    const auto [nx, ny] = auto_resolution(cfg.sim.eps, cfg.sim.Lx, cfg.exp.ny_min);
    if (cfg.sim.Nx == 0) cfg.sim.Nx = nx;
    if (cfg.sim.Ny == 0) cfg.sim.Ny = ny;
  }
}

RunConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(std::string("config parse error: ") + e.what());
  }
  std::map<std::string, const Key*> keys;
  for (const auto& [name, key] : key_table()) keys[name] = &key;
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ValidationError("config key '" + section + "' must be inside a section");
    for (const auto& [name, value] : body) {
      const std::string full = section + "." + name;
      auto it = keys.find(full);
      if (it == keys.end()) throw ValidationError("unknown config key '" + full + "'");
      it->second->set(cfg, value.data());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::pair<std::string, std::string>> flatten_pairs(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, key] : key_table()) out.emplace_back(name, key.get(cfg));
  return out;
}

std::string flatten(const RunConfig& cfg) {
  std::string out, section;
  for (const auto& [name, value] : flatten_pairs(cfg)) {
    const auto dot = name.find('.');
    const std::string sec = name.substr(0, dot);
    if (sec != section) {
      out += "[" + sec + "]\n";
      section = sec;
    }
    out += name.substr(dot + 1) + " = " + value + "\n";
  }
  return out;
}

}  // namespace mcl
