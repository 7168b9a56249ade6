#include "mcl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <numbers>
#include <thread>

#include "mcl/checkpoint.hpp"

namespace mcl {
namespace fs = std::filesystem;

namespace {

std::string tag_time(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

std::string cell_name(const CellKey& k) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "eps%.6g_a%.6g_b%.6g", std::get<0>(k), std::get<1>(k), std::get<2>(k));
  return buf;
}

// Largest node spacing across a drop interface, in units of eps.
constexpr double kDropSpacing = 1.5;

std::int64_t steps_for(double t, double dt) { return static_cast<std::int64_t>(std::llround(t / dt)); }

}  // namespace

FieldState couette_setup(const SpectralGrid& g, const RunConfig& cfg) {
  FieldState s = initial_state(g, cfg);
  s.now.u = g.sample([](double, double y) { return y; });
  s.prev = s.now;
  return s;
}

FieldState initial_state(const SpectralGrid& g, const RunConfig& cfg) {
  const SimParams& sp = cfg.sim;
  const double w = std::sqrt(2.0) * sp.eps;
  const double L = g.lx();
  FieldState s;
  if (cfg.exp.scenario == "drop") {
    const double R = cfg.exp.drop_radius;
    s.now.phi = g.sample([&](double x, double y) { return std::tanh((std::hypot(x - 0.5 * L, y) - R) / w); });
  } else {
    s.now.phi = g.sample([&](double x, double) { return std::tanh((0.25 * L - std::abs(x - 0.5 * L)) / w); });
  }
  s.now.u = cfg.exp.scenario == "couette" ? g.sample([](double, double y) { return y; }) : g.zeros();
  s.now.w = g.zeros();
  s.now.p = g.zeros();
  ieq_aux_init(g, s.now.phi, sp.theta_s, s.now.U, s.now.W);
  s.prev = s.now;
  s.mu = chemical_potential(g, s.now.phi, sp.eps);
  return s;
}

RunConfig prepare(RunConfig cfg) {
  if (cfg.exp.scenario != "couette") {
    cfg.sim.v_w_top = 0.0;
    cfg.sim.v_w_bot = 0.0;
  }
  const bool auto_ny = cfg.sim.Ny == 0;
  finalize(cfg);
  std::vector<std::string> errs = validate(cfg.sim);
  if (cfg.exp.scenario == "drop" && cfg.sim.Ny > 0 && cfg.sim.eps > 0.0) {
    // The drop's interface crosses mid-channel, where Lobatto nodes are sparsest.
    const double h = kDropSpacing * cfg.sim.eps, R = cfg.exp.drop_radius;
    if (auto_ny)
      while (lobatto_max_spacing(cfg.sim.Ny, R) > h) ++cfg.sim.Ny;
    else if (lobatto_max_spacing(cfg.sim.Ny, R) > h)
      errs.push_back("resolution: node spacing " + format_double(lobatto_max_spacing(cfg.sim.Ny, R)) +
                     " across the drop exceeds " + format_double(kDropSpacing) + " eps");
  }
  for (auto& e : validate(cfg.scaling)) errs.push_back(e);
  for (double t : cfg.exp.snapshot_times)
    if (t < 0.0 || t > cfg.sim.T_end * (1.0 + 1e-12) + 1e-15)
      errs.push_back("snapshot time " + format_double(t) + " outside [0, T_end]");
  if (cfg.exp.record_stride < 1) errs.push_back("record_stride must be >= 1");
  if (cfg.exp.checkpoint_every < 1) errs.push_back("checkpoint_every must be >= 1");
  if (cfg.exp.scenario == "drop" && !(cfg.exp.drop_radius > 0.0 && cfg.exp.drop_radius < std::min(1.0, 0.5 * cfg.sim.Lx)))
    errs.push_back("drop_radius must fit inside the domain");
  if (!errs.empty()) {
    std::string msg = "invalid configuration:";
    for (auto& e : errs) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  return cfg;
}

RunResult run(const RunConfig& cfg_in, const RunOptions& opt) {
  const auto t_start = std::chrono::steady_clock::now();
  RunResult res;
  res.cfg = prepare(cfg_in);
  const RunConfig& cfg = res.cfg;
  const SimParams& sp = cfg.sim;
  auto log = [&](const std::string& m) {
    if (opt.log) opt.log(m);
  };

  SpectralGrid g(sp.Nx, sp.Ny, sp.Lx);
  Integrator integ(g, sp);
  const std::string dir = cfg.exp.output_dir;
  if (opt.write_files) fs::create_directories(dir);
  const std::string ckpt_path = (fs::path(dir) / "checkpoint.mcls").string();

  FieldState s;
  if (opt.resume_from) {
    Checkpoint c = read_checkpoint(*opt.resume_from, &cfg, opt.force);
    s = std::move(c.state);
    s.mu = chemical_potential(g, s.now.phi, sp.eps);
    res.last_checkpoint = *opt.resume_from;
    log("resumed from " + *opt.resume_from + " at step " + std::to_string(s.step));
  } else {
    s = initial_state(g, cfg);
  }

  const std::int64_t n_total = steps_for(sp.T_end, sp.dt);
  std::vector<std::int64_t> snap_steps;
  for (double t : cfg.exp.snapshot_times) snap_steps.push_back(steps_for(t, sp.dt));
  snap_steps.push_back(n_total);
  std::sort(snap_steps.begin(), snap_steps.end());
  snap_steps.erase(std::unique(snap_steps.begin(), snap_steps.end()), snap_steps.end());

  const AngleBand band{cfg.exp.theta_band_lo, cfg.exp.theta_band_hi};
  auto take_snapshot = [&](const FieldState& st) {
    Snapshot snap;
    snap.t = st.t;
    snap.step = st.step;
    snap.curves = extract_interface(g, st.now.phi, sp.eps);
    if (opt.write_files) {
      snap.checkpoint_path = (fs::path(dir) / ("snapshot_t" + tag_time(st.t) + ".mcls")).string();
      write_checkpoint(snap.checkpoint_path, st, cfg);
      write_csv((fs::path(dir) / ("interface_t" + tag_time(st.t) + ".csv")).string(), interface_table(cfg, snap.curves));
    }
    res.snapshots.push_back(std::move(snap));
  };
  auto is_snap = [&](std::int64_t k) { return std::binary_search(snap_steps.begin(), snap_steps.end(), k); };

  res.records.push_back(record(g, s, sp, band));
  if (!opt.resume_from && is_snap(s.step)) take_snapshot(s);

  while (s.step < n_total) {
    StepReport rep;
    try {
      rep = integ.step(s);
    } catch (const StepFailure& f) {
      throw RunError(std::string(f.what()) + " (last checkpoint: " +
                         (res.last_checkpoint.empty() ? "none" : res.last_checkpoint) + ")",
                     res.last_checkpoint);
    }
    res.steps.push_back(rep);
    if (opt.record_energy_every_step) res.energy.push_back(total_energy(g, s.now.phi, s.now.u, s.now.w, sp).total());
    if (opt.on_step) opt.on_step(s, rep);
    const bool last = s.step == n_total;
    if (s.step % cfg.exp.record_stride == 0 || last || is_snap(s.step)) res.records.push_back(record(g, s, sp, band));
    if (is_snap(s.step)) take_snapshot(s);
    const bool stop = opt.stop_at_step >= 0 && s.step >= opt.stop_at_step;
    if (opt.write_files && (s.step % cfg.exp.checkpoint_every == 0 || last || stop)) {
      write_checkpoint(ckpt_path, s, cfg);
      res.last_checkpoint = ckpt_path;
    }
    if (s.step % 100 == 0 || last) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "step %lld t=%.4f gmres=%d res=%.2e div=%.2e", static_cast<long long>(s.step),
                    s.t, rep.iterations, rep.residual, rep.divmax);
      log(buf);
    }
    if (stop) break;
  }
  res.completed = s.step >= n_total;
  res.final_state = std::move(s);

  if (opt.write_files) {
    write_csv((fs::path(dir) / "diagnostics.csv").string(), diagnostics_table(cfg, res.records));
    write_csv((fs::path(dir) / "contact_lines.csv").string(), contact_line_table(cfg, res.records));
    CsvTable steps;
    steps.comments = metadata_lines(cfg);
    steps.columns = {"step", "iterations", "residual", "mass_shift", "divmax"};
    const std::int64_t first = res.final_state.step - static_cast<std::int64_t>(res.steps.size()) + 1;
    for (size_t i = 0; i < res.steps.size(); ++i) {
      const auto& r = res.steps[i];
      steps.rows.push_back({static_cast<double>(first + static_cast<std::int64_t>(i)), double(r.iterations),
                            r.residual, r.mass_shift, r.divmax});
    }
    write_csv((fs::path(dir) / "steps.csv").string(), steps);
    if (res.completed && cfg.exp.scenario == "couette") {
      try {
        write_csv((fs::path(dir) / "limits.csv").string(),
                  limit_table(cfg, limit_checks(g, res.final_state, cfg, res.records)));
      } catch (const std::exception& e) {
        log(std::string("limit checks skipped: ") + e.what());
      }
    }
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return res;
}

std::optional<InterfaceCurve> bottom_left_half(const std::vector<InterfaceCurve>& curves, const SpectralGrid& g,
                                               const Field& phi) {
  const auto roots = wall_roots(g, phi, Wall::Bottom);
  auto it = std::find_if(roots.begin(), roots.end(), [](const WallRoot& r) { return r.slope > 0; });
  if (it == roots.end()) return std::nullopt;
  for (const InterfaceCurve& c : curves) {
    std::vector<Eigen::Vector2d> pts = c.pts;
    if (c.end_wall == Wall::Bottom) std::reverse(pts.begin(), pts.end());
    else if (c.start_wall != Wall::Bottom) continue;
    if (std::abs(std::remainder(pts.front().x() - it->x, g.lx())) > 1e-6) continue;
    InterfaceCurve out;
    out.start_wall = Wall::Bottom;
    for (size_t k = 0; k < pts.size(); ++k) {
      if (pts[k].y() <= 0.0) {
        out.pts.push_back(pts[k]);
        continue;
      }
      if (k > 0) {
        const Eigen::Vector2d& a = pts[k - 1];
        const double s = -a.y() / (pts[k].y() - a.y());
        out.pts.push_back(a + s * (pts[k] - a));
      }
      break;
    }
    return out;
  }
  return std::nullopt;
}

std::array<std::vector<double>, 4> contact_line_velocities(const std::vector<DiagnosticsRecord>& recs, int window) {
  std::array<std::vector<double>, 4> out;
  std::vector<double> t;
  for (const auto& r : recs) t.push_back(r.t);
  for (int k = 0; k < 4; ++k) {
    std::vector<double> x;
    for (const auto& r : recs) x.push_back(r.x_cl[k]);
    out[k] = contact_line_velocity(t, x, window);
  }
  return out;
}

LimitCheckReport limit_checks(const SpectralGrid& g, const FieldState& s, const RunConfig& cfg,
                              const std::vector<DiagnosticsRecord>& recs, std::optional<LimitTag> tag) {
  const SimParams& sp = cfg.sim;
  LimitCase lc = limit_case_for(cfg.scaling.beta, sp.eps, sp.Vs);
  if (tag) lc.tag = *tag;
  LimitCheckReport rep;
  if (recs.empty()) return rep;
  const DiagnosticsRecord& last = recs.back();
  const auto vcl = contact_line_velocities(recs, cfg.exp.vcl_window);
  static const char* names[4] = {"bl", "br", "tl", "tr"};
  for (int k = 0; k < 4; ++k) {
    if (std::isnan(last.x_cl[k]) || std::isnan(last.theta[k])) continue;
    ContactLine cl;
    cl.wall = k < 2 ? Wall::Bottom : Wall::Top;
    cl.slope = k % 2 == 0 ? 1 : -1;
    cl.x = last.x_cl[k];
    cl.theta = std::numbers::pi - last.theta[k] * std::numbers::pi / 180.0;

    LimitCheckRow gn;
    gn.relation = std::string("gnbc_") + names[k];
    gn.definition = "(sgn int[(u-u_w)/ls + d_n u]dx - cB sigma (cos th - cos th_s)) / (cB sigma), |x-x_cl| <= " +
                    format_double(cfg.exp.gnbc_halfwidth) + " eps";
    gn.t = last.t;
    gn.residual = gnbc_slip_balance(g, s.now.u, sp, cl, cfg.exp.gnbc_halfwidth * sp.eps);
    gn.tolerance = 0.25;
    gn.pass = std::abs(gn.residual) <= gn.tolerance;
    rep.rows.push_back(gn);

    const double vm = conormal_velocity(last.v_slip[k], cl.slope);
    const double Vm = vcl[k].empty() ? 0.0 : -cl.slope * vcl[k].back();
    LimitCheckRow cr;
    cr.t = last.t;
    switch (lc.tag) {
      case LimitTag::CaseI:
        cr.relation = std::string("case1_") + names[k];
        cr.definition = "|V_CL - v.m| / max(|v.m|, 0.01)";
        cr.residual = std::abs(Vm - vm) / std::max(std::abs(vm), 0.01);
        cr.tolerance = 0.25;
        break;
      case LimitTag::CaseII:
        cr.relation = std::string("case2_steady_") + names[k];
        cr.definition = "|v.m - (alpha/sin th)(cos th - cos th_s)| / max(|v.m|, 0.01), alpha = eps Vs = " +
                        format_double(lc.alpha_diff);
        cr.residual = case2_steady_residual(vm, lc.alpha_diff, cl.theta, sp.theta_s);
        cr.tolerance = 0.25;
        break;
      case LimitTag::CaseIII:
        cr.relation = std::string("case3_") + names[k];
        cr.definition = "|th - th_s| in degrees";
        cr.residual = std::abs(cl.theta - sp.theta_s) * 180.0 / std::numbers::pi;
        cr.tolerance = 5.0;
        break;
    }
    cr.pass = cr.residual <= cr.tolerance;
    rep.rows.push_back(cr);
  }
  return rep;
}

CellResult summarize_cell(const RunResult& r) {
  CellResult c;
  c.key = {r.cfg.sim.eps, r.cfg.scaling.alpha, r.cfg.scaling.beta};
  c.ok = r.completed;
  c.output_dir = r.cfg.exp.output_dir;
  SpectralGrid g(r.cfg.sim.Nx, r.cfg.sim.Ny, r.cfg.sim.Lx);
  c.final_curves = extract_interface(g, r.final_state.now.phi, r.cfg.sim.eps);
  c.bottom_left = bottom_left_half(c.final_curves, g, r.final_state.now.phi);
  for (const auto& rec : r.records) {
    c.t.push_back(rec.t);
    for (int k = 0; k < 4; ++k) c.theta[k].push_back(rec.theta[k]);
  }
  if (r.cfg.exp.scenario == "couette") c.limits = limit_checks(g, r.final_state, r.cfg, r.records);
  return c;
}

void compute_distances(ConvergenceReport& rep) {
  rep.distances.clear();
  std::map<std::pair<double, double>, std::vector<const CellResult*>> groups;
  for (const auto& [k, c] : rep.cells) groups[{std::get<1>(k), std::get<2>(k)}].push_back(&c);
  for (auto& [ab, cells] : groups) {
    std::sort(cells.begin(), cells.end(),
              [](const CellResult* a, const CellResult* b) { return std::get<0>(a->key) > std::get<0>(b->key); });
    for (size_t i = 0; i + 1 < cells.size(); ++i) {
      const CellResult& a = *cells[i];
      const CellResult& b = *cells[i + 1];
      if (!a.ok || !b.ok || !a.bottom_left || !b.bottom_left) continue;
      rep.distances.push_back({ab.first, ab.second, std::get<0>(a.key), std::get<0>(b.key),
                               hausdorff_distance(*a.bottom_left, *b.bottom_left)});
    }
  }
}

ConvergenceReport sweep(const RunConfig& cfg, const std::function<void(const std::string&)>& log) {
  std::vector<CellKey> keys;
  for (double a : cfg.scaling.alphas())
    for (double b : cfg.scaling.betas())
      for (double eps : cfg.scaling.eps_list) keys.emplace_back(eps, a, b);

  std::mutex log_mutex;
  auto say = [&](const std::string& m) {
    if (!log) return;
    std::lock_guard<std::mutex> lock(log_mutex);
    log(m);
  };
  std::vector<CellResult> results(keys.size());
  auto run_cell = [&](size_t i) {
    const CellKey& key = keys[i];
    RunConfig c = cfg;
    std::tie(c.sim.eps, c.scaling.alpha, c.scaling.beta) = key;
    c.scaling.alpha_list.clear();
    c.scaling.beta_list.clear();
    c.explicit_Ld = c.explicit_Vs = false;
    c.sim.Nx = c.sim.Ny = 0;
    c.exp.output_dir = (fs::path(cfg.exp.output_dir) / cell_name(key)).string();
    say("cell " + cell_name(key));
    try {
      RunOptions opt;
      opt.log = [&, name = cell_name(key)](const std::string& m) { say(name + ": " + m); };
      results[i] = summarize_cell(run(c, opt));
    } catch (const std::exception& e) {
      CellResult bad;
      bad.key = key;
      bad.error = e.what();
      bad.output_dir = c.exp.output_dir;
      results[i] = std::move(bad);
      say("cell " + cell_name(key) + " failed: " + e.what());
    }
  };

  const int workers = std::max(1, std::min<int>(cfg.exp.threads, static_cast<int>(keys.size())));
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < keys.size(); i = next++) run_cell(i);
  };
  std::vector<std::thread> pool;
  for (int k = 1; k < workers; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  ConvergenceReport rep;
  for (size_t i = 0; i < keys.size(); ++i) rep.cells[keys[i]] = std::move(results[i]);
  compute_distances(rep);
  return rep;
}

}  // namespace mcl
