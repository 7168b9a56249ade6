#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>

#include "mcl/checkpoint.hpp"
#include "mcl/harness.hpp"
#include "mcl/sharp_limit.hpp"

using namespace mcl;

namespace {

enum Exit { kOk = 0, kFail = 1, kBadInput = 2, kRunFailed = 3 };

void log_line(const std::string& s) { std::cerr << s << "\n"; }

int cmd_run(const std::string& path, const std::string& resume, bool force, const std::string& out) {
  RunConfig cfg = load_config(path);
  if (!out.empty()) cfg.exp.output_dir = out;
  RunOptions opt;
  if (!resume.empty()) opt.resume_from = resume;
  opt.force = force;
  opt.log = log_line;
  const RunResult r = run(cfg, opt);
  std::printf("completed %lld steps in %.1f s; output in %s\n",
              static_cast<long long>(r.final_state.step), r.seconds, r.cfg.exp.output_dir.c_str());
  if (!r.records.empty()) {
    const auto& last = r.records.back();
    std::printf("t = %.6g  mass = %.12g  divmax = %.3e\n", last.t, last.mass, last.divmax);
  }
  return kOk;
}

int cmd_sweep(const std::string& path, const std::string& out, int threads) {
  RunConfig cfg = load_config(path);
  if (!out.empty()) cfg.exp.output_dir = out;
  if (threads > 0) cfg.exp.threads = threads;
  const ConvergenceReport rep = sweep(cfg, log_line);
  emit_outputs(rep, cfg, cfg.exp.output_dir);
  std::cout << summary_text(rep);
  for (const auto& [key, cell] : rep.cells)
    if (!cell.ok) return kRunFailed;
  return kOk;
}

int cmd_diag(const std::string& path, const std::string& limit_case) {
  const Checkpoint cp = read_checkpoint(path);
  RunConfig cfg = cp.config;
  const SimParams& sp = cfg.sim;
  SpectralGrid g(cp.header.nx, cp.header.ny, cp.header.lx);
  FieldState s = cp.state;
  s.mu = chemical_potential(g, s.now.phi, sp.eps);
  const AngleBand band{cfg.exp.theta_band_lo, cfg.exp.theta_band_hi};

  // Two-point series from the stored history pair.
  FieldState before = s;
  before.now = s.prev;
  before.mu = chemical_potential(g, s.prev.phi, sp.eps);
  before.t = s.t - sp.dt;
  std::vector<DiagnosticsRecord> recs;
  if (s.step > 0) recs.push_back(record(g, before, sp, band));
  recs.push_back(record(g, s, sp, band));
  const DiagnosticsRecord& r = recs.back();

  std::printf("snapshot %s\n", path.c_str());
  std::printf("grid %d x %d, Lx = %g, eps = %g, t = %.6g, step = %lld\n", g.nx(), g.ny(), g.lx(), sp.eps, s.t,
              static_cast<long long>(s.step));
  std::printf("mass %.15g\nE_kin %.15g\nE_bulk %.15g\nE_wall %.15g\ndivmax %.3e\n", r.mass, r.E_kin, r.E_bulk,
              r.E_wall, r.divmax);
  static const char* names[4] = {"bl", "br", "tl", "tr"};
  for (int k = 0; k < 4; ++k)
    std::printf("contact %s  x = %.10g  theta = %.6g deg  v_slip = %.6g\n", names[k], r.x_cl[k], r.theta[k],
                r.v_slip[k]);

  const auto curves = extract_interface(g, s.now.phi, sp.eps);
  std::printf("interface curves %zu\n", curves.size());

  RunConfig dcfg = cfg;
  dcfg.exp.vcl_window = 1;
  std::optional<LimitTag> tag;
  if (!limit_case.empty()) tag = parse_limit_tag(limit_case);
  const LimitCheckReport rep = limit_checks(g, s, dcfg, recs, tag);
  for (const auto& row : rep.rows)
    std::printf("%-22s residual %-12.5g tol %-6g %s\n", row.relation.c_str(), row.residual, row.tolerance,
                row.pass ? "pass" : "FAIL");
  return rep.all_pass() ? kOk : kFail;
}

struct CheckLine {
  std::string name;
  double value, tol;
};

// Manufactured problems with closed-form answers.
double helmholtz_error() {
  const double L = 3.0, k = 2 * std::numbers::pi / L;
  SpectralGrid g(32, 24, L);
  auto u = [&](double x, double y) { return std::sin(k * x) * std::exp(y) + 0.5 * y; };
  // (2 - Laplacian) u with Laplacian = (1 - k^2) sin(kx) e^y.
  const Field rhs = g.sample([&](double x, double y) {
    return 2.0 * u(x, y) - (1.0 - k * k) * std::sin(k * x) * std::exp(y);
  });
  RobinBC b{2.0, 0.5, {}}, t{1.0, 3.0, {}};
  b.g.resize(g.nx());
  t.g.resize(g.nx());
  for (int i = 0; i < g.nx(); ++i) {
    const double x = g.x()(i), s = std::sin(k * x);
    b.g(i) = 2.0 * u(x, -1.0) + 0.5 * -(s * std::exp(-1.0) + 0.5);
    t.g(i) = 1.0 * u(x, 1.0) + 3.0 * (s * std::exp(1.0) + 0.5);
  }
  return (g.solve_helmholtz(rhs, 2.0, b, t) - g.sample(u)).cwiseAbs().maxCoeff();
}

double chemical_potential_error() {
  const double L = 2.0, k = 2 * std::numbers::pi / L, eps = 0.3;
  SpectralGrid g(24, 20, L);
  auto f = [&](double x, double y) { return 0.5 * std::sin(k * x) * (1 - y * y) + 0.1 * y; };
  auto lap = [&](double x, double y) { return -0.5 * k * k * std::sin(k * x) * (1 - y * y) - std::sin(k * x); };
  const Field mu = chemical_potential(g, g.sample(f), eps);
  const Field ref = g.sample([&](double x, double y) {
    const double p = f(x, y);
    return -eps * lap(x, y) - p / eps + p * p * p / eps;
  });
  return (mu - ref).cwiseAbs().maxCoeff();
}

int cmd_check() {
  std::vector<CheckLine> lines;
  lines.push_back({"sigma constant", std::abs(sigma_constant() - kSigmaExact), 1e-10});
  for (double deg : {30.0, 60.0, 90.0, 120.0, 150.0})
    lines.push_back({"young residual " + format_double(deg) + " deg",
                     std::abs(young_residual(deg * std::numbers::pi / 180.0)), 1e-12});
  lines.push_back({"manufactured robin helmholtz", helmholtz_error(), 1e-10});
  lines.push_back({"manufactured chemical potential", chemical_potential_error(), 1e-9});
  bool ok = true;
  for (const auto& l : lines) {
    const bool pass = l.value <= l.tol;
    ok = ok && pass;
    std::printf("%-4s %-34s %.3e (tol %.0e)\n", pass ? "ok" : "FAIL", l.name.c_str(), l.value, l.tol);
  }
  return ok ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moving contact line phase-field simulator"};
  app.set_version_flag("--version", std::string("mclsim ") + MCL_VERSION);
  app.require_subcommand(1);

  std::string config, resume, out, snapshot, limit_case;
  bool force = false;
  int threads = 0;

  auto* run_cmd = app.add_subcommand("run", "Run one simulation");
  run_cmd->add_option("config", config, "INI config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--resume", resume, "Checkpoint to continue from")->check(CLI::ExistingFile);
  run_cmd->add_flag("--force", force, "Accept parameter mismatch on resume");
  run_cmd->add_option("--out", out, "Override output directory");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run every (eps, alpha, beta) cell and compare interfaces");
  sweep_cmd->add_option("config", config, "INI config file")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--out", out, "Override output directory");
  sweep_cmd->add_option("--threads", threads, "Concurrent cells")->check(CLI::PositiveNumber);

  auto* diag_cmd = app.add_subcommand("diag", "Diagnostics and sharp-limit residuals of a snapshot");
  diag_cmd->add_option("snapshot", snapshot, "Snapshot or checkpoint file")->required()->check(CLI::ExistingFile);
  diag_cmd->add_option("--limit-case", limit_case, "Override the limit case")
      ->check(CLI::IsMember({"I", "II", "III"}));

  auto* check_cmd = app.add_subcommand("check", "Oracle self-tests");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(config, resume, force, out);
    if (sweep_cmd->parsed()) return cmd_sweep(config, out, threads);
    if (diag_cmd->parsed()) return cmd_diag(snapshot, limit_case);
    if (check_cmd->parsed()) return cmd_check();
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kBadInput;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint: " << e.what() << "\n";
    return kBadInput;
  } catch (const RunError& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    if (!e.last_checkpoint.empty()) std::cerr << "last checkpoint: " << e.last_checkpoint << "\n";
    return kRunFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return kOk;
}
