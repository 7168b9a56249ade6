#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "mcl/integrator.hpp"
#include "mcl/sharp_limit.hpp"

namespace mcl {

/// Initial data for the configured scenario on grid g.
///   couette: tanh strip centred in [0, Lx], v = (y, 0)
///   strip:   same phase field, fluid at rest
///   drop:    disc of phi < 0 with radius drop_radius centred at (Lx/2, 0), at rest
FieldState initial_state(const SpectralGrid& g, const RunConfig& cfg);
FieldState couette_setup(const SpectralGrid& g, const RunConfig& cfg);

/// Applies scenario-specific overrides (walls at rest for strip and drop),
/// resolves scalings and resolution, and validates. For a drop, Ny is also
/// raised until the nodes across the interface are at most 1.5 eps apart
/// (an explicit Ny that is coarser is rejected). Throws ValidationError.
RunConfig prepare(RunConfig cfg);

struct RunOptions {
  std::optional<std::string> resume_from;  // checkpoint path
  bool force = false;                      // accept parameter mismatch on resume
  std::int64_t stop_at_step = -1;          // interrupt after this step index (checkpoint written)
  bool write_files = true;
  bool record_energy_every_step = false;
  std::function<void(const FieldState&, const StepReport&)> on_step;
  std::function<void(const std::string&)> log;
};

struct RunError : std::runtime_error {
  RunError(const std::string& msg, std::string checkpoint)
      : std::runtime_error(msg), last_checkpoint(std::move(checkpoint)) {}
  std::string last_checkpoint;
};

struct Snapshot {
  double t = 0.0;
  std::int64_t step = 0;
  std::string checkpoint_path;  // empty when files are not written
  std::vector<InterfaceCurve> curves;
};

struct RunResult {
  RunConfig cfg;
  std::vector<DiagnosticsRecord> records;
  std::vector<StepReport> steps;
  std::vector<double> energy;  // total energy after every step (if requested)
  std::vector<Snapshot> snapshots;
  FieldState final_state;
  std::string last_checkpoint;
  bool completed = false;
  double seconds = 0.0;
};

RunResult run(const RunConfig& cfg, const RunOptions& opt = {});

/// Polyline through the left interface (the one holding the bottom-left
/// contact line) restricted to y <= 0.
std::optional<InterfaceCurve> bottom_left_half(const std::vector<InterfaceCurve>& curves, const SpectralGrid& g,
                                               const Field& phi);

/// Contact-line velocities along the conormal of each slot from the record series.
std::array<std::vector<double>, 4> contact_line_velocities(const std::vector<DiagnosticsRecord>& recs, int window);

/// Sharp-limit residuals at the final recorded state of a run.
LimitCheckReport limit_checks(const SpectralGrid& g, const FieldState& s, const RunConfig& cfg,
                              const std::vector<DiagnosticsRecord>& recs, std::optional<LimitTag> tag = {});

using CellKey = std::tuple<double, double, double>;  // (eps, alpha, beta)

struct CellResult {
  CellKey key;
  bool ok = false;
  std::string error;
  std::string output_dir;
  std::vector<InterfaceCurve> final_curves;
  std::optional<InterfaceCurve> bottom_left;
  std::vector<double> t;
  std::array<std::vector<double>, 4> theta;  // degrees inside phi < 0
  LimitCheckReport limits;
};

struct ConvergenceReport {
  std::map<CellKey, CellResult> cells;
  /// Hausdorff distance between consecutive eps (coarse, fine) for each (alpha, beta).
  struct Distance {
    double alpha, beta, eps_coarse, eps_fine, distance;
  };
  std::vector<Distance> distances;
};

/// Cell result from a finished run.
CellResult summarize_cell(const RunResult& r);
/// Fills the consecutive-eps distances from the cells present.
void compute_distances(ConvergenceReport& rep);

/// Every (eps, alpha, beta) combination of cfg.scaling; a failing cell is
/// recorded and the sweep continues.
ConvergenceReport sweep(const RunConfig& cfg, const std::function<void(const std::string&)>& log = {});

// Output files (all begin with "# mclsim v<version>" and the flattened config).
struct CsvTable {
  std::vector<std::string> comments;  // lines without the leading "# "
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::vector<std::string> metadata_lines(const RunConfig& cfg);
std::string format_csv(const CsvTable& t);
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& t);

CsvTable diagnostics_table(const RunConfig& cfg, const std::vector<DiagnosticsRecord>& recs);
CsvTable contact_line_table(const RunConfig& cfg, const std::vector<DiagnosticsRecord>& recs);
CsvTable interface_table(const RunConfig& cfg, const std::vector<InterfaceCurve>& curves);
CsvTable limit_table(const RunConfig& cfg, const LimitCheckReport& rep);

struct SvgSeries {
  std::string label;
  std::vector<InterfaceCurve> curves;
};
std::string render_svg(const std::string& title, const std::vector<SvgSeries>& series,
                       const std::vector<std::string>& metadata);

/// Writes report.csv, distances.csv, one interface SVG per (alpha, beta)
/// and summary.txt into dir.
void emit_outputs(const ConvergenceReport& rep, const RunConfig& cfg, const std::string& dir);
std::string summary_text(const ConvergenceReport& rep);

}  // namespace mcl
