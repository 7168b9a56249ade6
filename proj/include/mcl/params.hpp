#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mcl {

struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Dimensional inputs. xi and gamma are derived from K and r.
struct PhysicalParams {
  double M = 1.0;            // mobility
  double K = 1.0;            // gradient-energy coefficient
  double r = 1.0;            // double-well coefficient
  double rho = 1.0;          // density
  double eta = 1.0;          // viscosity
  double beta_slip = 1.0;    // slip coefficient
  double gamma_relax = 1.0;  // wall relaxation coefficient
  double l = 1.0;            // length scale
  double vstar = 1.0;        // velocity scale

  double xi() const;     // interface thickness sqrt(K/r)
  double gamma() const;  // surface tension 2*sqrt(2)*r*xi/3
};

struct DimensionlessGroups {
  double Ld = 0.0;
  double Re = 0.0;
  double B = 0.0;
  double Vs = 0.0;
  double ls = 0.0;
  double eps = 0.0;
};

struct SimParams {
  double Re = 1e-4;
  double B = 50.0;
  double ls = 0.01;
  double eps = 0.02;
  double Ld = 0.02;
  double Vs = 50.0;
  double theta_s = 1.5707963267948966;  // radians
  double Lx = 6.0;
  double v_w_top = 1.0;
  double v_w_bot = -1.0;
  double F_x = 0.0;
  double F_y = 0.0;
  double dt = 1e-4;
  double T_end = 0.2;
  int Nx = 0;  // 0 selects the resolution rule's minimum
  int Ny = 0;
  double gmres_tol = 1e-10;
  int gmres_max_iter = 400;
  int gmres_restart = 80;
  bool young_stress_has_B = true;
};

struct ScalingSpec {
  double alpha = 1.0;
  double beta = -1.0;
  double ld0 = 1.0;
  double vs0 = 1.0;
  std::vector<double> eps_list{0.04, 0.02, 0.01, 0.005};
  // Sweep axes; empty means {alpha} / {beta}.
  std::vector<double> alpha_list;
  std::vector<double> beta_list;

  std::vector<double> alphas() const { return alpha_list.empty() ? std::vector<double>{alpha} : alpha_list; }
  std::vector<double> betas() const { return beta_list.empty() ? std::vector<double>{beta} : beta_list; }
};

/// Harness-level settings that are not part of the dimensionless model.
struct ExperimentSettings {
  std::string scenario = "couette";  // couette | strip | drop
  std::string output_dir = "out";
  std::vector<double> snapshot_times{0.2};
  int record_stride = 10;
  int checkpoint_every = 500;
  double theta_band_lo = 1.0;  // fitting band for contact angles, in units of eps
  double theta_band_hi = 4.0;
  int vcl_window = 5;
  double gnbc_halfwidth = 6.0;  // in units of eps
  double drop_radius = 0.5;
  int ny_min = 32;
  int threads = 1;
};

struct RunConfig {
  SimParams sim;
  ScalingSpec scaling;
  ExperimentSettings exp;
  bool explicit_Ld = false;  // Ld given directly instead of through the scaling
  bool explicit_Vs = false;
};

DimensionlessGroups nondimensionalize(const PhysicalParams& p);

/// (Ld, Vs) = (ld0 eps^alpha, vs0 eps^beta). eps must be one of s.eps_list.
std::pair<double, double> resolve_scalings(const ScalingSpec& s, double eps);

/// Every violated invariant, empty when the parameters are usable.
std::vector<std::string> validate(const SimParams& sp);
std::vector<std::string> validate(const ScalingSpec& s);

/// Wall-adjacent LGL spacing 1 - y_{N-1} for polynomial order n.
double lobatto_wall_spacing(int n);
/// Largest gap between consecutive Lobatto nodes reaching into |y| <= ymax.
double lobatto_max_spacing(int n, double ymax);

/// Smallest admissible (Nx, Ny) for eps on [0, Lx] x [-1, 1].
std::pair<int, int> auto_resolution(double eps, double Lx, int ny_min = 32);

/// Fills Ld/Vs from the scaling (unless given explicitly) and Nx/Ny when zero.
void finalize(RunConfig& cfg);

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);
/// INI text that parse_config reads back to the same configuration.
std::string flatten(const RunConfig& cfg);
/// "section.key = value" lines, used as output-file headers.
std::vector<std::pair<std::string, std::string>> flatten_pairs(const RunConfig& cfg);

std::string format_double(double v);

}  // namespace mcl
