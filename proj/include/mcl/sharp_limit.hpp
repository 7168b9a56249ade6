#pragma once

#include <string>
#include <vector>

#include "mcl/diagnostics.hpp"

namespace mcl {

/// Integral of (d/dxi tanh(xi / width))^2 over [-half_window, half_window].
double profile_energy(double width, double half_window);
/// Surface-tension constant of the equilibrium profile tanh(xi / sqrt 2).
double sigma_constant(double half_window = 40.0);
inline constexpr double kSigmaExact = 0.9428090415820634;  // 2 sqrt(2) / 3

/// |sigma cos(theta_s)| - |gamma_wf(1) - gamma_wf(-1)|.
double young_residual(double theta_s);

enum class LimitTag { CaseI, CaseII, CaseIII };

struct LimitCase {
  LimitTag tag = LimitTag::CaseII;
  double alpha_diff = 0.0;  // eps * Vs, used by Case II
};

/// Regime selected by the exponent of Vs = vs0 eps^beta.
LimitCase limit_case_for(double beta, double eps, double Vs);
LimitTag parse_limit_tag(const std::string& s);
std::string to_string(LimitTag t);

/// Angles in radians, measured inside phi > 0; v_slip_m is v_tau . m with m
/// the wall conormal pointing out of phi > 0. Cases I and II return V_CL,
/// Case III returns theta_d - theta_s.
double predict_Vcl(const LimitCase& c, double v_slip_m, double theta_d, double theta_s);

/// One contact line as seen from the wall.
struct ContactLine {
  Wall wall = Wall::Bottom;
  double x = 0.0;
  int slope = 1;       // sign of d(phi)/dx along the wall
  double theta = 0.0;  // radians, inside phi > 0
};

/// Window-integrated slip balance normalised by the Young-stress scale:
/// (sgn * int [(u - u_w)/ls + d_n u] dx - cB sigma (cos theta - cos theta_s)) / (cB sigma)
/// over |x - x_cl| <= halfwidth, with sgn the slope of phi and cB = B or 1.
double gnbc_slip_balance(const SpectralGrid& g, const Field& u, const SimParams& sp, const ContactLine& cl,
                         double halfwidth);

/// Relative slip v_tau . m minus its Case II steady value, scaled by max(|v_tau . m|, 0.01).
double case2_steady_residual(double v_slip_m, double alpha_diff, double theta_d, double theta_s);
/// v_tau . m from the wall velocity at a contact line.
double conormal_velocity(double u_wall, int slope);

struct StressJumpSample {
  double x = 0.0, y = 0.0;
  double kappa = 0.0;
  double pressure_jump = 0.0;   // p_model inside phi < 0 minus outside
  double normal_stress = 0.0;   // [-p + n.(n.grad)v] - B sigma kappa
  double velocity_jump = 0.0;   // |v+ - v-|
  double vn_residual = 0.0;     // |V_n - v.n|, NaN without a previous curve
};

/// Samples every curve point at least 6 eps from the walls; jumps use
/// offsets of +-offset along the normal into phi > 0. p_model = p + B mu phi.
std::vector<StressJumpSample> stress_jump_check(const SpectralGrid& g, const Field& phi, const Field& mu,
                                                const Field& u, const Field& w, const Field& p,
                                                const SimParams& sp, const InterfaceCurve& curve,
                                                const InterfaceCurve* previous = nullptr, double dt = 0.0,
                                                double offset_eps = 5.0);

struct LimitCheckRow {
  std::string relation;
  std::string definition;
  double t = 0.0;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct LimitCheckReport {
  std::vector<LimitCheckRow> rows;
  bool all_pass() const;
};

}  // namespace mcl
