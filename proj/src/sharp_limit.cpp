#include "mcl/sharp_limit.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace mcl {

double profile_energy(double width, double half_window) {
  auto f = [width](double xi) {
    const double c = std::cosh(xi / width);
    const double d = 1.0 / (width * c * c);
    return d * d;
  };
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -half_window, half_window, 20, 1e-15,
                                                                       &err);
}

double sigma_constant(double half_window) { return profile_energy(std::sqrt(2.0), half_window); }

double young_residual(double theta_s) {
  const double jump = wall_energy(1.0, theta_s) - wall_energy(-1.0, theta_s);
  return std::abs(kSigmaExact * std::cos(theta_s)) - std::abs(jump);
}

LimitCase limit_case_for(double beta, double eps, double Vs) {
  LimitCase c;
  c.alpha_diff = eps * Vs;
  if (std::abs(beta + 1.0) < 1e-12) c.tag = LimitTag::CaseII;
  else c.tag = beta > -1.0 ? LimitTag::CaseI : LimitTag::CaseIII;
  return c;
}

LimitTag parse_limit_tag(const std::string& s) {
  if (s == "I" || s == "1" || s == "CaseI") return LimitTag::CaseI;
  if (s == "II" || s == "2" || s == "CaseII") return LimitTag::CaseII;
  if (s == "III" || s == "3" || s == "CaseIII") return LimitTag::CaseIII;
  throw std::invalid_argument("unknown limit case '" + s + "' (expected I, II or III)");
}

std::string to_string(LimitTag t) {
  switch (t) {
    case LimitTag::CaseI: return "I";
    case LimitTag::CaseII: return "II";
    case LimitTag::CaseIII: return "III";
  }
  return "?";
}

double predict_Vcl(const LimitCase& c, double v_slip_m, double theta_d, double theta_s) {
  if (!(theta_d > 0.0 && theta_d < std::numbers::pi))
    throw std::domain_error("predict_Vcl: theta_d outside (0, pi)");
  switch (c.tag) {
    case LimitTag::CaseI: return v_slip_m;
    case LimitTag::CaseII: {
      if (!(c.alpha_diff > 0.0)) throw std::invalid_argument("predict_Vcl: Case II needs alpha_diff > 0");
      const double s = std::sin(theta_d);
      if (s < 1e-6) throw std::domain_error("predict_Vcl: sin(theta_d) below 1e-6");
      return v_slip_m - c.alpha_diff / s * (std::cos(theta_d) - std::cos(theta_s));
    }
    case LimitTag::CaseIII: return theta_d - theta_s;
  }
  return 0.0;
}

double conormal_velocity(double u_wall, int slope) {
  // m points out of phi > 0, i.e. towards decreasing phi along the wall.
  return slope > 0 ? -u_wall : u_wall;
}

double case2_steady_residual(double v_slip_m, double alpha_diff, double theta_d, double theta_s) {
  const double predicted = alpha_diff / std::sin(theta_d) * (std::cos(theta_d) - std::cos(theta_s));
  return std::abs(v_slip_m - predicted) / std::max(std::abs(v_slip_m), 0.01);
}

double gnbc_slip_balance(const SpectralGrid& g, const Field& u, const SimParams& sp, const ContactLine& cl,
                         double halfwidth) {
  if (2.0 * halfwidth >= g.lx()) throw std::invalid_argument("gnbc_slip_balance: window exits the domain");
  const double uw = cl.wall == Wall::Bottom ? sp.v_w_bot : sp.v_w_top;
  Eigen::VectorXd integrand =
      (g.trace(u, cl.wall).array() - uw) / sp.ls + g.normal_derivative(u, cl.wall).array();
  const PeriodicInterpolant f(integrand, g.lx());
  double err = 0.0;
  const double lhs = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double x) { return f(x); }, cl.x - halfwidth, cl.x + halfwidth, 15, 1e-13, &err);
  const double cB = sp.young_stress_has_B ? sp.B : 1.0;
  const double scale = cB * kSigmaExact;
  return ((cl.slope > 0 ? lhs : -lhs) - scale * (std::cos(cl.theta) - std::cos(sp.theta_s))) / scale;
}

std::vector<StressJumpSample> stress_jump_check(const SpectralGrid& g, const Field& phi, const Field& mu,
                                                const Field& u, const Field& w, const Field& p,
                                                const SimParams& sp, const InterfaceCurve& curve,
                                                const InterfaceCurve* previous, double dt, double offset_eps) {
  const double eps = sp.eps;
  const double off = offset_eps * eps;
  const Interpolant Iphi = g.interpolant(phi), Imu = g.interpolant(mu), Iu = g.interpolant(u),
                    Iw = g.interpolant(w), Ip = g.interpolant(p);
  const std::vector<double> kappa = curvature(curve);

  struct Probe {
    double P, snn;
    Eigen::Vector2d v;
  };
  auto probe = [&](const Eigen::Vector2d& q, const Eigen::Vector2d& n) {
    double f, fx, fy, m, mx, my, uu, ux, uy, ww, wx, wy, pp, px, py;
    Iphi.eval(q.x(), q.y(), f, fx, fy);
    Imu.eval(q.x(), q.y(), m, mx, my);
    Iu.eval(q.x(), q.y(), uu, ux, uy);
    Iw.eval(q.x(), q.y(), ww, wx, wy);
    Ip.eval(q.x(), q.y(), pp, px, py);
    Probe r;
    r.P = pp + sp.B * m * f;
    r.snn = n.x() * (n.x() * ux + n.y() * uy) + n.y() * (n.x() * wx + n.y() * wy);
    r.v = {uu, ww};
    return r;
  };

  std::vector<StressJumpSample> out;
  bool any_far = false;
  for (size_t k = 0; k < curve.pts.size(); ++k) {
    const Eigen::Vector2d& x = curve.pts[k];
    if (1.0 - std::abs(x.y()) < 6.0 * eps) continue;
    double f, fx, fy;
    Iphi.eval(x.x(), x.y(), f, fx, fy);
    Eigen::Vector2d n(fx, fy);
    if (n.norm() == 0.0) continue;
    n.normalize();
    const Eigen::Vector2d xp = x + off * n, xm = x - off * n;
    if (std::abs(xp.y()) > 1.0 || std::abs(xm.y()) > 1.0) continue;
    any_far = true;
    const Probe a = probe(xp, n), b = probe(xm, n);
    StressJumpSample s;
    s.x = x.x();
    s.y = x.y();
    s.kappa = kappa[k];
    s.pressure_jump = b.P - a.P;
    s.normal_stress = (-a.P + a.snn) - (-b.P + b.snn) - sp.B * kSigmaExact * s.kappa;
    s.velocity_jump = (a.v - b.v).norm();
    s.vn_residual = std::numeric_limits<double>::quiet_NaN();
    if (previous && dt > 0.0 && previous->pts.size() >= 2) {
      // Closest point on the previous polyline.
      double best = std::numeric_limits<double>::infinity();
      Eigen::Vector2d qbest = previous->pts[0];
      const size_t m = previous->pts.size();
      const size_t nseg = previous->closed ? m : m - 1;
      for (size_t j = 0; j < nseg; ++j) {
        const Eigen::Vector2d& a0 = previous->pts[j];
        const Eigen::Vector2d ab = previous->pts[(j + 1) % m] - a0;
        const double t = std::clamp((x - a0).dot(ab) / std::max(ab.squaredNorm(), 1e-300), 0.0, 1.0);
        const Eigen::Vector2d q = a0 + t * ab;
        const double d = (x - q).norm();
        if (d < best) {
          best = d;
          qbest = q;
        }
      }
      double uu, ww;
      uu = Iu.value(x.x(), x.y());
      ww = Iw.value(x.x(), x.y());
      const double Vn = (x - qbest).dot(n) / dt;
      s.vn_residual = std::abs(Vn - (uu * n.x() + ww * n.y()));
    }
    out.push_back(s);
  }
  if (!any_far) throw std::runtime_error("stress_jump_check: no interface point clears the walls by 6 eps");
  return out;
}

bool LimitCheckReport::all_pass() const {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

}  // namespace mcl
