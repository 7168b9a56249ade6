#include "mcl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

#include <boost/math/tools/roots.hpp>

namespace mcl {
namespace {

using Vec2 = Eigen::Vector2d;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double wall_y(Wall w) { return w == Wall::Bottom ? -1.0 : 1.0; }

double bracket_root(const std::function<double(double)>& f, double a, double b) {
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) return std::abs(fa) < std::abs(fb) ? a : b;  // root at a node, lost to rounding
  boost::math::tools::eps_tolerance<double> tol(50);
  std::uintmax_t it = 100;
  auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, it);
  return 0.5 * (r.first + r.second);
}

// Newton projection onto phi = 0 along the gradient, y kept inside the domain.
Vec2 project(const Interpolant& I, Vec2 p, double max_step) {
  for (int it = 0; it < 40; ++it) {
    double f, fx, fy;
    I.eval(p.x(), p.y(), f, fx, fy);
    const double g2 = fx * fx + fy * fy;
    if (std::abs(f) < 1e-13 || g2 == 0.0) break;
    Vec2 d(-f * fx / g2, -f * fy / g2);
    const double len = d.norm();
    if (len > max_step) d *= max_step / len;
    p += d;
    p.y() = std::clamp(p.y(), -1.0, 1.0);
  }
  return p;
}

Vec2 project_on_wall(const Interpolant& I, Vec2 p, double dx) {
  auto f = [&](double x) { return I.value(x, p.y()); };
  double a = p.x() - dx, b = p.x() + dx;
  for (int k = 0; k < 8 && f(a) * f(b) > 0.0; ++k) {
    a -= dx;
    b += dx;
  }
  if (f(a) * f(b) > 0.0) return p;
  return {bracket_root(f, a, b), p.y()};
}

struct Segment {
  long e0, e1;
  bool used = false;
};

}  // namespace

PeriodicInterpolant::PeriodicInterpolant(const Eigen::VectorXd& v, double lx) : lx_(lx) {
  const int n = static_cast<int>(v.size());
  const FourierTransform fft(n, 1);
  Eigen::MatrixXcd spec;
  fft.forward(v.transpose(), spec);
  c_ = spec.row(0).transpose();
  for (int m = 0; m < c_.size(); ++m) c_(m) *= (m == 0 || (n % 2 == 0 && m == n / 2)) ? 1.0 / n : 2.0 / n;
}

double PeriodicInterpolant::operator()(double x) const {
  const std::complex<double> base = std::polar(1.0, 2.0 * std::numbers::pi * x / lx_);
  std::complex<double> z = 1.0;
  double f = 0.0;
  for (int m = 0; m < c_.size(); ++m) {
    f += (c_(m) * z).real();
    z *= base;
  }
  return f;
}

std::vector<double> InterfaceCurve::arc_length() const {
  std::vector<double> s(pts.size(), 0.0);
  for (size_t i = 1; i < pts.size(); ++i) s[i] = s[i - 1] + (pts[i] - pts[i - 1]).norm();
  return s;
}

std::vector<WallRoot> wall_roots(const SpectralGrid& g, const Field& phi, Wall w) {
  const Eigen::VectorXd tr = g.trace(phi, w);
  const PeriodicInterpolant line(tr, g.lx());
  std::vector<WallRoot> out;
  const int n = g.nx();
  for (int i = 0; i < n; ++i) {
    const double a = tr(i), b = tr((i + 1) % n);
    const bool sa = a >= 0.0, sb = b >= 0.0;
    if (sa == sb) continue;
    const double xa = g.x()(i), xb = xa + g.dx();
    double x = bracket_root(std::cref(line), xa, xb);
    if (x >= g.lx()) x -= g.lx();
    out.push_back({x, sb ? 1 : -1});
  }
  std::sort(out.begin(), out.end(), [](const WallRoot& p, const WallRoot& q) { return p.x < q.x; });
  return out;
}

std::vector<InterfaceCurve> extract_interface(const SpectralGrid& g, const Field& phi, double eps) {
  const int nx = g.nx(), ny = g.ny();
  const Eigen::VectorXd& xs = g.x();
  const Eigen::VectorXd& ys = g.y();
  const double dx = g.dx();
  auto val = [&](int j, int i) { return phi(j, ((i % nx) + nx) % nx); };
  auto hid = [&](int j, int i) { return 2L * (static_cast<long>(j) * nx + i); };
  auto vid = [&](int j, int i) { return 2L * (static_cast<long>(j) * nx + (i % nx)) + 1; };

  // Crossing point on an edge by linear interpolation.
  auto edge_point = [&](long id) -> Vec2 {
    const long cell = id / 2;
    const int j = static_cast<int>(cell / nx), i = static_cast<int>(cell % nx);
    if (id % 2 == 0) {
      const double a = val(j, i), b = val(j, i + 1);
      const double s = a / (a - b);
      return {xs(i) + s * dx, ys(j)};
    }
    const double a = val(j, i), b = val(j + 1, i);
    const double s = a / (a - b);
    return {xs(i), ys(j) + s * (ys(j + 1) - ys(j))};
  };

  std::vector<Segment> segs;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double c0 = val(j, i), c1 = val(j, i + 1), c2 = val(j + 1, i + 1), c3 = val(j + 1, i);
      const int code = (c0 >= 0) | ((c1 >= 0) << 1) | ((c2 >= 0) << 2) | ((c3 >= 0) << 3);
      if (code == 0 || code == 15) continue;
      const long eb = hid(j, i), er = vid(j, i + 1), et = hid(j + 1, i), el = vid(j, i);
      switch (code) {
        case 1: case 14: segs.push_back({el, eb}); break;
        case 2: case 13: segs.push_back({eb, er}); break;
        case 3: case 12: segs.push_back({el, er}); break;
        case 4: case 11: segs.push_back({er, et}); break;
        case 6: case 9: segs.push_back({eb, et}); break;
        case 7: case 8: segs.push_back({el, et}); break;
        case 5: case 10: {
          const bool centre = 0.25 * (c0 + c1 + c2 + c3) >= 0.0;
          const bool pair_lb = (code == 5) != centre;
          if (pair_lb) {
            segs.push_back({el, eb});
            segs.push_back({er, et});
          } else {
            segs.push_back({eb, er});
            segs.push_back({et, el});
          }
          break;
        }
        default: break;
      }
    }
  }

  std::unordered_map<long, std::vector<int>> adj;
  for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
    adj[segs[s].e0].push_back(s);
    adj[segs[s].e1].push_back(s);
  }

  const Interpolant I = g.interpolant(phi);
  auto unwrap_push = [&](std::vector<Vec2>& pts, Vec2 p) {
    if (!pts.empty()) {
      const double d = p.x() - pts.back().x();
      if (d > 0.5 * g.lx()) p.x() -= g.lx();
      if (d < -0.5 * g.lx()) p.x() += g.lx();
    }
    pts.push_back(p);
  };
  auto walk = [&](long start_edge, int seg) {
    std::vector<Vec2> pts;
    unwrap_push(pts, edge_point(start_edge));
    long e = start_edge;
    while (seg >= 0 && !segs[seg].used) {
      segs[seg].used = true;
      e = segs[seg].e0 == e ? segs[seg].e1 : segs[seg].e0;
      unwrap_push(pts, edge_point(e));
      int next = -1;
      for (int s : adj[e])
        if (!segs[s].used) next = s;
      seg = next;
    }
    return std::make_pair(pts, e);
  };

  std::vector<InterfaceCurve> curves;
  // Open curves start at wall edges, which belong to a single cell.
  for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
    for (long e : {segs[s].e0, segs[s].e1}) {
      if (segs[s].used || adj[e].size() != 1) continue;
      auto [pts, last] = walk(e, s);
      InterfaceCurve c;
      c.pts = std::move(pts);
      curves.push_back(std::move(c));
    }
  }
  for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
    if (segs[s].used) continue;
    auto [pts, last] = walk(segs[s].e0, s);
    InterfaceCurve c;
    if (pts.size() > 1 && (pts.front() - pts.back()).norm() < 1e-12) pts.pop_back();
    c.pts = std::move(pts);
    c.closed = true;
    curves.push_back(std::move(c));
  }

  const double h = 0.5 * eps;
  for (InterfaceCurve& c : curves) {
    if (!c.closed) {
      if (c.pts.front().y() == -1.0 || c.pts.front().y() == 1.0)
        c.start_wall = c.pts.front().y() < 0 ? Wall::Bottom : Wall::Top;
      if (c.pts.back().y() == -1.0 || c.pts.back().y() == 1.0)
        c.end_wall = c.pts.back().y() < 0 ? Wall::Bottom : Wall::Top;
    }
    auto refine = [&](Vec2 p, bool on_wall) { return on_wall ? project_on_wall(I, p, dx) : project(I, p, h); };
    std::vector<Vec2> pts;
    for (size_t k = 0; k < c.pts.size(); ++k) {
      const bool on_wall = !c.closed && ((k == 0 && c.start_wall) || (k + 1 == c.pts.size() && c.end_wall));
      const Vec2 p = refine(c.pts[k], on_wall);
      if (!pts.empty() && (p - pts.back()).norm() < 1e-9 * eps) continue;
      pts.push_back(p);
    }
    // Fill gaps wider than eps/2 with projected points.
    for (int pass = 0; pass < 6; ++pass) {
      std::vector<Vec2> out;
      bool changed = false;
      const size_t n = pts.size();
      const size_t nseg = c.closed ? n : n - 1;
      for (size_t k = 0; k < n; ++k) {
        out.push_back(pts[k]);
        if (k >= nseg) continue;
        const Vec2& a = pts[k];
        const Vec2& b = pts[(k + 1) % n];
        const double d = (b - a).norm();
        if (d <= h) continue;
        const int extra = static_cast<int>(std::ceil(d / h)) - 1;
        for (int q = 1; q <= extra; ++q) out.push_back(project(I, a + (b - a) * (double(q) / (extra + 1)), h));
        changed = true;
      }
      pts = std::move(out);
      if (!changed) break;
    }
    c.pts = std::move(pts);

    // Orient so that phi > 0 lies on the left.
    if (c.pts.size() >= 2) {
      const size_t k = c.pts.size() / 2 - (c.pts.size() == 2 ? 1 : 0);
      const Vec2 t = c.pts[std::min(k + 1, c.pts.size() - 1)] - c.pts[k];
      double f, fx, fy;
      I.eval(c.pts[k].x(), c.pts[k].y(), f, fx, fy);
      if (-t.y() * fx + t.x() * fy < 0.0) {
        std::reverse(c.pts.begin(), c.pts.end());
        std::swap(c.start_wall, c.end_wall);
      }
    }
    if (!c.closed && !c.pts.empty()) {
      const double shift = std::floor(c.pts.front().x() / g.lx()) * g.lx();
      if (shift != 0.0)
        for (Vec2& p : c.pts) p.x() -= shift;
    }
  }
  return curves;
}

double dynamic_contact_angle(const InterfaceCurve& c, Wall w, double lo, double hi) {
  const bool from_start = c.start_wall == w;
  if (!from_start && c.end_wall != w) throw std::invalid_argument("dynamic_contact_angle: curve does not touch the wall");
  const double yw = wall_y(w);
  const int n = static_cast<int>(c.pts.size());
  std::vector<Vec2> band;
  for (int q = 0; q < n; ++q) {
    const Vec2& p = c.pts[from_start ? q : n - 1 - q];
    const double d = std::abs(p.y() - yw);
    if (d > hi) break;
    if (d >= lo) band.push_back(p);
  }
  if (band.size() < 3) throw std::runtime_error("dynamic_contact_angle: too few points in the fitting band");
  Vec2 mean = Vec2::Zero();
  for (const Vec2& p : band) mean += p;
  mean /= static_cast<double>(band.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const Vec2& p : band) cov += (p - mean) * (p - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  Vec2 t = es.eigenvectors().col(1);
  const double into = w == Wall::Bottom ? 1.0 : -1.0;
  if (t.y() * into < 0.0) t = -t;
  const Vec2 travel = from_start ? t : Vec2(-t);
  const double nlx = -travel.y();  // x component of the left normal, pointing into phi > 0
  const Vec2 e(nlx > 0.0 ? -1.0 : 1.0, 0.0);
  return std::acos(std::clamp(e.dot(t), -1.0, 1.0));
}

std::vector<double> contact_line_velocity(const std::vector<double>& t, const std::vector<double>& x, int window) {
  const int n = static_cast<int>(x.size());
  if (static_cast<int>(t.size()) != n) throw std::invalid_argument("contact_line_velocity: size mismatch");
  std::vector<double> v(n, 0.0);
  if (n < 2) return v;
  // Local least-squares quadratic (Savitzky-Golay) over `window` samples,
  // differentiated at the sample; the stencil slides inwards at the ends.
  const int m = std::clamp(window, 2, n);
  const int deg = m >= 3 ? 2 : 1;
  for (int i = 0; i < n; ++i) {
    const int lo = std::clamp(i - m / 2, 0, n - m);
    Eigen::MatrixXd A(m, deg + 1);
    Eigen::VectorXd b(m);
    for (int q = 0; q < m; ++q) {
      const double d = t[lo + q] - t[i];
      for (int p = 0; p <= deg; ++p) A(q, p) = std::pow(d, p);
      b(q) = x[lo + q];
    }
    v[i] = A.colPivHouseholderQr().solve(b)(1);
  }
  return v;
}

std::vector<double> curvature(const InterfaceCurve& c) {
  const int n = static_cast<int>(c.pts.size());
  std::vector<double> kappa(n, kNaN);
  if (n < 3) return kappa;
  const int half = std::min(2, (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    std::vector<int> idx;
    int lo = i - half, hi = i + half;
    if (!c.closed) {
      if (lo < 0) { hi -= lo; lo = 0; }
      if (hi > n - 1) { lo -= hi - (n - 1); hi = n - 1; }
      lo = std::max(lo, 0);
    }
    for (int q = lo; q <= hi; ++q) idx.push_back(((q % n) + n) % n);
    // Arc length relative to point i along the chosen stencil.
    std::vector<double> s(idx.size(), 0.0);
    int ci = 0;
    for (size_t q = 0; q < idx.size(); ++q)
      if (idx[q] == i) ci = static_cast<int>(q);
    for (size_t q = 1; q < idx.size(); ++q) s[q] = s[q - 1] + (c.pts[idx[q]] - c.pts[idx[q - 1]]).norm();
    const double s0 = s[ci];
    Eigen::MatrixXd A(idx.size(), 3);
    Eigen::MatrixXd rhs(idx.size(), 2);
    for (size_t q = 0; q < idx.size(); ++q) {
      const double d = s[q] - s0;
      A(q, 0) = 1.0;
      A(q, 1) = d;
      A(q, 2) = d * d;
      rhs(q, 0) = c.pts[idx[q]].x();
      rhs(q, 1) = c.pts[idx[q]].y();
    }
    const Eigen::MatrixXd coef = A.colPivHouseholderQr().solve(rhs);
    const double x1 = coef(1, 0), y1 = coef(1, 1), x2 = 2 * coef(2, 0), y2 = 2 * coef(2, 1);
    const double ks = (x1 * y2 - y1 * x2) / std::pow(x1 * x1 + y1 * y1, 1.5);
    kappa[i] = -ks;
  }
  return kappa;
}

namespace {
double point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double L2 = ab.squaredNorm();
  const double s = L2 > 0.0 ? std::clamp((p - a).dot(ab) / L2, 0.0, 1.0) : 0.0;
  return (p - (a + s * ab)).norm();
}

double directed(const InterfaceCurve& a, const InterfaceCurve& b) {
  double h = 0.0;
  const size_t nb = b.pts.size();
  for (const Vec2& p : a.pts) {
    double d = std::numeric_limits<double>::infinity();
    if (nb == 1) d = (p - b.pts[0]).norm();
    const size_t nseg = b.closed ? nb : nb - 1;
    for (size_t k = 0; k < nseg; ++k) d = std::min(d, point_segment(p, b.pts[k], b.pts[(k + 1) % nb]));
    h = std::max(h, d);
  }
  return h;
}
}  // namespace

double hausdorff_distance(const InterfaceCurve& a, const InterfaceCurve& b) {
  if (a.pts.empty() || b.pts.empty()) throw std::invalid_argument("hausdorff_distance: empty curve");
  return std::max(directed(a, b), directed(b, a));
}

DiagnosticsRecord record(const SpectralGrid& g, const FieldState& s, const SimParams& sp, AngleBand band) {
  DiagnosticsRecord r;
  r.t = s.t;
  r.mass = g.integrate(s.now.phi);
  const EnergyParts e = total_energy(g, s.now.phi, s.now.u, s.now.w, sp);
  r.E_kin = e.kin;
  r.E_bulk = e.bulk;
  r.E_wall = e.wall;
  r.divmax = g.interior_max_abs(g.divergence(s.now.u, s.now.w));
  r.x_cl.fill(kNaN);
  r.theta.fill(kNaN);
  r.v_slip.fill(kNaN);

  const auto curves = extract_interface(g, s.now.phi, sp.eps);
  for (Wall w : {Wall::Bottom, Wall::Top}) {
    const auto roots = wall_roots(g, s.now.phi, w);
    const PeriodicInterpolant u_wall(g.trace(s.now.u, w), g.lx());
    for (int side = 0; side < 2; ++side) {
      const int want = side == 0 ? 1 : -1;
      auto it = std::find_if(roots.begin(), roots.end(), [&](const WallRoot& q) { return q.slope == want; });
      if (it == roots.end()) continue;
      const int slot = (w == Wall::Bottom ? 0 : 2) + side;
      r.x_cl[slot] = it->x;
      r.v_slip[slot] = u_wall(it->x);
      // Curve whose end on this wall matches the root.
      for (const InterfaceCurve& c : curves) {
        const Eigen::Vector2d* end = nullptr;
        if (c.start_wall == w) end = &c.pts.front();
        else if (c.end_wall == w) end = &c.pts.back();
        if (!end) continue;
        double dxp = std::remainder(end->x() - it->x, g.lx());
        if (std::abs(dxp) > sp.eps) continue;
        try {
          r.theta[slot] = dynamic_contact_angle(c, w, band.lo * sp.eps, band.hi * sp.eps) * 180.0 / std::numbers::pi;
        } catch (const std::runtime_error&) {
        }
        break;
      }
    }
  }
  return r;
}

}  // namespace mcl
