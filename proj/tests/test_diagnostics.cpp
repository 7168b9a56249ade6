#include <cmath>
#include <numbers>

#include "doctest.h"

#include "mcl/diagnostics.hpp"

using namespace mcl;

namespace {
const double kPi = std::numbers::pi;

InterfaceCurve polyline(std::initializer_list<Eigen::Vector2d> pts, bool closed = false) {
  InterfaceCurve c;
  c.pts = pts;
  c.closed = closed;
  return c;
}

// Product of two tanh fronts: phi > 0 inside the sheared strip
// x0 + c (y + 1) < x < x1 + c (y + 1), with exact zeros on both lines.
Field sheared_strip(const SpectralGrid& g, double x0, double x1, double c, double eps) {
  const double w = std::sqrt(2.0) * eps;
  return g.sample([&](double x, double y) {
    const double s = c * (y + 1.0);
    return std::tanh((x - x0 - s) / w) * std::tanh((x1 + s - x) / w);
  });
}
}  // namespace

TEST_CASE("circle: extracted points lie on the level set with bounded spacing") {
  const double eps = 0.05, R = 0.5;
  SpectralGrid g(384, 96, 3.0);
  const Field phi = g.sample([&](double x, double y) {
    return std::tanh((std::hypot(x - 1.5, y) - R) / (std::sqrt(2.0) * eps));
  });
  const auto curves = extract_interface(g, phi, eps);
  REQUIRE(curves.size() == 1);
  const InterfaceCurve& c = curves[0];
  CHECK(c.closed);
  CHECK_FALSE(c.start_wall.has_value());
  const Interpolant I = g.interpolant(phi);
  double worst_phi = 0.0, worst_r = 0.0, worst_gap = 0.0;
  for (size_t k = 0; k < c.size(); ++k) {
    const auto& p = c.pts[k];
    worst_phi = std::max(worst_phi, std::abs(I.value(p.x(), p.y())));
    worst_r = std::max(worst_r, std::abs(std::hypot(p.x() - 1.5, p.y()) - R));
    worst_gap = std::max(worst_gap, (c.pts[(k + 1) % c.size()] - p).norm());
  }
  CHECK(worst_phi <= 1e-8);
  CHECK(worst_r <= 1e-6);
  CHECK(worst_gap <= 0.5 * eps + 1e-12);

  // phi > 0 outside, so walking with phi > 0 on the left is clockwise.
  double area2 = 0.0;
  for (size_t k = 0; k < c.size(); ++k) {
    const auto& a = c.pts[k];
    const auto& b = c.pts[(k + 1) % c.size()];
    area2 += a.x() * b.y() - b.x() * a.y();
  }
  CHECK(area2 < 0.0);

  const auto kappa = curvature(c);
  for (double k : kappa) CHECK(k == doctest::Approx(1.0 / R).epsilon(1e-3));
}

TEST_CASE("curvature changes sign when the phases swap") {
  const double eps = 0.05, R = 0.4;
  SpectralGrid g(384, 96, 3.0);
  const Field phi = g.sample([&](double x, double y) {
    return -std::tanh((std::hypot(x - 1.5, y) - R) / (std::sqrt(2.0) * eps));
  });
  const auto curves = extract_interface(g, phi, eps);
  REQUIRE(curves.size() == 1);
  for (double k : curvature(curves[0])) CHECK(k == doctest::Approx(-1.0 / R).epsilon(1e-3));
}

TEST_CASE("sheared strip: contact positions and angles match the construction") {
  const double eps = 0.1, c = 1.0;
  SpectralGrid g(320, 96, 8.0);
  const Field phi = sheared_strip(g, 2.5, 4.5, c, eps);

  const auto bottom = wall_roots(g, phi, Wall::Bottom);
  REQUIRE(bottom.size() == 2);
  CHECK(bottom[0].x == doctest::Approx(2.5).epsilon(1e-10));
  CHECK(bottom[0].slope == 1);
  CHECK(bottom[1].x == doctest::Approx(4.5).epsilon(1e-10));
  CHECK(bottom[1].slope == -1);
  const auto top = wall_roots(g, phi, Wall::Top);
  REQUIRE(top.size() == 2);
  CHECK(top[0].x == doctest::Approx(4.5).epsilon(1e-10));
  CHECK(top[1].x == doctest::Approx(6.5).epsilon(1e-10));

  const auto curves = extract_interface(g, phi, eps);
  REQUIRE(curves.size() == 2);
  for (const auto& cv : curves) {
    CHECK_FALSE(cv.closed);
    REQUIRE(cv.start_wall.has_value());
    REQUIRE(cv.end_wall.has_value());
    CHECK(*cv.start_wall != *cv.end_wall);
  }

  // Line x = x0 + c (y + 1); inside phi < 0 the bottom angle is
  // acos(-c / sqrt(1 + c^2)) and the top angle its supplement.
  const double bottom_deg = std::acos(-c / std::sqrt(1.0 + c * c)) * 180.0 / kPi;
  FieldState s;
  s.now.phi = phi;
  s.now.u = g.zeros();
  s.now.w = g.zeros();
  SimParams sp;
  sp.eps = eps;
  sp.Lx = 8.0;
  const DiagnosticsRecord r = record(g, s, sp);
  CHECK(r.x_cl[kBL] == doctest::Approx(2.5).epsilon(1e-10));
  CHECK(r.x_cl[kBR] == doctest::Approx(4.5).epsilon(1e-10));
  CHECK(r.x_cl[kTL] == doctest::Approx(4.5).epsilon(1e-10));
  CHECK(r.x_cl[kTR] == doctest::Approx(6.5).epsilon(1e-10));
  CHECK(r.theta[kBL] == doctest::Approx(bottom_deg).epsilon(1e-8));
  CHECK(r.theta[kTL] == doctest::Approx(180.0 - bottom_deg).epsilon(1e-8));
  // The right front x = x1 + c (y + 1) has phi < 0 on its right.
  CHECK(r.theta[kBR] == doctest::Approx(180.0 - bottom_deg).epsilon(1e-8));
  CHECK(r.theta[kTR] == doctest::Approx(bottom_deg).epsilon(1e-8));
  CHECK(r.mass == doctest::Approx(g.integrate(phi)));
}

TEST_CASE("vertical interface gives a right angle") {
  const double eps = 0.05;
  SpectralGrid g(480, 64, 6.0);
  const Field phi = sheared_strip(g, 1.5, 4.5, 0.0, eps);
  FieldState s;
  s.now.phi = phi;
  s.now.u = g.zeros();
  s.now.w = g.zeros();
  SimParams sp;
  sp.eps = eps;
  const DiagnosticsRecord r = record(g, s, sp);
  for (int k = 0; k < 4; ++k) CHECK(r.theta[k] == doctest::Approx(90.0).epsilon(1e-8));
}

TEST_CASE("angle fit rejects a curve that misses the wall") {
  const auto c = polyline({{0.0, 0.0}, {0.0, 0.5}});
  CHECK_THROWS_AS(dynamic_contact_angle(c, Wall::Bottom, 0.01, 0.04), std::invalid_argument);
}

TEST_CASE("hausdorff distance: hand-computed cases") {
  const auto a = polyline({{0.0, 0.0}, {2.0, 0.0}});
  const auto b = polyline({{0.0, 1.0}, {1.0, 1.0}, {2.0, 1.0}});
  CHECK(hausdorff_distance(a, b) == doctest::Approx(1.0));
  CHECK(hausdorff_distance(a, a) == 0.0);
  // Point-to-segment, not point-to-point: the midpoint of a is on b's segment.
  const auto c = polyline({{0.0, 0.0}, {1.0, 0.0}});
  const auto d = polyline({{0.0, 0.0}, {2.0, 0.0}});
  CHECK(hausdorff_distance(c, d) == doctest::Approx(1.0));
  const auto e = polyline({{0.0, 0.0}, {4.0, 0.0}});
  const auto f = polyline({{1.0, 0.5}, {3.0, 0.5}});
  CHECK(hausdorff_distance(e, f) == doctest::Approx(std::hypot(1.0, 0.5)));
  CHECK(hausdorff_distance(e, f) == hausdorff_distance(f, e));
}

TEST_CASE("contact-line velocity: linear exact, smooth second order") {
  std::vector<double> t, x;
  for (int i = 0; i <= 40; ++i) {
    t.push_back(0.01 * i);
    x.push_back(2.0 + 0.3 * t.back());
  }
  for (double v : contact_line_velocity(t, x, 5)) CHECK(v == doctest::Approx(0.3).epsilon(1e-12));

  auto max_err = [](int n) {
    std::vector<double> t, x;
    for (int i = 0; i <= n; ++i) {
      t.push_back(1.0 * i / n);
      x.push_back(std::sin(t.back()));
    }
    const auto v = contact_line_velocity(t, x, 5);
    double e = 0.0;
    for (int i = 0; i <= n; ++i) e = std::max(e, std::abs(v[i] - std::cos(t[i])));
    return e;
  };
  const double e1 = max_err(50), e2 = max_err(100);
  CHECK(e2 < 0.3 * e1);
  CHECK(e2 < 1e-3);
}
