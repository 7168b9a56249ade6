#include "doctest.h"

#include <cmath>
#include <numbers>

#include "mcl/params.hpp"

using namespace mcl;

namespace {

// Physical inputs with a prescribed surface tension and interface thickness.
PhysicalParams with_gamma(double gamma, double xi) {
  PhysicalParams p;
  p.r = 3.0 * gamma / (2.0 * std::sqrt(2.0) * xi);
  p.K = p.r * xi * xi;
  return p;
}

bool mentions(const std::vector<std::string>& errs, const std::string& word) {
  for (const auto& e : errs)
    if (e.find(word) != std::string::npos) return true;
  return false;
}

SimParams paper_setting() {
  SimParams sp;
  sp.Re = 1e-4;
  sp.B = 50.0;
  sp.ls = 0.01;
  sp.eps = 0.02;
  const auto [nx, ny] = auto_resolution(sp.eps, sp.Lx);
  sp.Nx = nx;
  sp.Ny = ny;
  return sp;
}

}  // namespace

TEST_CASE("derived thickness and surface tension") {
  PhysicalParams p;
  p.K = 2.0;
  p.r = 8.0;
  CHECK(p.xi() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p.gamma() == doctest::Approx(2.0 * std::sqrt(2.0) * 8.0 * 0.5 / 3.0).epsilon(1e-15));
  const PhysicalParams q = with_gamma(3.0, 0.01);
  CHECK(std::abs(q.gamma() / 3.0 - 1.0) <= 1e-12);
  CHECK(std::abs(q.xi() / 0.01 - 1.0) <= 1e-12);
}

TEST_CASE("nondimensionalize: forced unit mobility number and thickness ratio") {
  PhysicalParams p = with_gamma(2.0 * std::sqrt(2.0) / 3.0, 0.01);
  p.M = 1.0;
  p.vstar = 1.0;
  p.l = 1.0;
  const DimensionlessGroups d = nondimensionalize(p);
  CHECK(d.Ld == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d.eps == doctest::Approx(0.01).epsilon(1e-14));
}

TEST_CASE("nondimensionalize: arithmetic of every group") {
  PhysicalParams p = with_gamma(3.0, 0.35);
  p.M = 2.0;
  p.vstar = 5.0;
  p.l = 7.0;
  p.rho = 1.3;
  p.eta = 0.4;
  p.beta_slip = 11.0;
  p.gamma_relax = 0.6;
  const DimensionlessGroups d = nondimensionalize(p);
  const double s = 2.0 * std::sqrt(2.0);
  CHECK(d.Ld == doctest::Approx(18.0 / (s * 245.0)).epsilon(1e-12));
  CHECK(d.Re == doctest::Approx(1.3 * 5.0 * 7.0 / 0.4).epsilon(1e-14));
  CHECK(d.B == doctest::Approx(9.0 / (s * 0.4 * 5.0)).epsilon(1e-12));
  CHECK(d.Vs == doctest::Approx(9.0 * 0.6 * 7.0 / (s * 5.0)).epsilon(1e-12));
  CHECK(d.ls == doctest::Approx(0.4 / 11.0 / 7.0).epsilon(1e-14));
  CHECK(d.eps == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("nondimensionalize: compensated rescaling leaves the groups unchanged") {
  PhysicalParams a = with_gamma(1.7, 0.02);
  a.M = 0.3;
  a.rho = 2.0;
  a.eta = 0.9;
  a.beta_slip = 4.0;
  a.gamma_relax = 1.1;
  a.l = 1.5;
  a.vstar = 0.8;
  // l -> 2l, v* -> 3v*, xi -> 2xi, gamma -> 3gamma; compensate the remaining inputs.
  PhysicalParams b = a;
  b.l = 2.0 * a.l;
  b.vstar = 3.0 * a.vstar;
  b.r = 1.5 * a.r;
  b.K = b.r * std::pow(2.0 * a.xi(), 2);
  b.M = 4.0 * a.M;
  b.rho = a.rho / 6.0;
  b.gamma_relax = a.gamma_relax / 2.0;
  b.beta_slip = a.beta_slip / 2.0;
  const DimensionlessGroups da = nondimensionalize(a), db = nondimensionalize(b);
  for (auto [x, y] : {std::pair{da.Ld, db.Ld}, {da.Re, db.Re}, {da.B, db.B}, {da.Vs, db.Vs}, {da.ls, db.ls},
                      {da.eps, db.eps}})
    CHECK(std::abs(x / y - 1.0) <= 1e-14);
}

TEST_CASE("nondimensionalize: non-positive input names the field") {
  PhysicalParams p;
  p.eta = 0.0;
  try {
    nondimensionalize(p);
    FAIL("no error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("eta") != std::string::npos);
  }
  p = PhysicalParams{};
  p.M = -1.0;
  CHECK_THROWS_AS(nondimensionalize(p), ValidationError);
}

TEST_CASE("resolve_scalings: values and monotonicity") {
  ScalingSpec s;
  s.eps_list = {0.1, 0.02, 0.01};
  s.alpha = 1.0;
  CHECK(resolve_scalings(s, 0.01).first == doctest::Approx(0.01).epsilon(1e-15));
  s.beta = -2.0;
  CHECK(resolve_scalings(s, 0.1).second == doctest::Approx(100.0).epsilon(1e-14));
  s.alpha = 2.0;
  s.ld0 = 0.5;
  CHECK(resolve_scalings(s, 0.02).first == doctest::Approx(2e-4).epsilon(1e-14));
  CHECK_THROWS_AS(resolve_scalings(s, 0.05), ValidationError);

  s = ScalingSpec{};
  for (double a : {1.0, 2.0})
    for (double b : {-1.0, -2.0, -3.0}) {
      s.alpha = a;
      s.beta = b;
      for (size_t i = 1; i < s.eps_list.size(); ++i) {
        const auto [ld0, vs0] = resolve_scalings(s, s.eps_list[i - 1]);
        const auto [ld1, vs1] = resolve_scalings(s, s.eps_list[i]);
        CHECK(ld1 < ld0);
        CHECK(vs1 > vs0);
      }
    }
}

TEST_CASE("validate: paper setting passes; violations are reported") {
  CHECK(validate(paper_setting()).empty());

  SimParams sp = paper_setting();
  sp.Nx = 8;
  sp.Ny = 8;
  CHECK(mentions(validate(sp), "resolution"));

  sp = paper_setting();
  sp.theta_s = 0.0;
  CHECK(mentions(validate(sp), "theta_s"));
  sp.theta_s = std::numbers::pi;
  CHECK(mentions(validate(sp), "theta_s"));

  sp = paper_setting();
  sp.Re = 0.0;
  sp.ls = -1.0;
  const auto errs = validate(sp);
  CHECK(errs.size() == 2);
  CHECK(mentions(errs, "Re"));
  CHECK(mentions(errs, "ls"));

  ScalingSpec s;
  CHECK(validate(s).empty());
  s.alpha = 3.0;
  s.beta = 1.0;
  s.eps_list = {0.01, 0.02};
  CHECK(validate(s).size() == 3);
}

TEST_CASE("auto resolution meets the eps/2 rule with the smallest admissible sizes") {
  for (double eps : {0.04, 0.02, 0.01}) {
    const auto [nx, ny] = auto_resolution(eps, 6.0);
    CHECK(6.0 / nx <= eps / 2 * (1 + 1e-12));
    CHECK(lobatto_wall_spacing(ny) <= eps / 2);
    CHECK((ny == 32 || lobatto_wall_spacing(ny - 1) > eps / 2));
  }
  CHECK(auto_resolution(0.02, 6.0).first == 600);
}

TEST_CASE("config: parse, unknown keys, flatten round trip") {
  const RunConfig c = parse_config(
      "[physics]\nRe = 1e-4\nB = 50\nls = 0.01\neps = 0.02\ntheta_s_deg = 60\n"
      "[numerics]\ndt = 1e-4\nT_end = 0.2\n"
      "[scaling]\nalpha = 1\nbeta = -2\neps_list = 0.04, 0.02\n"
      "[experiment]\nscenario = strip\nsnapshot_times = 0.1, 0.2\n");
  CHECK(c.sim.theta_s == doctest::Approx(std::numbers::pi / 3));
  CHECK(c.scaling.beta == -2.0);
  CHECK(c.scaling.eps_list == std::vector<double>{0.04, 0.02});
  CHECK(c.exp.snapshot_times.size() == 2);
  CHECK_FALSE(c.explicit_Ld);

  CHECK_THROWS_AS(parse_config("[physics]\nfoo = 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[physics]\nB = fifty\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[experiment]\nscenario = swirl\n"), ValidationError);

  RunConfig f = c;
  finalize(f);
  CHECK(f.sim.Vs == doctest::Approx(std::pow(0.02, -2.0)));
  CHECK(f.sim.Nx == 600);
  const std::string text = flatten(f);
  const RunConfig g = parse_config(text);
  CHECK(flatten(g) == text);
  CHECK(g.sim.Vs == f.sim.Vs);
  CHECK(g.sim.theta_s == f.sim.theta_s);
}

TEST_CASE("lobatto spacing across the channel") {
  // Five-point rule: nodes 0, +-sqrt(3/7), +-1.
  CHECK(lobatto_max_spacing(4, 0.1) == doctest::Approx(std::sqrt(3.0 / 7.0)).epsilon(1e-14));
  CHECK(lobatto_wall_spacing(4) == doctest::Approx(1.0 - std::sqrt(3.0 / 7.0)).epsilon(1e-14));
  for (int n : {16, 33, 64}) CHECK(lobatto_max_spacing(n, 0.5) > lobatto_wall_spacing(n));
}
