#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "dense_oracle.hpp"
#include "mcl/integrator.hpp"

using namespace mcl;

namespace {

const double kPi = std::numbers::pi;

double max_abs(const Field& f) { return f.cwiseAbs().maxCoeff(); }

SimParams small_params(double eps) {
  SimParams sp;
  sp.eps = eps;
  sp.Ld = eps;
  sp.Vs = 1.0 / eps;
  sp.Lx = 3.0;
  sp.dt = 1e-3;
  return sp;
}

FieldState couette(const SpectralGrid& g, const SimParams& sp) {
  FieldState s;
  const double L = g.lx();
  s.now.phi = g.sample([&](double x, double) { return std::tanh((0.25 * L - std::abs(x - 0.5 * L)) / (std::sqrt(2.0) * sp.eps)); });
  s.now.u = g.sample([](double, double y) { return y; });
  s.now.w = g.zeros();
  s.now.p = g.zeros();
  ieq_aux_init(g, s.now.phi, sp.theta_s, s.now.U, s.now.W);
  s.prev = s.now;
  s.mu = chemical_potential(g, s.now.phi, sp.eps);
  return s;
}

Field random_field(const SpectralGrid& g, std::mt19937& rng, double amp = 1.0) {
  std::uniform_real_distribution<double> d(-amp, amp);
  Field f(g.nyp(), g.nx());
  for (Eigen::Index k = 0; k < f.size(); ++k) f.data()[k] = d(rng);
  return f;
}

double field_diff(const Field& a, const Field& b) { return max_abs(a - b) / std::max(1.0, max_abs(b)); }

}  // namespace

TEST_CASE("eliminate_aux: steady fixed point, algebraic residual, neutral wetting") {
  SpectralGrid g(16, 10, 3.0);
  std::mt19937 rng(7);
  TimeLevel now, prev;
  now.phi = prev.phi = random_field(g, rng, 0.9);
  ieq_aux_init(g, now.phi, 1.1, now.U, now.W);
  prev.U = now.U;
  prev.W = now.W;
  AuxMaps a = eliminate_aux(g, now, prev, 1.1, false);
  const Field phis = 2.0 * now.phi - prev.phi;
  CHECK(max_abs(a.Ubar + 2.0 * phis.cwiseProduct(now.phi) - now.U) <= 1e-14);
  for (Wall w : {Wall::Bottom, Wall::Top})
    CHECK((a.Wbar.at(w) + 0.5 * a.Zstar.at(w).cwiseProduct(g.trace(now.phi, w)) - now.W.at(w)).cwiseAbs().maxCoeff() <=
          1e-14);

  prev.phi = random_field(g, rng);
  now.phi = random_field(g, rng);
  now.U = random_field(g, rng);
  prev.U = random_field(g, rng);
  now.W = g.traces(random_field(g, rng));
  prev.W = g.traces(random_field(g, rng));
  const Field next = random_field(g, rng);
  a = eliminate_aux(g, now, prev, 1.1, false);
  const Field ps = 2.0 * now.phi - prev.phi;
  const Field U1 = a.Ubar + 2.0 * ps.cwiseProduct(next);
  CHECK(max_abs(3.0 * U1 - 4.0 * now.U + prev.U - 2.0 * ps.cwiseProduct(3.0 * next - 4.0 * now.phi + prev.phi)) <=
        1e-13);
  for (Wall w : {Wall::Bottom, Wall::Top}) {
    const Eigen::VectorXd Z = Z_of_phi(g.trace(ps, w), 1.1);
    const Eigen::VectorXd W1 = a.Wbar.at(w) + 0.5 * Z.cwiseProduct(g.trace(next, w));
    const Eigen::VectorXd d = g.trace(3.0 * next - 4.0 * now.phi + prev.phi, w);
    CHECK((3.0 * W1 - 4.0 * now.W.at(w) + prev.W.at(w) - 0.5 * Z.cwiseProduct(d)).cwiseAbs().maxCoeff() <= 1e-13);
  }

  a = eliminate_aux(g, now, prev, kPi / 2, false);
  for (Wall w : {Wall::Bottom, Wall::Top}) {
    CHECK(a.Zstar.at(w).cwiseAbs().maxCoeff() <= 1e-16);
    CHECK((a.Wbar.at(w) - (4.0 * now.W.at(w) - prev.W.at(w)) / 3.0).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("pure phase at rest is a fixed point of the startup and BDF2 steps") {
  SimParams sp = small_params(0.1);
  sp.v_w_bot = sp.v_w_top = 0.0;
  sp.theta_s = 1.0;
  SpectralGrid g(64, 16, 3.0);
  Integrator integ(g, sp);
  FieldState s;
  s.now.phi = g.constant(1.0);
  s.now.u = s.now.w = s.now.p = g.zeros();
  ieq_aux_init(g, s.now.phi, sp.theta_s, s.now.U, s.now.W);
  s.prev = s.now;
  const FieldState s0 = s;
  for (int k = 0; k < 3; ++k) {
    integ.step(s);
    CHECK(max_abs(s.now.phi - s0.now.phi) <= 1e-10);
    CHECK(max_abs(s.now.u) <= 1e-10);
    CHECK(max_abs(s.now.w) <= 1e-10);
    CHECK(max_abs(s.now.p) <= 1e-10);
    CHECK(max_abs(s.now.U - s0.now.U) <= 1e-10);
    CHECK((s.now.W.bottom - s0.now.W.bottom).cwiseAbs().maxCoeff() <= 1e-10);
  }
  FieldState same = s0;
  integ.advance(same, 0);
  CHECK(same.now.phi == s0.now.phi);
  CHECK(same.step == 0);
}

TEST_CASE("Step 1 matches a dense monolithic solve of the same discrete system") {
  SimParams sp = small_params(0.15);
  sp.theta_s = 60.0 * kPi / 180.0;
  sp.Re = 0.5;
  sp.gmres_tol = 1e-12;
  SpectralGrid g(16, 12, 3.0);
  Integrator integ(g, sp);
  FieldState s = couette(g, sp);

  for (int stage = 0; stage < 2; ++stage) {
    const Step1Result r = integ.step1(s);
    const oracle::Solution d = oracle::solve_step1(g, sp, s);
    CHECK(field_diff(r.phi, d.phi) <= 1e-9);
    CHECK(field_diff(r.mu, d.mu) <= 1e-9);
    CHECK(field_diff(r.u, d.u) <= 1e-9);
    CHECK(field_diff(r.w, d.w) <= 1e-9);
    CHECK(std::abs(r.mass_shift) <= 1e-10);
    integ.step(s);
  }
}

TEST_CASE("Step 1 wall conditions hold by direct substitution") {
  SimParams sp = small_params(0.1);
  sp.theta_s = 1.2;
  SpectralGrid g(64, 20, 3.0);
  Integrator integ(g, sp);
  FieldState s = couette(g, sp);
  for (int k = 0; k < 3; ++k) {
    const Step1System sys = integ.build_step1(s);
    const Step1Result r = integ.step1(s);
    const auto res = sys.residual_blocks(r.phi, r.mu, r.u, r.w);
    // Residual at zero is minus the right-hand side, the reference for the solver's relative tolerance.
    const auto src = sys.residual_blocks(g.zeros(), g.zeros(), g.zeros(), g.zeros());
    double bnorm = 0.0;
    for (const auto& f : src) bnorm = std::max(bnorm, f.cwiseAbs().maxCoeff());
    const int N = g.ny();
    for (int b = 0; b < 4; ++b) {
      CHECK(res[b].row(N - 1).cwiseAbs().maxCoeff() <= sp.gmres_tol * bnorm);
      CHECK(res[b].row(N).cwiseAbs().maxCoeff() <= sp.gmres_tol * bnorm);
    }
    integ.step(s);
  }
}

TEST_CASE("projection: divergence-free input, gradient field, Helmholtz orthogonality") {
  SimParams sp = small_params(0.1);
  SpectralGrid g(32, 28, 3.0);
  Integrator integ(g, sp);
  const double a0 = 1.5 / sp.dt, c = sp.Re * a0;
  const double k = 2 * kPi / 3.0;

  // Stream function with vanishing wall velocity.
  const Field psi_s = g.sample([&](double x, double y) { return std::sin(k * x) * std::pow(1 - y * y, 2) + 0.3 * y; });
  const Field ut = g.ddy(psi_s), wt = -g.ddx(psi_s);
  const Field p0 = g.sample([](double x, double y) { return std::cos(x) * y; });
  Field u, w, p;
  integ.step2(ut, wt, p0, a0, u, w, p);
  CHECK(max_abs(u - ut) <= 1e-10);
  CHECK(max_abs(w - wt) <= 1e-10);
  CHECK(max_abs(p - p0) <= 1e-10 * c);

  // Gradient of a mean-zero chi with zero normal derivative.
  const Field chi = g.sample([&](double x, double y) { return std::cos(k * x) * (y - y * y * y / 3.0); });
  integ.step2(g.ddx(chi), g.ddy(chi), g.zeros(), a0, u, w, p);
  CHECK(max_abs(u) <= 1e-10);
  CHECK(max_abs(w) <= 1e-10);
  CHECK(max_abs(p - c * chi) <= 1e-10 * c);

  // Random smooth velocity with w = 0 on the walls.
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-1, 1);
  Field ur = g.zeros(), wr = g.zeros();
  for (int m = 1; m <= 4; ++m) {
    const double a = d(rng), b = d(rng), e = d(rng), f = d(rng);
    ur += g.sample([&](double x, double y) { return a * std::cos(m * k * x + b) * std::cos(m * y); });
    wr += g.sample([&](double x, double y) { return e * std::sin(m * k * x + f) * (1 - y * y) * std::exp(y); });
  }
  integ.step2(ur, wr, g.zeros(), a0, u, w, p);
  CHECK(g.interior_max_abs(g.divergence(u, w)) <= 1e-9);
  CHECK(g.trace(w, Wall::Bottom).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(g.trace(w, Wall::Top).cwiseAbs().maxCoeff() <= 1e-12);
  const Field px = g.ddx(p), py = g.ddy(p);
  const double inner = g.integrate(u.cwiseProduct(px) + w.cwiseProduct(py));
  const double scale = std::sqrt(g.integrate(u.cwiseProduct(u) + w.cwiseProduct(w)) *
                                 g.integrate(px.cwiseProduct(px) + py.cwiseProduct(py)));
  CHECK(std::abs(inner) <= 1e-10 * std::max(1.0, scale));
}

TEST_CASE("Couette steps conserve mass and keep the velocity solenoidal") {
  SimParams sp = small_params(0.1);
  sp.theta_s = 1.0;
  SpectralGrid g(64, 20, 3.0);
  Integrator integ(g, sp);
  FieldState s = couette(g, sp);
  const double m0 = g.integrate(s.now.phi);
  for (int k = 0; k < 10; ++k) {
    const StepReport r = integ.step(s);
    CHECK(std::abs(g.integrate(s.now.phi) - m0) <= 1e-10);
    CHECK(r.divmax <= 1e-9);
    CHECK(g.trace(s.now.w, Wall::Bottom).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(g.trace(s.now.w, Wall::Top).cwiseAbs().maxCoeff() <= 1e-10);
  }
  CHECK(s.step == 10);
  CHECK(s.t == doctest::Approx(10 * sp.dt));
}

TEST_CASE("equilibrium strip at neutral wetting stays put for 100 steps") {
  SimParams sp;
  sp.eps = 0.04;
  sp.Ld = 0.04;
  sp.Vs = 25.0;
  sp.v_w_bot = sp.v_w_top = 0.0;
  sp.dt = 1e-4;
  SpectralGrid g(300, 32, 6.0);
  Integrator integ(g, sp);
  FieldState s = couette(g, sp);
  s.now.u = s.prev.u = g.zeros();
  auto front = [&](const Field& phi) {
    // Zero of the bottom trace between x = 1 and x = 2.
    const Eigen::VectorXd tr = g.trace(phi, Wall::Bottom);
    for (int i = 0; i + 1 < g.nx(); ++i)
      if (g.x()(i) > 1.0 && tr(i) <= 0.0 && tr(i + 1) > 0.0) return g.x()(i) - tr(i) * g.dx() / (tr(i + 1) - tr(i));
    return std::nan("");
  };
  const double x0 = front(s.now.phi);
  integ.advance(s, 100);
  CHECK(std::abs(front(s.now.phi) - x0) <= 1e-4);
}

TEST_CASE("startup error is second order: startup-seeded versus accurately seeded BDF2") {
  SimParams sp = small_params(0.15);
  sp.theta_s = 1.2;
  sp.Re = 0.1;
  SpectralGrid g(32, 16, 3.0);
  const double T = 0.02;
  std::vector<double> gaps;
  for (double dt : {1e-3, 5e-4}) {
    sp.dt = dt;
    Integrator integ(g, sp);
    FieldState a = couette(g, sp);
    integ.advance(a, static_cast<int>(std::lround(T / dt)));

    // Level at t = dt from 32 fine substeps.
    SimParams fine = sp;
    fine.dt = dt / 32;
    Integrator fi(g, fine);
    FieldState f = couette(g, fine);
    const TimeLevel start = f.now;
    fi.advance(f, 32);
    FieldState b;
    b.prev = start;
    b.now = f.now;
    b.step = 1;
    b.t = dt;
    integ.advance(b, static_cast<int>(std::lround(T / dt)) - 1);
    gaps.push_back(std::sqrt(g.integrate((a.now.phi - b.now.phi).array().square().matrix())) +
                   std::sqrt(g.integrate((a.now.u - b.now.u).array().square().matrix())));
  }
  MESSAGE("startup gaps " << gaps[0] << " " << gaps[1]);
  CHECK(std::log2(gaps[0] / gaps[1]) >= 1.7);
}
