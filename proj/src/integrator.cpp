#include "mcl/integrator.hpp"

#include <cmath>
#include <complex>

namespace mcl {

namespace {

using cd = std::complex<double>;

Spectrum scale_cols(const Spectrum& s, const Eigen::VectorXd& k) {
  Spectrum out = s;
  for (Eigen::Index m = 0; m < s.cols(); ++m) out.col(m) *= k(m);
  return out;
}

Spectrum times_ik(const Spectrum& s, const Eigen::VectorXd& k1) {
  Spectrum out = s;
  for (Eigen::Index m = 0; m < s.cols(); ++m) out.col(m) *= cd(0.0, k1(m));
  return out;
}

// Solves a real factorisation against a complex right-hand side.
Eigen::VectorXcd solve_complex(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu, const Eigen::VectorXcd& rhs) {
  Eigen::MatrixXd b(rhs.size(), 2);
  b.col(0) = rhs.real();
  b.col(1) = rhs.imag();
  const Eigen::MatrixXd x = lu.solve(b);
  Eigen::VectorXcd out(rhs.size());
  out.real() = x.col(0);
  out.imag() = x.col(1);
  return out;
}

}  // namespace

AuxMaps eliminate_aux(const SpectralGrid& g, const TimeLevel& now, const TimeLevel& prev, double theta_s,
                      bool startup) {
  AuxMaps a;
  if (startup) {
    const Field& phis = now.phi;
    a.Ubar = now.U - 2.0 * phis.cwiseProduct(now.phi);
    for (Wall w : {Wall::Bottom, Wall::Top}) {
      const Eigen::VectorXd tr = g.trace(phis, w);
      a.Zstar.at(w) = Z_of_phi(tr, theta_s);
      a.Wbar.at(w) = now.W.at(w) - 0.5 * a.Zstar.at(w).cwiseProduct(tr);
    }
    return a;
  }
  const Field phis = 2.0 * now.phi - prev.phi;
  const Field hist = 4.0 * now.phi - prev.phi;
  a.Ubar = (4.0 * now.U - prev.U) / 3.0 - (2.0 / 3.0) * phis.cwiseProduct(hist);
  for (Wall w : {Wall::Bottom, Wall::Top}) {
    a.Zstar.at(w) = Z_of_phi(g.trace(phis, w), theta_s);
    a.Wbar.at(w) = (4.0 * now.W.at(w) - prev.W.at(w)) / 3.0 -
                   (1.0 / 6.0) * a.Zstar.at(w).cwiseProduct(g.trace(hist, w));
  }
  return a;
}

// ---------------------------------------------------------------------------
// Step 1 system

Eigen::Index Step1System::size() const { return 4 * static_cast<Eigen::Index>(grid->nyp()) * grid->nx(); }

Eigen::VectorXd Step1System::pack(const Field& phi, const Field& mu, const Field& u, const Field& w) const {
  const Eigen::Index n = phi.size();
  Eigen::VectorXd X(4 * n);
  X.segment(0, n) = Eigen::Map<const Eigen::VectorXd>(phi.data(), n);
  X.segment(n, n) = Eigen::Map<const Eigen::VectorXd>(mu.data(), n);
  X.segment(2 * n, n) = Eigen::Map<const Eigen::VectorXd>(u.data(), n);
  X.segment(3 * n, n) = Eigen::Map<const Eigen::VectorXd>(w.data(), n);
  return X;
}

void Step1System::unpack(const Eigen::VectorXd& X, Field& phi, Field& mu, Field& u, Field& w) const {
  const int r = grid->nyp(), c = grid->nx();
  const Eigen::Index n = static_cast<Eigen::Index>(r) * c;
  phi = Eigen::Map<const Field>(X.data(), r, c);
  mu = Eigen::Map<const Field>(X.data() + n, r, c);
  u = Eigen::Map<const Field>(X.data() + 2 * n, r, c);
  w = Eigen::Map<const Field>(X.data() + 3 * n, r, c);
}

namespace {

std::vector<Field> evaluate(const Step1System& s, const Eigen::MatrixXd& tau, const Field& phi, const Field& mu,
                            const Field& u, const Field& w, bool src) {
  const SpectralGrid& g = *s.grid;
  const SimParams& p = *s.sp;
  const int N = g.ny();
  const Eigen::MatrixXd& D = g.dy_matrix();
  const Eigen::MatrixXd& D2 = g.d2y_matrix();
  Eigen::VectorXd mk2 = -g.k().cwiseProduct(g.k());

  const Spectrum Fphi = g.forward(phi), Fmu = g.forward(mu), Fu = g.forward(u), Fw = g.forward(w);
  const Field lap_phi = g.backward(scale_cols(Fphi, mk2)) + D2 * phi;
  const Field lap_mu = g.backward(scale_cols(Fmu, mk2)) + D2 * mu;
  const Field lap_u = g.backward(scale_cols(Fu, mk2)) + D2 * u;
  const Field lap_w = g.backward(scale_cols(Fw, mk2)) + D2 * w;
  const Field mux = g.backward(times_ik(Fmu, g.k1()));
  const Field ux = g.backward(times_ik(Fu, g.k1()));
  const Field wx = g.backward(times_ik(Fw, g.k1()));
  const Field adv_x = g.ddx(u.cwiseProduct(s.phis));
  const Field adv_y = D * w.cwiseProduct(s.phis);
  const Field muy = D * mu, uy = D * u, wy = D * w;

  Field R1 = s.a0 * phi - p.Ld * lap_mu + adv_x + adv_y;
  Field R2 = mu + p.eps * lap_phi - (2.0 / p.eps) * s.phis.cwiseProduct(s.phis).cwiseProduct(phi);
  Field R3 = p.Re * (s.a0 * u + s.us.cwiseProduct(ux) + s.ws.cwiseProduct(uy) + 0.5 * s.divs.cwiseProduct(u)) -
             lap_u + p.B * s.phis.cwiseProduct(mux);
  Field R4 = p.Re * (s.a0 * w + s.us.cwiseProduct(wx) + s.ws.cwiseProduct(wy) + 0.5 * s.divs.cwiseProduct(w)) -
             lap_w + p.B * s.phis.cwiseProduct(muy);
  if (src) {
    R1 -= s.hphi;
    R2 -= (1.0 / p.eps) * s.phis.cwiseProduct(s.aux.Ubar);
    R3 -= (p.F_x * Field::Ones(g.nyp(), g.nx()) - s.px + p.Re * s.hu);
    R4 -= (p.F_y * Field::Ones(g.nyp(), g.nx()) - s.py + p.Re * s.hw);
  }

  std::vector<Field> out(4, Field::Zero(g.nyp(), g.nx()));
  out[0].topRows(N - 1) = tau * R1;
  out[1].topRows(N - 1) = tau * R2;
  out[2].topRows(N - 1) = tau * R3;
  out[3].topRows(N - 1) = tau * R4;

  const double cB = p.young_stress_has_B ? p.B : 1.0;
  for (Wall wl : {Wall::Bottom, Wall::Top}) {
    const int rw = (wl == Wall::Bottom) ? 0 : N;
    const int ro = (wl == Wall::Bottom) ? N - 1 : N;
    const double sn = (wl == Wall::Bottom) ? -1.0 : 1.0;
    const double uw = (wl == Wall::Bottom) ? p.v_w_bot : p.v_w_top;
    const Eigen::RowVectorXd sx = s.phisx.row(rw);
    const Eigen::RowVectorXd z = s.aux.Zstar.at(wl).transpose();
    Eigen::RowVectorXd phidot = s.a0 * phi.row(rw) + u.row(rw).cwiseProduct(sx);
    Eigen::RowVectorXd wpart = 0.5 * z.cwiseProduct(phi.row(rw));
    Eigen::RowVectorXd slip = u.row(rw);
    if (src) {
      phidot -= s.hphi.row(rw);
      wpart += s.aux.Wbar.at(wl).transpose();
      slip.array() -= uw;
    }
    out[0].row(ro) = sn * (D.row(rw) * mu);
    out[1].row(ro) = p.eps * sn * (D.row(rw) * phi) + phidot / p.Vs + z.cwiseProduct(wpart);
    out[2].row(ro) = sn * (D.row(rw) * u) + slip / p.ls + (cB / p.Vs) * phidot.cwiseProduct(sx);
    out[3].row(ro) = w.row(rw);
  }
  return out;
}

}  // namespace

std::vector<Field> Step1System::residual_blocks(const Field& phi, const Field& mu, const Field& u,
                                                const Field& w) const {
  const Eigen::MatrixXd tau = grid->legendre_forward().topRows(grid->ny() - 1);
  return evaluate(*this, tau, phi, mu, u, w, true);
}

void Step1System::apply(const Eigen::VectorXd& X, Eigen::VectorXd& out, bool with_source) const {
  Field phi, mu, u, w;
  unpack(X, phi, mu, u, w);
  const Eigen::MatrixXd tau = grid->legendre_forward().topRows(grid->ny() - 1);
  const std::vector<Field> b = evaluate(*this, tau, phi, mu, u, w, with_source);
  out = pack(b[0], b[1], b[2], b[3]);
}

// ---------------------------------------------------------------------------
// Integrator

// Explicit per-mode inverses: applying them is a small dense product, which
// vectorises far better than repeated triangular solves.
struct Integrator::Factors {
  std::vector<Eigen::MatrixXd> ch, vu, vw;
};

Integrator::Integrator(const SpectralGrid& g, const SimParams& sp) : g_(g), sp_(sp) {
  const int N = g.ny();
  tau_ = g.legendre_forward().topRows(N - 1);
  const Eigen::MatrixXd& D = g.dy_matrix();
  proj_lu_.resize(g.nmodes());
  for (int m = 1; m < g.nmodes(); ++m) {
    if (m == g.nx() / 2) continue;
    Eigen::MatrixXd a = g.d2y_matrix();
    a.diagonal().array() -= g.k()(m) * g.k()(m);
    a.row(0) = D.row(0);
    a.row(N) = D.row(N);
    proj_lu_[m].compute(a);
  }
}

Integrator::~Integrator() = default;

const Integrator::Factors& Integrator::factors(double a0) const {
  auto it = cache_.find(a0);
  if (it != cache_.end()) return *it->second;
  const int N = g_.ny(), n1 = g_.nyp();
  const Eigen::MatrixXd& D = g_.dy_matrix();
  const Eigen::MatrixXd& D2 = g_.d2y_matrix();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n1, n1);
  auto f = std::make_unique<Factors>();
  f->ch.resize(g_.nmodes());
  f->vu.resize(g_.nmodes());
  f->vw.resize(g_.nmodes());
  // Stand-in for phi*^2 in the stabilised block; 0.3 minimised Krylov counts
  // on the Couette problem across eps and V_s scalings.
  const double S = 0.3;
  const double c = a0 / sp_.Vs;
  for (int m = 0; m < g_.nmodes(); ++m) {
    const double kk = g_.k()(m) * g_.k()(m);
    Eigen::MatrixXd lap = D2 - kk * I;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n1, 2 * n1);
    A.block(0, 0, N - 1, n1) = tau_ * (a0 * I);
    A.block(0, n1, N - 1, n1) = tau_ * (-sp_.Ld * lap);
    A.block(N - 1, n1, 1, n1) = -D.row(0);
    A.block(N, n1, 1, n1) = D.row(N);
    A.block(n1, 0, N - 1, n1) = tau_ * (sp_.eps * lap - (2.0 * S / sp_.eps) * I);
    A.block(n1, n1, N - 1, n1) = tau_;
    A.block(n1 + N - 1, 0, 1, n1) = -sp_.eps * D.row(0);
    A(n1 + N - 1, 0) += c;
    A.block(n1 + N, 0, 1, n1) = sp_.eps * D.row(N);
    A(n1 + N, N) += c;
    f->ch[m] = A.partialPivLu().inverse().transpose();

    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n1, n1);
    V.topRows(N - 1) = tau_ * (sp_.Re * a0 * I - lap);
    Eigen::MatrixXd Vu = V, Vw = V;
    Vu.row(N - 1) = -D.row(0);
    Vu(N - 1, 0) += 1.0 / sp_.ls;
    Vu.row(N) = D.row(N);
    Vu(N, N) += 1.0 / sp_.ls;
    Vw.row(N - 1).setZero();
    Vw(N - 1, 0) = 1.0;
    Vw.row(N).setZero();
    Vw(N, N) = 1.0;
    f->vu[m] = Vu.partialPivLu().inverse().transpose();
    f->vw[m] = Vw.partialPivLu().inverse().transpose();
  }
  if (cache_.size() >= 2) cache_.clear();
  return *cache_.emplace(a0, std::move(f)).first->second;
}

Eigen::VectorXd Integrator::row_weights(double a0) const {
  const int N = g_.ny(), n1 = g_.nyp(), nx = g_.nx();
  const double e = sp_.eps;
  const double wi[4] = {1.0 / a0, e, e * e, e * e};
  const double wb[4] = {e * e, 1.0 / (1.0 + a0 / sp_.Vs), sp_.ls, 1.0};
  const Eigen::Index n = static_cast<Eigen::Index>(n1) * nx;
  Eigen::VectorXd W(4 * n);
  for (int b = 0; b < 4; ++b) {
    Field f = Field::Constant(n1, nx, wi[b]);
    f.row(N - 1).setConstant(wb[b]);
    f.row(N).setConstant(wb[b]);
    W.segment(b * n, n) = Eigen::Map<const Eigen::VectorXd>(f.data(), n);
  }
  return W;
}

Step1System Integrator::build_step1(const FieldState& s) const {
  Step1System sys;
  sys.grid = &g_;
  sys.sp = &sp_;
  sys.startup = (s.step == 0);
  const double dt = sp_.dt;
  const TimeLevel& n = s.now;
  const TimeLevel& p = s.prev;
  if (sys.startup) {
    sys.a0 = 1.0 / dt;
    sys.phis = n.phi;
    sys.us = n.u;
    sys.ws = n.w;
    sys.hphi = n.phi / dt;
    sys.hu = n.u / dt;
    sys.hw = n.w / dt;
  } else {
    sys.a0 = 1.5 / dt;
    sys.phis = 2.0 * n.phi - p.phi;
    sys.us = 2.0 * n.u - p.u;
    sys.ws = 2.0 * n.w - p.w;
    sys.hphi = (4.0 * n.phi - p.phi) / (2.0 * dt);
    sys.hu = (4.0 * n.u - p.u) / (2.0 * dt);
    sys.hw = (4.0 * n.w - p.w) / (2.0 * dt);
  }
  sys.phisx = g_.ddx(sys.phis);
  sys.phisy = g_.ddy(sys.phis);
  sys.divs = g_.divergence(sys.us, sys.ws);
  sys.px = g_.ddx(n.p);
  sys.py = g_.ddy(n.p);
  sys.aux = eliminate_aux(g_, n, p, sp_.theta_s, sys.startup);
  return sys;
}

void Integrator::precondition(const Step1System& sys, const Eigen::VectorXd& r, Eigen::VectorXd& z) const {
  const int N = g_.ny(), n1 = g_.nyp(), nm = g_.nmodes();
  const Factors& F = factors(sys.a0);
  Field R1, R2, R3, R4;
  sys.unpack(r, R1, R2, R3, R4);

  // A complex column viewed as a 2 x n real matrix (rows re, im); a real
  // operator A then acts as X * A^T. The factors are stored transposed.
  using RMap = Eigen::Map<Eigen::MatrixXd>;
  using CMap = Eigen::Map<const Eigen::MatrixXd>;
  auto view = [n1](Spectrum& s, int m) { return RMap(reinterpret_cast<double*>(s.col(m).data()), 2, n1); };
  auto cview = [n1](const Spectrum& s, int m) {
    return CMap(reinterpret_cast<const double*>(s.col(m).data()), 2, n1);
  };
  const Spectrum S1 = g_.forward(R1), S2 = g_.forward(R2);
  Spectrum Pphi(n1, nm), Pmu(n1, nm);
  Eigen::MatrixXd y(2, 2 * n1);
  for (int m = 0; m < nm; ++m) {
    const Eigen::MatrixXd& At = F.ch[m];
    y.noalias() = cview(S1, m) * At.topRows(n1);
    y.noalias() += cview(S2, m) * At.bottomRows(n1);
    view(Pphi, m) = y.leftCols(n1);
    view(Pmu, m) = y.rightCols(n1);
  }
  const Field phi = g_.backward(Pphi);
  const Field mu = g_.backward(Pmu);

  // Exact coupling from (phi, mu) into the momentum rows.
  const Field mux = g_.backward(times_ik(Pmu, g_.k1()));
  const Field muy = g_.dy_matrix() * mu;
  R3.topRows(N - 1) -= tau_ * (sp_.B * sys.phis.cwiseProduct(mux));
  R4.topRows(N - 1) -= tau_ * (sp_.B * sys.phis.cwiseProduct(muy));
  const double cB = sp_.young_stress_has_B ? sp_.B : 1.0;
  R3.row(N - 1) -= (cB / sp_.Vs) * sys.a0 * phi.row(0).cwiseProduct(sys.phisx.row(0));
  R3.row(N) -= (cB / sp_.Vs) * sys.a0 * phi.row(N).cwiseProduct(sys.phisx.row(N));

  const Spectrum S3 = g_.forward(R3), S4 = g_.forward(R4);
  Spectrum Pu(n1, nm), Pw(n1, nm);
  for (int m = 0; m < nm; ++m) {
    view(Pu, m).noalias() = cview(S3, m) * F.vu[m];
    view(Pw, m).noalias() = cview(S4, m) * F.vw[m];
  }
  z = sys.pack(phi, mu, g_.backward(Pu), g_.backward(Pw));
}

Step1Result Integrator::step1(const FieldState& s) const {
  const Step1System sys = build_step1(s);
  const Eigen::VectorXd W = row_weights(sys.a0);
  Eigen::VectorXd b;
  sys.apply(Eigen::VectorXd::Zero(sys.size()), b, true);
  b = -W.cwiseProduct(b);

  // Initial guess: extrapolated fields and the matching chemical potential.
  const Field mu0 = -sp_.eps * g_.laplacian(sys.phis) +
                    (1.0 / sp_.eps) * sys.phis.cwiseProduct(sys.aux.Ubar + 2.0 * sys.phis.cwiseProduct(sys.phis));
  Eigen::VectorXd X = sys.pack(sys.phis, mu0, sys.us, sys.ws);

  LinearMap A = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    sys.apply(x, y, false);
    y = W.cwiseProduct(y);
  };
  LinearMap M = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    precondition(sys, x.cwiseQuotient(W), y);
  };
  const GmresResult gr = gmres(A, M, b, X, sp_.gmres_tol, sp_.gmres_max_iter, sp_.gmres_restart);
  if (!gr.converged)
    throw StepFailure("Step 1 GMRES did not converge: relative residual " + std::to_string(gr.residual) +
                          " after " + std::to_string(gr.iterations) + " iterations",
                      s.step, gr.residual);

  Step1Result r;
  sys.unpack(X, r.phi, r.mu, r.u, r.w);
  r.iterations = gr.iterations;
  r.residual = gr.residual;
  // The P_0 row of the phase equation with the wall rows states exact mass
  // balance; remove the part of the Krylov residual that lives in it.
  const double target = sys.startup ? g_.integrate(s.now.phi)
                                     : (4.0 * g_.integrate(s.now.phi) - g_.integrate(s.prev.phi)) / 3.0;
  r.mass_shift = (target - g_.integrate(r.phi)) / g_.area();
  r.phi.array() += r.mass_shift;
  r.U = sys.aux.Ubar + 2.0 * sys.phis.cwiseProduct(r.phi);
  for (Wall w : {Wall::Bottom, Wall::Top})
    r.W.at(w) = sys.aux.Wbar.at(w) + 0.5 * sys.aux.Zstar.at(w).cwiseProduct(g_.trace(r.phi, w));
  return r;
}

void Integrator::step2(const Field& ut, const Field& wt, const Field& p, double a0, Field& u, Field& w,
                       Field& p_new) const {
  const int N = g_.ny(), n1 = g_.nyp(), nm = g_.nmodes();
  const double c = sp_.Re * a0;
  const Eigen::MatrixXd& D = g_.dy_matrix();
  const Spectrum Fu = g_.forward(ut), Fw = g_.forward(wt);
  Spectrum Fpsi(n1, nm), Un(n1, nm), Wn(n1, nm);
  for (int m = 0; m < nm; ++m) {
    if (m == 0 || m == g_.nx() / 2) {
      // No x-derivative in these modes: w must vanish, psi integrates c w~.
      Eigen::VectorXcd psi(n1);
      psi.real() = c * g_.antiderivative(Fw.col(m).real());
      psi.imag() = c * g_.antiderivative(Fw.col(m).imag());
      Fpsi.col(m) = psi;
      Un.col(m) = Fu.col(m);
      Wn.col(m).setZero();
      continue;
    }
    const cd ik(0.0, g_.k1()(m));
    Eigen::VectorXcd rhs = c * (ik * Fu.col(m) + D * Fw.col(m));
    rhs(0) = c * Fw(0, m);
    rhs(N) = c * Fw(N, m);
    const Eigen::VectorXcd psi = solve_complex(proj_lu_[m], rhs);
    Fpsi.col(m) = psi;
    Un.col(m) = Fu.col(m) - ik * psi / c;
    Wn.col(m) = Fw.col(m) - D * psi / c;
  }
  const cd mean = g_.wy().dot(Fpsi.col(0).real()) / 2.0;
  Fpsi.col(0).array() -= mean;
  u = g_.backward(Un);
  w = g_.backward(Wn);
  p_new = p + g_.backward(Fpsi);
}

StepReport Integrator::step(FieldState& s) const {
  const bool startup = (s.step == 0);
  const double a0 = startup ? 1.0 / sp_.dt : 1.5 / sp_.dt;
  Step1Result r = step1(s);
  TimeLevel next;
  step2(r.u, r.w, s.now.p, a0, next.u, next.w, next.p);
  next.phi = std::move(r.phi);
  next.U = std::move(r.U);
  next.W = std::move(r.W);
  s.prev = std::move(s.now);
  s.now = std::move(next);
  s.mu = std::move(r.mu);
  s.step += 1;
  s.t = static_cast<double>(s.step) * sp_.dt;
  StepReport rep;
  rep.iterations = r.iterations;
  rep.residual = r.residual;
  rep.mass_shift = r.mass_shift;
  rep.divmax = g_.interior_max_abs(g_.divergence(s.now.u, s.now.w));
  return rep;
}

void Integrator::advance(FieldState& s, int n_steps,
                         const std::function<void(const FieldState&, const StepReport&)>& on_step) const {
  for (int i = 0; i < n_steps; ++i) {
    const StepReport rep = step(s);
    if (on_step) on_step(s, rep);
  }
}

}  // namespace mcl
