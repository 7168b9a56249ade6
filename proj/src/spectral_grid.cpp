#include "mcl/spectral_grid.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <fftw3.h>

#include "mcl/legendre.hpp"

namespace mcl {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

FourierTransform::FourierTransform(int nx, int rows) : nx_(nx), rows_(rows) {
  const int nm = nx / 2 + 1;
  std::lock_guard<std::mutex> lock(planner_mutex());
  double* in = fftw_alloc_real(static_cast<size_t>(nx) * rows);
  fftw_complex* out = fftw_alloc_complex(static_cast<size_t>(nm) * rows);
  int n[1] = {nx};
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plan_fwd_ = fftw_plan_many_dft_r2c(1, n, rows, in, nullptr, rows, 1, out, nullptr, rows, 1, flags);
  plan_bwd_ = fftw_plan_many_dft_c2r(1, n, rows, out, nullptr, rows, 1, in, nullptr, rows, 1, flags);
  fftw_free(in);
  fftw_free(out);
  if (!plan_fwd_ || !plan_bwd_) throw std::runtime_error("FFTW planning failed");
}

FourierTransform::~FourierTransform() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

void FourierTransform::forward(const Eigen::MatrixXd& in, Eigen::MatrixXcd& out) const {
  out.resize(rows_, nx_ / 2 + 1);
  // r2c leaves its input intact; the const_cast only satisfies the C signature.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void FourierTransform::backward(const Eigen::MatrixXcd& in, Eigen::MatrixXd& out) const {
  Eigen::MatrixXcd tmp = in;  // c2r overwrites its input
  out.resize(rows_, nx_);
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_bwd_),
                       reinterpret_cast<fftw_complex*>(tmp.data()), out.data());
  out *= 1.0 / nx_;
}

SpectralGrid::SpectralGrid(int nx, int ny, double lx) : nx_(nx), ny_(ny), lx_(lx) {
  if (nx < 4 || nx % 2 != 0) throw std::invalid_argument("SpectralGrid: Nx must be even and >= 4");
  if (ny < 4) throw std::invalid_argument("SpectralGrid: Ny must be >= 4");
  if (!(lx > 0.0)) throw std::invalid_argument("SpectralGrid: Lx must be positive");

  x_.resize(nx);
  for (int i = 0; i < nx; ++i) x_(i) = lx * i / nx;
  y_ = legendre::lobatto_nodes(ny);
  wy_ = legendre::lobatto_weights(y_);
  bary_ = legendre::barycentric_weights(y_);
  dy_ = legendre::differentiation_matrix(y_);
  d2y_ = dy_ * dy_;
  leg_fwd_ = legendre::lobatto_forward(y_, wy_);
  antider_ = legendre::antiderivative(ny);

  const int nm = nmodes();
  k_.resize(nm);
  k1_.resize(nm);
  for (int m = 0; m < nm; ++m) {
    k_(m) = 2.0 * std::numbers::pi * m / lx;
    k1_(m) = (m == nx / 2) ? 0.0 : k_(m);
  }

  fft_ = std::make_unique<FourierTransform>(nx, nyp());

  // 3/2-rule padding data.
  const int mq = (3 * nyp() + 1) / 2;
  pad_nx_ = 3 * nx / 2;
  Eigen::VectorXd gq, gw;
  legendre::gauss_rule(mq, gq, gw);
  pad_eval_ = legendre::vandermonde(gq, ny);
  pad_project_.resize(nyp(), mq);
  for (int kk = 0; kk <= ny; ++kk)
    for (int q = 0; q < mq; ++q) pad_project_(kk, q) = (2.0 * kk + 1.0) / 2.0 * gw(q) * pad_eval_(q, kk);
  leg_eval_ = legendre::vandermonde(y_, ny);
  fft_pad_ = std::make_unique<FourierTransform>(pad_nx_, mq);
}

SpectralGrid::~SpectralGrid() = default;

Spectrum SpectralGrid::forward(const Field& f) const {
  Spectrum s;
  fft_->forward(f, s);
  return s;
}

Field SpectralGrid::backward(const Spectrum& s) const {
  Field f;
  fft_->backward(s, f);
  return f;
}

Field SpectralGrid::ddx(const Field& f) const {
  Spectrum s = forward(f);
  for (int m = 0; m < nmodes(); ++m) s.col(m) *= std::complex<double>(0.0, k1_(m));
  return backward(s);
}

Field SpectralGrid::d2dx2(const Field& f) const {
  Spectrum s = forward(f);
  for (int m = 0; m < nmodes(); ++m) s.col(m) *= -k_(m) * k_(m);
  return backward(s);
}

Field SpectralGrid::ddy(const Field& f) const { return dy_ * f; }

Field SpectralGrid::laplacian(const Field& f) const { return d2dx2(f) + d2y_ * f; }

Gradient SpectralGrid::gradient(const Field& f) const { return {ddx(f), ddy(f)}; }

Field SpectralGrid::divergence(const Field& u, const Field& w) const { return ddx(u) + ddy(w); }

double SpectralGrid::integrate(const Field& f) const { return dx() * (wy_.transpose() * f).sum(); }

double SpectralGrid::wall_integrate(const Eigen::VectorXd& trace) const { return dx() * trace.sum(); }

Eigen::VectorXd SpectralGrid::trace(const Field& f, Wall w) const {
  return f.row(w == Wall::Bottom ? 0 : ny_).transpose();
}

Eigen::VectorXd SpectralGrid::normal_derivative(const Field& f, Wall w) const {
  if (w == Wall::Bottom) return -(dy_.row(0) * f).transpose();
  return (dy_.row(ny_) * f).transpose();
}

double SpectralGrid::interior_max_abs(const Field& f) const {
  return f.middleRows(1, ny_ - 1).cwiseAbs().maxCoeff();
}

Field SpectralGrid::dealiased_cube(const Field& f) const {
  const int mq = static_cast<int>(pad_eval_.rows());
  const int nm = nmodes();
  const int pm = pad_nx_ / 2 + 1;
  // y: nodal -> Legendre -> Gauss points. x: zero-padded spectrum.
  Eigen::MatrixXd at_gauss = pad_eval_ * (leg_fwd_ * f);
  FourierTransform coarse(nx_, mq);
  Eigen::MatrixXcd s;
  coarse.forward(at_gauss, s);
  const double up = static_cast<double>(pad_nx_) / nx_;
  Eigen::MatrixXcd sp = Eigen::MatrixXcd::Zero(mq, pm);
  for (int m = 0; m < nm; ++m) sp.col(m) = s.col(m) * (m == nx_ / 2 ? 0.5 * up : up);
  Eigen::MatrixXd padded;
  fft_pad_->backward(sp, padded);
  padded = padded.array().cube().matrix();
  fft_pad_->forward(padded, sp);
  for (int m = 0; m < nm; ++m) {
    if (m == nx_ / 2)
      s.col(m) = (2.0 / up) * sp.col(m).real().cast<std::complex<double>>();
    else
      s.col(m) = sp.col(m) / up;
  }
  Eigen::MatrixXd back;
  coarse.backward(s, back);
  return leg_eval_ * (pad_project_ * back);
}

Field SpectralGrid::solve_helmholtz(const Field& rhs, double lambda, const RobinBC& bottom,
                                    const RobinBC& top) const {
  if (lambda < 0.0) throw std::invalid_argument("solve_helmholtz: lambda must be >= 0");
  if (bottom.a == 0.0 && bottom.b == 0.0) throw std::invalid_argument("solve_helmholtz: degenerate bottom BC");
  if (top.a == 0.0 && top.b == 0.0) throw std::invalid_argument("solve_helmholtz: degenerate top BC");
  const int n = ny_;
  Field r = rhs;
  r.row(0).setZero();
  r.row(n).setZero();
  if (bottom.g.size()) r.row(0) = bottom.g.transpose();
  if (top.g.size()) r.row(n) = top.g.transpose();
  Spectrum s = forward(r);
  Spectrum out(nyp(), nmodes());
  for (int m = 0; m < nmodes(); ++m) {
    const double kk = k_(m) * k_(m);
    Eigen::MatrixXd a = -d2y_;
    a.diagonal().array() += lambda + kk;
    a.row(0) = -bottom.b * dy_.row(0);
    a(0, 0) += bottom.a;
    a.row(n) = top.b * dy_.row(n);
    a(n, n) += top.a;
    Eigen::MatrixXd b(nyp(), 2);
    b.col(0) = s.col(m).real();
    b.col(1) = s.col(m).imag();
    const bool singular = (m == 0 && lambda == 0.0 && bottom.a == 0.0 && top.a == 0.0);
    if (singular) {
      // Left null vector of the collocation matrix gives the compatibility
      // functional; one redundant row is then traded for the mean-zero gauge.
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.transpose(), Eigen::ComputeFullV);
      const Eigen::VectorXd ell = svd.matrixV().col(nyp() - 1);
      const double mismatch = std::abs(ell.dot(b.col(0)));
      const double scale = ell.cwiseAbs().dot(b.col(0).cwiseAbs()) + 1e-300;
      if (mismatch > 1e-10 * scale && mismatch > 1e-12 * b.col(0).cwiseAbs().maxCoeff())
        throw std::domain_error("solve_helmholtz: incompatible pure-Neumann data (relative mismatch " +
                                std::to_string(mismatch / scale) + ")");
      Eigen::Index row;
      ell.cwiseAbs().maxCoeff(&row);
      a.row(row) = wy_.transpose();
      b.row(row).setZero();
    }
    Eigen::MatrixXd sol = a.partialPivLu().solve(b);
    out.col(m).real() = sol.col(0);
    out.col(m).imag() = sol.col(1);
  }
  return backward(out);
}

Interpolant SpectralGrid::interpolant(const Field& f) const {
  Interpolant it;
  Spectrum s = forward(f);
  it.coeffs_.resize(nmodes(), nyp());
  for (int m = 0; m < nmodes(); ++m) {
    const double w = (m == 0 || m == nx_ / 2) ? 1.0 : 2.0;
    it.coeffs_.row(m) = s.col(m).transpose() * (w / nx_);
  }
  it.kx_ = k_;
  it.nodes_ = y_;
  it.bary_ = bary_;
  it.lx_ = lx_;
  return it;
}

Eigen::VectorXd SpectralGrid::antiderivative(const Eigen::VectorXd& column) const {
  const Eigen::VectorXd c = leg_fwd_ * column;
  const Eigen::VectorXd a = antider_ * c;
  Eigen::VectorXd out(nyp());
  for (int j = 0; j <= ny_; ++j) out(j) = legendre::polynomials(ny_ + 1, y_(j)).dot(a);
  return out;
}

double Interpolant::value(double x, double y) const {
  double f, fx, fy;
  eval(x, y, f, fx, fy);
  return f;
}

void Interpolant::eval(double x, double y, double& f, double& fx, double& fy) const {
  if (y < -1.0 - 1e-12 || y > 1.0 + 1e-12) throw std::out_of_range("Interpolant: y outside [-1, 1]");
  y = std::clamp(y, -1.0, 1.0);
  Eigen::VectorXd l, dl;
  legendre::lagrange_row(nodes_, bary_, y, l, &dl);
  const Eigen::VectorXcd cy = coeffs_ * l.cast<std::complex<double>>();
  const Eigen::VectorXcd dcy = coeffs_ * dl.cast<std::complex<double>>();
  const std::complex<double> base = std::polar(1.0, 2.0 * std::numbers::pi * x / lx_);
  std::complex<double> z(1.0, 0.0);
  f = fx = fy = 0.0;
  for (int m = 0; m < cy.size(); ++m) {
    f += (cy(m) * z).real();
    fy += (dcy(m) * z).real();
    fx += (std::complex<double>(0.0, kx_(m)) * cy(m) * z).real();
    z *= base;
  }
}

}  // namespace mcl
