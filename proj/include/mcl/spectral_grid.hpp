#pragma once

#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace mcl {

/// Physical-space field: rows are wall-normal nodes y_0 = -1 .. y_N = +1,
/// columns are periodic nodes x_i = i * Lx / Nx. Storage is column-major, so
/// the y index runs fastest.
using Field = Eigen::MatrixXd;

/// Fourier-space field: same rows, columns are the Nx/2 + 1 non-negative
/// wavenumbers of the real transform along x (unnormalised FFTW convention).
using Spectrum = Eigen::MatrixXcd;

enum class Wall { Bottom, Top };

/// Values along y = -1 and y = +1 at the periodic nodes.
struct WallTrace {
  Eigen::VectorXd bottom;
  Eigen::VectorXd top;

  Eigen::VectorXd& at(Wall w) { return w == Wall::Bottom ? bottom : top; }
  const Eigen::VectorXd& at(Wall w) const { return w == Wall::Bottom ? bottom : top; }
};

/// a*u + b*du/dn = g on one wall, n the outward normal; g may vary along x
/// (empty g means zero).
struct RobinBC {
  double a = 1.0;
  double b = 0.0;
  Eigen::VectorXd g;
};

struct Gradient {
  Field dx;
  Field dy;
};

class FourierTransform;

/// Spectral interpolant of one field, evaluable anywhere in the closed domain.
class Interpolant {
 public:
  double value(double x, double y) const;
  /// Value and gradient at (x, y).
  void eval(double x, double y, double& f, double& fx, double& fy) const;

 private:
  friend class SpectralGrid;
  Eigen::MatrixXcd coeffs_;  // (Nx/2+1) x (Ny+1), scaled so f = Re sum c_m e^{i k_m x}
  Eigen::VectorXd kx_;
  Eigen::VectorXd nodes_;
  Eigen::VectorXd bary_;
  double lx_ = 0.0;
};

/// Tensor-product Fourier x Legendre-Gauss-Lobatto discretisation of
/// [0, Lx] x [-1, 1]. Immutable after construction; every method is const and
/// safe to call from several threads at once.
class SpectralGrid {
 public:
  SpectralGrid(int nx, int ny, double lx);
  ~SpectralGrid();
  SpectralGrid(const SpectralGrid&) = delete;
  SpectralGrid& operator=(const SpectralGrid&) = delete;

  int nx() const { return nx_; }
  /// Polynomial order in y; there are ny() + 1 nodes.
  int ny() const { return ny_; }
  int nyp() const { return ny_ + 1; }
  int nmodes() const { return nx_ / 2 + 1; }
  double lx() const { return lx_; }
  double dx() const { return lx_ / nx_; }
  double area() const { return 2.0 * lx_; }

  const Eigen::VectorXd& x() const { return x_; }
  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::VectorXd& wy() const { return wy_; }
  /// Wavenumbers 2*pi*m/Lx, m = 0..Nx/2.
  const Eigen::VectorXd& k() const { return k_; }
  /// Wavenumber used by first derivatives (Nyquist entry zeroed).
  const Eigen::VectorXd& k1() const { return k1_; }
  const Eigen::MatrixXd& dy_matrix() const { return dy_; }
  const Eigen::MatrixXd& d2y_matrix() const { return d2y_; }
  /// Nodal values -> Legendre coefficients along y.
  const Eigen::MatrixXd& legendre_forward() const { return leg_fwd_; }
  const Eigen::VectorXd& barycentric() const { return bary_; }

  Field zeros() const { return Field::Zero(nyp(), nx_); }
  Field constant(double c) const { return Field::Constant(nyp(), nx_, c); }
  /// Samples f(x, y) at the nodes.
  template <class F>
  Field sample(F&& f) const {
    Field out(nyp(), nx_);
    for (int i = 0; i < nx_; ++i)
      for (int j = 0; j < nyp(); ++j) out(j, i) = f(x_(i), y_(j));
    return out;
  }

  Spectrum forward(const Field& f) const;
  Field backward(const Spectrum& s) const;

  Field ddx(const Field& f) const;
  Field ddy(const Field& f) const;
  Field d2dx2(const Field& f) const;
  Field laplacian(const Field& f) const;
  Gradient gradient(const Field& f) const;
  Field divergence(const Field& u, const Field& w) const;

  /// Gauss-Lobatto x trapezoidal quadrature over the domain.
  double integrate(const Field& f) const;
  double wall_integrate(const Eigen::VectorXd& trace) const;
  Eigen::VectorXd trace(const Field& f, Wall w) const;
  WallTrace traces(const Field& f) const { return {trace(f, Wall::Bottom), trace(f, Wall::Top)}; }
  /// Outward normal derivative at a wall.
  Eigen::VectorXd normal_derivative(const Field& f, Wall w) const;

  /// Max |f| over interior nodes (walls excluded).
  double interior_max_abs(const Field& f) const;

  /// f^3 computed on a 3/2-padded grid in both directions and projected back.
  Field dealiased_cube(const Field& f) const;

  /// Solves (lambda - Laplacian) u = rhs at interior collocation nodes with
  /// Robin conditions on both walls. For lambda = 0 with pure Neumann data the
  /// x-mean component is gauged to zero mean after a compatibility check.
  Field solve_helmholtz(const Field& rhs, double lambda, const RobinBC& bottom,
                        const RobinBC& top) const;

  Interpolant interpolant(const Field& f) const;

  /// Nodal values on the y nodes of the antiderivative (from y = -1) of each
  /// column, computed exactly through Legendre coefficients.
  Eigen::VectorXd antiderivative(const Eigen::VectorXd& column) const;

 private:
  int nx_;
  int ny_;
  double lx_;
  Eigen::VectorXd x_, y_, wy_, k_, k1_, bary_;
  Eigen::MatrixXd dy_, d2y_, leg_fwd_, antider_;
  // 3/2 padding data for the cube.
  int pad_nx_ = 0;
  Eigen::MatrixXd pad_eval_;     // Gauss points x Legendre coefficients
  Eigen::MatrixXd pad_project_;  // Legendre coefficients x Gauss points
  Eigen::MatrixXd leg_eval_;     // LGL nodes x Legendre coefficients
  std::unique_ptr<FourierTransform> fft_;
  std::unique_ptr<FourierTransform> fft_pad_;
};

/// Row-wise real FFT along x for a fixed number of y rows.
class FourierTransform {
 public:
  FourierTransform(int nx, int rows);
  ~FourierTransform();
  FourierTransform(const FourierTransform&) = delete;
  FourierTransform& operator=(const FourierTransform&) = delete;

  void forward(const Eigen::MatrixXd& in, Eigen::MatrixXcd& out) const;
  /// Includes the 1/Nx normalisation.
  void backward(const Eigen::MatrixXcd& in, Eigen::MatrixXd& out) const;

 private:
  int nx_, rows_;
  void* plan_fwd_ = nullptr;
  void* plan_bwd_ = nullptr;
};

}  // namespace mcl
