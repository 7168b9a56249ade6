#pragma once

#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcl/chns_core.hpp"
#include "mcl/gmres.hpp"

namespace mcl {

struct StepFailure : std::runtime_error {
  StepFailure(const std::string& msg, std::int64_t step_index, double residual)
      : std::runtime_error(msg), step(step_index), residual(residual) {}
  std::int64_t step;
  double residual;
};

/// Affine maps U^{n+1} = Ubar + 2 phi* phi^{n+1} and W^{n+1} = Wbar + Z* phi^{n+1} / 2.
struct AuxMaps {
  Field Ubar;
  WallTrace Wbar;
  WallTrace Zstar;
};

/// Startup (first-order) uses phi* = phi^n; BDF2 uses 2 phi^n - phi^{n-1}.
AuxMaps eliminate_aux(const SpectralGrid& g, const TimeLevel& now, const TimeLevel& prev, double theta_s,
                      bool startup);

/// Solution of Step 1 before projection.
struct Step1Result {
  Field phi, mu, u, w;  // u, w: intermediate velocity
  Field U;
  WallTrace W;
  int iterations = 0;
  double residual = 0.0;
  double mass_shift = 0.0;  // constant applied to phi to close the discrete mass balance
};

struct StepReport {
  int iterations = 0;
  double residual = 0.0;
  double mass_shift = 0.0;
  double divmax = 0.0;
};

/// Coefficients of one Step 1 linear system. The unknown vector stacks the
/// nodal fields (phi, mu, u~, w~); each residual block holds the Legendre
/// coefficients 0..N-2 of the interior equation in rows 0..N-2, then the
/// bottom and top wall conditions in rows N-1 and N, column by column in x.
struct Step1System {
  const SpectralGrid* grid = nullptr;
  const SimParams* sp = nullptr;
  bool startup = false;
  double a0 = 0.0;
  Field phis, phisx, phisy, us, ws, divs;
  Field hphi, hu, hw;  // history parts of the time derivatives
  Field px, py;        // gradient of p^n
  AuxMaps aux;

  Eigen::Index size() const;
  /// A X (with_source = false) or A X - b (with_source = true), unscaled.
  void apply(const Eigen::VectorXd& X, Eigen::VectorXd& out, bool with_source) const;
  /// Residual blocks as four (Ny+1) x Nx matrices.
  std::vector<Field> residual_blocks(const Field& phi, const Field& mu, const Field& u, const Field& w) const;
  Eigen::VectorXd pack(const Field& phi, const Field& mu, const Field& u, const Field& w) const;
  void unpack(const Eigen::VectorXd& X, Field& phi, Field& mu, Field& u, Field& w) const;
};

class Integrator {
 public:
  Integrator(const SpectralGrid& g, const SimParams& sp);
  ~Integrator();

  const SpectralGrid& grid() const { return g_; }
  const SimParams& params() const { return sp_; }

  Step1System build_step1(const FieldState& s) const;
  Step1Result step1(const FieldState& s) const;
  /// Projects (u~, w~); a0 is the leading time-derivative coefficient.
  void step2(const Field& ut, const Field& wt, const Field& p, double a0, Field& u, Field& w, Field& p_new) const;

  /// One full step (startup when s.step == 0) updating s in place.
  StepReport step(FieldState& s) const;
  /// n_steps steps; on_step is invoked after each one.
  void advance(FieldState& s, int n_steps,
               const std::function<void(const FieldState&, const StepReport&)>& on_step = {}) const;

  /// Same preconditioner GMRES uses, exposed for tests.
  void precondition(const Step1System& sys, const Eigen::VectorXd& r, Eigen::VectorXd& z) const;

 private:
  struct Factors;
  const Factors& factors(double a0) const;
  Eigen::VectorXd row_weights(double a0) const;

  const SpectralGrid& g_;
  SimParams sp_;
  Eigen::MatrixXd tau_;  // first N-1 rows of the Legendre transform
  mutable std::map<double, std::unique_ptr<Factors>> cache_;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> proj_lu_;
};

}  // namespace mcl
