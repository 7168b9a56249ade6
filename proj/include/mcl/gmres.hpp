#pragma once

#include <functional>

#include <Eigen/Dense>

namespace mcl {

struct GmresResult {
  int iterations = 0;
  double residual = 0.0;  // final ||b - A x|| / ||b||
  bool converged = false;
};

using LinearMap = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Right-preconditioned restarted GMRES for A x = b; x holds the initial
/// guess on entry. The residual is measured in the unpreconditioned norm.
GmresResult gmres(const LinearMap& A, const LinearMap& M, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                  double tol, int max_iter, int restart);

}  // namespace mcl
