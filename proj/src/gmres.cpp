#include "mcl/gmres.hpp"

#include <cmath>

namespace mcl {

GmresResult gmres(const LinearMap& A, const LinearMap& M, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                  double tol, int max_iter, int restart) {
  GmresResult res;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero(b.size());
    res.converged = true;
    return res;
  }
  const Eigen::Index n = b.size();
  Eigen::VectorXd r(n), tmp(n), z(n);
  A(x, tmp);
  r = b - tmp;
  double rnorm = r.norm();
  res.residual = rnorm / bnorm;
  if (res.residual <= tol) {
    res.converged = true;
    return res;
  }

  Eigen::MatrixXd V(n, restart + 1);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(restart + 1, restart);
  Eigen::VectorXd cs(restart), sn(restart), g(restart + 1);

  while (res.iterations < max_iter) {
    V.col(0) = r / rnorm;
    g.setZero();
    g(0) = rnorm;
    H.setZero();
    int j = 0;
    for (; j < restart && res.iterations < max_iter; ++j) {
      ++res.iterations;
      M(V.col(j), z);
      A(z, tmp);
      // Classical Gram-Schmidt, applied twice.
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd h = V.leftCols(j + 1).transpose() * tmp;
        tmp.noalias() -= V.leftCols(j + 1) * h;
        H.col(j).head(j + 1) += h;
      }
      H(j + 1, j) = tmp.norm();
      V.col(j + 1) = H(j + 1, j) > 0.0 ? Eigen::VectorXd(tmp / H(j + 1, j)) : tmp;
      for (int i = 0; i < j; ++i) {
        const double t = cs(i) * H(i, j) + sn(i) * H(i + 1, j);
        H(i + 1, j) = -sn(i) * H(i, j) + cs(i) * H(i + 1, j);
        H(i, j) = t;
      }
      const double d = std::hypot(H(j, j), H(j + 1, j));
      cs(j) = d > 0.0 ? H(j, j) / d : 1.0;
      sn(j) = d > 0.0 ? H(j + 1, j) / d : 0.0;
      H(j, j) = d;
      H(j + 1, j) = 0.0;
      g(j + 1) = -sn(j) * g(j);
      g(j) = cs(j) * g(j);
      if (std::abs(g(j + 1)) / bnorm <= tol) {
        ++j;
        break;
      }
    }
    const Eigen::VectorXd y =
        H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    const Eigen::VectorXd upd = V.leftCols(j) * y;
    M(upd, z);
    x += z;
    A(x, tmp);
    r = b - tmp;
    rnorm = r.norm();
    res.residual = rnorm / bnorm;
    if (res.residual <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace mcl
