#include "doctest.h"

#include <random>

#include "mcl/gmres.hpp"

using namespace mcl;

TEST_CASE("gmres solves a nonsymmetric system with and without preconditioning") {
  const int n = 120;
  std::mt19937 rng(11);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) * 4.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) += 0.3 * nd(rng) / std::sqrt(n);
  a.diagonal().array() += Eigen::ArrayXd::LinSpaced(n, 0.0, 50.0);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b(i) = nd(rng);
  const Eigen::VectorXd exact = a.partialPivLu().solve(b);
  LinearMap A = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = a * x; };
  LinearMap I = [](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = x; };
  const Eigen::VectorXd d = a.diagonal();
  LinearMap J = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = x.cwiseQuotient(d); };

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  GmresResult r1 = gmres(A, I, b, x, 1e-12, 500, 30);
  CHECK(r1.converged);
  CHECK((x - exact).norm() <= 1e-10 * exact.norm());

  x.setZero();
  GmresResult r2 = gmres(A, J, b, x, 1e-12, 500, 30);
  CHECK(r2.converged);
  CHECK(r2.iterations < r1.iterations);
  CHECK((x - exact).norm() <= 1e-10 * exact.norm());
}

TEST_CASE("gmres returns immediately for zero right-hand side") {
  LinearMap A = [](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = 2 * x; };
  Eigen::VectorXd x = Eigen::VectorXd::Ones(5);
  GmresResult r = gmres(A, A, Eigen::VectorXd::Zero(5), x, 1e-10, 10, 5);
  CHECK(r.converged);
  CHECK(x.norm() == 0.0);
}
