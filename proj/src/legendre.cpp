#include "mcl/legendre.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mcl::legendre {

Eigen::VectorXd polynomials(int n, double x) {
  Eigen::VectorXd p(n + 1);
  p(0) = 1.0;
  if (n >= 1) p(1) = x;
  for (int k = 1; k < n; ++k) p(k + 1) = ((2.0 * k + 1.0) * x * p(k) - k * p(k - 1)) / (k + 1.0);
  return p;
}

Eigen::VectorXd lobatto_nodes(int n) {
  if (n < 2) throw std::invalid_argument("lobatto_nodes: order must be >= 2");
  Eigen::VectorXd x(n + 1);
  const double pi = std::numbers::pi;
  for (int j = 0; j <= n; ++j) {
    // Chebyshev-Gauss-Lobatto guess, Newton on (1 - x^2) P_n'(x) through the
    // identity x P_n - P_{n-1} = (x^2 - 1) P_n' / n.
    double xi = -std::cos(pi * j / n);
    if (j == 0 || j == n) {
      x(j) = xi;
      continue;
    }
    for (int it = 0; it < 100; ++it) {
      Eigen::VectorXd p = polynomials(n, xi);
      const double f = xi * p(n) - p(n - 1);
      const double df = (n + 1) * p(n);
      const double dx = f / df;
      xi -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    x(j) = xi;
  }
  // Symmetrise to remove roundoff asymmetry.
  for (int j = 0; j <= n / 2; ++j) {
    const double a = 0.5 * (x(n - j) - x(j));
    x(j) = -a;
    x(n - j) = a;
  }
  if (n % 2 == 0) x(n / 2) = 0.0;
  return x;
}

Eigen::VectorXd lobatto_weights(const Eigen::VectorXd& nodes) {
  const int n = static_cast<int>(nodes.size()) - 1;
  Eigen::VectorXd w(n + 1);
  for (int j = 0; j <= n; ++j) {
    const double pn = polynomials(n, nodes(j))(n);
    w(j) = 2.0 / (n * (n + 1.0) * pn * pn);
  }
  return w;
}

void gauss_rule(int m, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  nodes.resize(m);
  weights.resize(m);
  const double pi = std::numbers::pi;
  for (int j = 0; j < m; ++j) {
    double xi = -std::cos(pi * (j + 0.75) / (m + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      Eigen::VectorXd p = polynomials(m, xi);
      dp = m * (xi * p(m) - p(m - 1)) / (xi * xi - 1.0);
      const double dx = p(m) / dp;
      xi -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    Eigen::VectorXd p = polynomials(m, xi);
    dp = m * (xi * p(m) - p(m - 1)) / (xi * xi - 1.0);
    nodes(j) = xi;
    weights(j) = 2.0 / ((1.0 - xi * xi) * dp * dp);
  }
}

Eigen::VectorXd barycentric_weights(const Eigen::VectorXd& nodes) {
  const int n = static_cast<int>(nodes.size());
  Eigen::VectorXd logabs(n);
  Eigen::VectorXd sign(n);
  for (int j = 0; j < n; ++j) {
    double s = 1.0;
    double l = 0.0;
    for (int k = 0; k < n; ++k) {
      if (k == j) continue;
      const double d = nodes(j) - nodes(k);
      l -= std::log(std::abs(d));
      if (d < 0) s = -s;
    }
    logabs(j) = l;
    sign(j) = s;
  }
  const double lmax = logabs.maxCoeff();
  Eigen::VectorXd w(n);
  for (int j = 0; j < n; ++j) w(j) = sign(j) * std::exp(logabs(j) - lmax);
  return w;
}

Eigen::MatrixXd differentiation_matrix(const Eigen::VectorXd& nodes) {
  const int n = static_cast<int>(nodes.size());
  const Eigen::VectorXd w = barycentric_weights(nodes);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      d(i, j) = (w(j) / w(i)) / (nodes(i) - nodes(j));
      diag -= d(i, j);
    }
    d(i, i) = diag;
  }
  return d;
}

void lagrange_row(const Eigen::VectorXd& nodes, const Eigen::VectorXd& bary, double x,
                  Eigen::VectorXd& value, Eigen::VectorXd* deriv) {
  const int n = static_cast<int>(nodes.size());
  value.setZero(n);
  for (int j = 0; j < n; ++j) {
    if (x == nodes(j)) {
      value(j) = 1.0;
      if (deriv) {
        // Row j of the differentiation matrix.
        deriv->setZero(n);
        double diag = 0.0;
        for (int k = 0; k < n; ++k) {
          if (k == j) continue;
          (*deriv)(k) = (bary(k) / bary(j)) / (nodes(j) - nodes(k));
          diag -= (*deriv)(k);
        }
        (*deriv)(j) = diag;
      }
      return;
    }
  }
  Eigen::VectorXd t(n);
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    t(j) = bary(j) / (x - nodes(j));
    sum += t(j);
  }
  value = t / sum;
  if (deriv) {
    // l_j'(x) = l_j(x) * (1/(x-x_j)... ) via the derivative of the barycentric
    // quotient: l_j = t_j / S, l_j' = (t_j' S - t_j S') / S^2, t_j' = -t_j/(x-x_j).
    double dsum = 0.0;
    Eigen::VectorXd dt(n);
    for (int j = 0; j < n; ++j) {
      dt(j) = -t(j) / (x - nodes(j));
      dsum += dt(j);
    }
    *deriv = (dt * sum - t * dsum) / (sum * sum);
  }
}

Eigen::MatrixXd vandermonde(const Eigen::VectorXd& nodes, int n) {
  Eigen::MatrixXd v(nodes.size(), n + 1);
  for (int j = 0; j < nodes.size(); ++j) v.row(j) = polynomials(n, nodes(j)).transpose();
  return v;
}

Eigen::MatrixXd lobatto_forward(const Eigen::VectorXd& nodes, const Eigen::VectorXd& weights) {
  const int n = static_cast<int>(nodes.size()) - 1;
  const Eigen::MatrixXd v = vandermonde(nodes, n);
  Eigen::MatrixXd f(n + 1, n + 1);
  for (int k = 0; k <= n; ++k) {
    // Discrete norm of P_k under LGL quadrature: exact below n, 2/n at k = n.
    const double gamma = (k < n) ? 2.0 / (2.0 * k + 1.0) : 2.0 / n;
    for (int j = 0; j <= n; ++j) f(k, j) = weights(j) * v(j, k) / gamma;
  }
  return f;
}

Eigen::MatrixXd antiderivative(int n) {
  // int_{-1}^{x} P_k = (P_{k+1} - P_{k-1}) / (2k + 1) for k >= 1; int P_0 = P_1 + P_0.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 2, n + 1);
  a(0, 0) = 1.0;
  a(1, 0) = 1.0;
  for (int k = 1; k <= n; ++k) {
    a(k + 1, k) += 1.0 / (2.0 * k + 1.0);
    a(k - 1, k) -= 1.0 / (2.0 * k + 1.0);
  }
  return a;
}

}  // namespace mcl::legendre
