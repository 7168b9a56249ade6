#pragma once

#include <Eigen/Dense>

namespace mcl::legendre {

/// Values of P_0..P_n at x by the three-term recurrence.
Eigen::VectorXd polynomials(int n, double x);

/// Legendre-Gauss-Lobatto nodes on [-1, 1], ascending, for polynomial order n
/// (n + 1 nodes including both endpoints).
Eigen::VectorXd lobatto_nodes(int n);

/// Quadrature weights matching lobatto_nodes; exact for degree <= 2n - 1.
Eigen::VectorXd lobatto_weights(const Eigen::VectorXd& nodes);

/// Gauss-Legendre nodes and weights (m interior points), exact to degree 2m - 1.
void gauss_rule(int m, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

/// First-derivative matrix of the nodal interpolant on arbitrary distinct nodes.
Eigen::MatrixXd differentiation_matrix(const Eigen::VectorXd& nodes);

/// Barycentric weights, normalised so the largest magnitude is 1.
Eigen::VectorXd barycentric_weights(const Eigen::VectorXd& nodes);

/// Rows l_j(x) of the Lagrange basis at x (value), and l_j'(x) if deriv is non-null.
void lagrange_row(const Eigen::VectorXd& nodes, const Eigen::VectorXd& bary, double x,
                  Eigen::VectorXd& value, Eigen::VectorXd* deriv = nullptr);

/// V(j, k) = P_k(x_j).
Eigen::MatrixXd vandermonde(const Eigen::VectorXd& nodes, int n);

/// Matrix mapping LGL nodal values to Legendre coefficients (exact for P_n).
Eigen::MatrixXd lobatto_forward(const Eigen::VectorXd& nodes, const Eigen::VectorXd& weights);

/// Matrix mapping Legendre coefficients c_0..c_n to coefficients of the
/// antiderivative that vanishes at x = -1 (degree n + 1).
Eigen::MatrixXd antiderivative(int n);

}  // namespace mcl::legendre
