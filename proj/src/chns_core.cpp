#include "mcl/chns_core.hpp"

#include <cmath>
#include <numbers>

namespace mcl {

namespace {
constexpr double kSqrt2 = std::numbers::sqrt2;
}

Field chemical_potential(const SpectralGrid& g, const Field& phi, double eps) {
  return -eps * g.laplacian(phi) + (g.dealiased_cube(phi) - phi) / eps;
}

double wall_energy(double phi, double theta_s) {
  return -(kSqrt2 / 6.0) * std::cos(theta_s) * (3.0 * phi - phi * phi * phi);
}

double wall_energy_prime(double phi, double theta_s) {
  return -(kSqrt2 / 6.0) * std::cos(theta_s) * (3.0 - 3.0 * phi * phi);
}

double clipped_wall_energy(double phi, double theta_s) {
  if (std::abs(phi) <= 1.0) return kSqrt2 / 3.0 + wall_energy(phi, theta_s);
  // Plateaus continue the values at phi = +-1.
  return kSqrt2 / 3.0 - (phi > 0.0 ? 1.0 : -1.0) * (kSqrt2 / 3.0) * std::cos(theta_s);
}

double clipped_wall_energy_prime(double phi, double theta_s) {
  // The interior branch's derivative vanishes at |phi| = 1, matching the plateau.
  if (std::abs(phi) <= 1.0) return wall_energy_prime(phi, theta_s);
  return 0.0;
}

Eigen::VectorXd wall_energy(const Eigen::VectorXd& phi, double theta_s) {
  return phi.unaryExpr([theta_s](double p) { return wall_energy(p, theta_s); });
}

Eigen::VectorXd clipped_wall_energy(const Eigen::VectorXd& phi, double theta_s) {
  return phi.unaryExpr([theta_s](double p) { return clipped_wall_energy(p, theta_s); });
}

WallTrace L_operator(const SpectralGrid& g, const Field& phi, double eps, double theta_s) {
  WallTrace out;
  for (Wall w : {Wall::Bottom, Wall::Top}) {
    const Eigen::VectorXd tr = g.trace(phi, w);
    out.at(w) = eps * g.normal_derivative(phi, w) +
                tr.unaryExpr([theta_s](double p) { return wall_energy_prime(p, theta_s); });
  }
  return out;
}

void ieq_aux_init(const SpectralGrid& g, const Field& phi0, double theta_s, Field& U0, WallTrace& W0) {
  U0 = (phi0.array().square() - 1.0).matrix();
  for (Wall w : {Wall::Bottom, Wall::Top})
    W0.at(w) = clipped_wall_energy(g.trace(phi0, w), theta_s).cwiseSqrt();
}

double Z_of_phi(double phi, double theta_s) {
  return clipped_wall_energy_prime(phi, theta_s) / std::sqrt(clipped_wall_energy(phi, theta_s));
}

Eigen::VectorXd Z_of_phi(const Eigen::VectorXd& phi, double theta_s) {
  return phi.unaryExpr([theta_s](double p) { return Z_of_phi(p, theta_s); });
}

EnergyParts total_energy(const SpectralGrid& g, const Field& phi, const Field& u, const Field& w,
                         const SimParams& sp) {
  EnergyParts e;
  e.kin = 0.5 * sp.Re * g.integrate((u.array().square() + w.array().square()).matrix());
  const Gradient gr = g.gradient(phi);
  const Field dens = 0.5 * sp.eps * (gr.dx.array().square() + gr.dy.array().square()) +
                     (1.0 - phi.array().square()).square() / (4.0 * sp.eps);
  e.bulk = sp.B * g.integrate(dens);
  for (Wall wl : {Wall::Bottom, Wall::Top})
    e.wall += sp.B * g.wall_integrate(clipped_wall_energy(g.trace(phi, wl), sp.theta_s));
  return e;
}

}  // namespace mcl
