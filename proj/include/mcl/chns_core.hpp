#pragma once

#include <cstdint>

#include "mcl/params.hpp"
#include "mcl/spectral_grid.hpp"

namespace mcl {

/// One time level of the discrete state.
struct TimeLevel {
  Field phi, u, w, p;
  Field U;      // bulk auxiliary, phi^2 - 1 at start
  WallTrace W;  // wall auxiliary, sqrt of the clipped wall energy at start
};

/// Two consecutive time levels. Before the first step prev == now.
struct FieldState {
  TimeLevel now;
  TimeLevel prev;
  Field mu;  // chemical potential of the latest Step 1 (or of the initial data)
  double t = 0.0;
  std::int64_t step = 0;
};

struct EnergyParts {
  double kin = 0.0;
  double bulk = 0.0;
  double wall = 0.0;
  double total() const { return kin + bulk + wall; }
};

/// -eps Lap(phi) - phi/eps + phi^3/eps with a dealiased cube.
Field chemical_potential(const SpectralGrid& g, const Field& phi, double eps);

/// Unclipped wall energy -(sqrt2/6) cos(theta_s) (3 phi - phi^3) and its derivative.
double wall_energy(double phi, double theta_s);
double wall_energy_prime(double phi, double theta_s);
/// Clipped, non-negative form used by the auxiliary variable W: sqrt2/3 + gamma_wf
/// on [-1, 1], constant beyond (continuous at both ends).
double clipped_wall_energy(double phi, double theta_s);
double clipped_wall_energy_prime(double phi, double theta_s);

Eigen::VectorXd wall_energy(const Eigen::VectorXd& phi, double theta_s);
Eigen::VectorXd clipped_wall_energy(const Eigen::VectorXd& phi, double theta_s);

/// eps d_n(phi) + gamma_wf'(phi) on both walls.
WallTrace L_operator(const SpectralGrid& g, const Field& phi, double eps, double theta_s);

/// U0 = phi0^2 - 1, W0 = sqrt(clipped wall energy of the wall traces).
void ieq_aux_init(const SpectralGrid& g, const Field& phi0, double theta_s, Field& U0, WallTrace& W0);

/// Z = clipped' / sqrt(clipped), pointwise.
double Z_of_phi(double phi, double theta_s);
Eigen::VectorXd Z_of_phi(const Eigen::VectorXd& phi, double theta_s);

/// Kinetic, bulk mixing and wall parts of the dimensionless free energy.
EnergyParts total_energy(const SpectralGrid& g, const Field& phi, const Field& u, const Field& w,
                         const SimParams& sp);

}  // namespace mcl
