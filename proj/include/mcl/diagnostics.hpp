#pragma once

#include <array>
#include <optional>
#include <vector>

#include "mcl/chns_core.hpp"

namespace mcl {

/// Ordered polyline of the zero level set. Orientation convention: walking
/// along the points, the phase phi > 0 lies on the left.
struct InterfaceCurve {
  std::vector<Eigen::Vector2d> pts;
  bool closed = false;
  // Wall touched by the first / last point, if any.
  std::optional<Wall> start_wall, end_wall;

  std::vector<double> arc_length() const;
  size_t size() const { return pts.size(); }
};

/// Trigonometric interpolant of periodic samples on [0, lx).
class PeriodicInterpolant {
 public:
  PeriodicInterpolant(const Eigen::VectorXd& samples, double lx);
  double operator()(double x) const;

 private:
  Eigen::VectorXcd c_;
  double lx_;
};

/// Contact-line slots in CSV order: bottom-left, bottom-right, top-left,
/// top-right. "Left" contact lines have phi increasing in x along the wall.
enum ContactSlot { kBL = 0, kBR = 1, kTL = 2, kTR = 3 };

struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  double E_kin = 0.0, E_bulk = 0.0, E_wall = 0.0;
  double divmax = 0.0;
  std::array<double, 4> x_cl{};   // NaN when absent
  std::array<double, 4> theta{};  // degrees, measured inside phi < 0
  std::array<double, 4> v_slip{};  // wall-tangential fluid velocity at the contact line
};

/// Zero level set; endpoints on walls refined by 1D root finding, interior
/// points projected onto phi = 0, spacing kept <= eps/2.
std::vector<InterfaceCurve> extract_interface(const SpectralGrid& g, const Field& phi, double eps);

/// Roots of phi along one wall with the sign of d(phi)/dx there.
struct WallRoot {
  double x;
  int slope;  // +1: phi increasing in x
};
std::vector<WallRoot> wall_roots(const SpectralGrid& g, const Field& phi, Wall w);

/// Angle in (0, pi) inside phi < 0 between the wall and a least-squares line
/// through the curve points whose wall distance lies in [lo, hi].
double dynamic_contact_angle(const InterfaceCurve& c, Wall w, double lo, double hi);

/// Smoothed centred-difference derivative of a sampled series.
std::vector<double> contact_line_velocity(const std::vector<double>& t, const std::vector<double>& x,
                                          int window = 5);

/// Curvature at every point, positive where the phi < 0 region is convex.
std::vector<double> curvature(const InterfaceCurve& c);

/// Symmetric Hausdorff distance between polylines (point-to-segment).
double hausdorff_distance(const InterfaceCurve& a, const InterfaceCurve& b);

/// Band for contact-angle fitting, in units of eps.
struct AngleBand {
  double lo = 1.0;
  double hi = 4.0;
};

DiagnosticsRecord record(const SpectralGrid& g, const FieldState& s, const SimParams& sp, AngleBand band = {});

}  // namespace mcl
