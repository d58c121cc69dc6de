#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace plasmodicke {

using Eigen::Vector3d;

// Drude metal, eps(omega) = eps_inf - omega_p^2 / (omega^2 + i gamma_p omega).
struct DrudeModel {
  double eps_inf = 6.0;
  double omega_p_eV = 7.90;
  double gamma_p_eV = 0.051;
};

struct NanoSphere {
  double radius_nm = 15.0;
  double eps_d = 1.0;  // host permittivity, real
  DrudeModel metal;
};

// A two-level emitter outside the sphere. orientation is a unit vector,
// position is measured from the sphere center and must satisfy |r| > radius.
struct Emitter {
  Vector3d position_nm = Vector3d::Zero();
  Vector3d orientation = Vector3d::UnitZ();
  double omega0_eV = 2.77;
  double d0 = 1.0;  // dipole magnitude, arbitrary units
};

struct EmitterSet {
  std::vector<Emitter> items;
  int size() const { return static_cast<int>(items.size()); }
};

struct NumericalControls {
  int max_multipole = 25;
  double fit_window_eV = 0.153;  // half width of the Lorentzian fit window
  int fit_samples = 121;
  double time_step_factor = 0.01;
  double eigen_tolerance = 1e-9;
};

struct SystemConfig {
  NanoSphere sphere;
  EmitterSet emitters;
  NumericalControls controls;
};

// Equally spaced ring on the equator at radius R + h. "radial" orients every
// dipole along +r_hat; "azimuthal" orients them along the polar axis, i.e.
// tangent to the dipolar LSP field lines at the equator.
EmitterSet place_ring(int count, double h_nm, const std::string& orientation,
                      const NanoSphere& sphere, double omega0_eV, double d0 = 1.0);

// ceil(n/2) emitters near the north pole, the rest near the south pole, each
// tilted off its pole by offset_deg (default 1 deg) and fanned in azimuth so
// all positions are distinct. Orientation is radial.
EmitterSet place_polar(int count, double h_nm, const NanoSphere& sphere,
                       double omega0_eV, double d0 = 1.0, double offset_deg = 1.0);

// Two emitters at radius R + h separated by theta on a great circle through
// the poles. "radial" points along r_hat; "azimuthal" points along the common
// normal of the circle plane, keeping both dipoles parallel.
EmitterSet place_pair(double theta_rad, double h_nm, const std::string& orientation,
                      const NanoSphere& sphere, double omega0_eV, double d0 = 1.0);

// Diagnostics, one string per violated invariant. Empty means valid.
std::vector<std::string> validate(const SystemConfig& config);

}  // namespace plasmodicke
