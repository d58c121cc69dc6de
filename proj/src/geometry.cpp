#include "plasmodicke/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include "plasmodicke/constants.hpp"

namespace plasmodicke {

namespace {

void check_placement(int count, double h_nm) {
  if (count < 1) throw std::invalid_argument("emitter count must be positive");
  if (h_nm <= 0.0) throw std::invalid_argument("surface distance h must be positive");
}

}  // namespace

EmitterSet place_ring(int count, double h_nm, const std::string& orientation,
                      const NanoSphere& sphere, double omega0_eV, double d0) {
  check_placement(count, h_nm);
  const bool radial = orientation == "radial";
  if (!radial && orientation != "azimuthal")
    throw std::invalid_argument("orientation must be \"radial\" or \"azimuthal\"");

  const double r = sphere.radius_nm + h_nm;
  EmitterSet set;
  set.items.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double phi = 2.0 * kPi * k / count;
    Emitter e;
    e.position_nm = Vector3d(r * std::cos(phi), r * std::sin(phi), 0.0);
    e.orientation = radial ? Vector3d(std::cos(phi), std::sin(phi), 0.0)
                           : Vector3d::UnitZ();
    e.omega0_eV = omega0_eV;
    e.d0 = d0;
    set.items.push_back(e);
  }
  return set;
}

EmitterSet place_polar(int count, double h_nm, const NanoSphere& sphere,
                       double omega0_eV, double d0, double offset_deg) {
  check_placement(count, h_nm);
  const double r = sphere.radius_nm + h_nm;
  const double tilt = offset_deg * kPi / 180.0;
  const int north = (count + 1) / 2;
  const int south = count - north;

  EmitterSet set;
  set.items.reserve(count);
  auto add_pole = [&](int m, double pole_sign) {
    for (int k = 0; k < m; ++k) {
      const double phi = m > 0 ? 2.0 * kPi * k / m : 0.0;
      const double theta = pole_sign > 0 ? tilt : kPi - tilt;
      Vector3d dir(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                   std::cos(theta));
      Emitter e;
      e.position_nm = r * dir;
      e.orientation = dir;  // radial
      e.omega0_eV = omega0_eV;
      e.d0 = d0;
      set.items.push_back(e);
    }
  };
  add_pole(north, +1.0);
  add_pole(south, -1.0);
  return set;
}

EmitterSet place_pair(double theta_rad, double h_nm, const std::string& orientation,
                      const NanoSphere& sphere, double omega0_eV, double d0) {
  check_placement(2, h_nm);
  const bool radial = orientation == "radial";
  if (!radial && orientation != "azimuthal")
    throw std::invalid_argument("orientation must be \"radial\" or \"azimuthal\"");

  const double r = sphere.radius_nm + h_nm;
  EmitterSet set;
  for (double theta : {0.0, theta_rad}) {
    Vector3d dir(std::sin(theta), 0.0, std::cos(theta));
    Emitter e;
    e.position_nm = r * dir;
    e.orientation = radial ? dir : Vector3d::UnitY();
    e.omega0_eV = omega0_eV;
    e.d0 = d0;
    set.items.push_back(e);
  }
  return set;
}

std::vector<std::string> validate(const SystemConfig& config) {
  std::vector<std::string> problems;
  const auto& s = config.sphere;
  const auto& m = s.metal;

  if (!(m.eps_inf >= 1.0)) problems.push_back("metal.eps_inf must be >= 1");
  if (!(m.omega_p_eV > 0.0)) problems.push_back("metal.omega_p_eV must be positive");
  if (!(m.gamma_p_eV > 0.0)) problems.push_back("metal.gamma_p_eV must be positive");
  if (!(s.radius_nm > 0.0)) problems.push_back("sphere.radius_nm must be positive");
  if (!(s.eps_d >= 1.0)) problems.push_back("sphere.eps_d must be >= 1");

  const auto& emitters = config.emitters.items;
  if (emitters.empty()) problems.push_back("emitter set is empty");
  for (size_t i = 0; i < emitters.size(); ++i) {
    const auto& e = emitters[i];
    const std::string tag = "emitter " + std::to_string(i);
    if (!(e.position_nm.norm() > s.radius_nm))
      problems.push_back(tag + " lies inside or on the sphere surface");
    if (std::abs(e.orientation.norm() - 1.0) > 1e-12)
      problems.push_back(tag + " orientation is not a unit vector");
    if (!(e.omega0_eV > 0.0)) problems.push_back(tag + " omega0_eV must be positive");
    if (!(e.d0 > 0.0)) problems.push_back(tag + " d0 must be positive");
  }

  const auto& c = config.controls;
  if (c.max_multipole < 1) problems.push_back("controls.max_multipole must be >= 1");
  if (!(c.fit_window_eV > 0.0)) problems.push_back("controls.fit_window_eV must be positive");
  if (c.fit_samples < 5) problems.push_back("controls.fit_samples must be >= 5");
  if (!(c.time_step_factor > 0.0))
    problems.push_back("controls.time_step_factor must be positive");
  if (!(c.eigen_tolerance > 0.0))
    problems.push_back("controls.eigen_tolerance must be positive");
  return problems;
}

}  // namespace plasmodicke
