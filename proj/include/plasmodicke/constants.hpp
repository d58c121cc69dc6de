#pragma once

// Unit system: energies in eV, lengths in nm, hbar = 1, epsilon_0 = 1.
// With hbar = 1 the speed of light carries hbar*c in eV*nm, so k = omega / c
// comes out in 1/nm and rates are energies.

namespace plasmodicke {

inline constexpr double kLightSpeed = 197.3269804;  // eV * nm
inline constexpr double kPi = 3.14159265358979323846;

// Free-space decay rate of a unit dipole, omega^3 d0^2 / (3 pi c^3).
inline constexpr double free_space_rate(double omega_eV, double d0 = 1.0) {
  return omega_eV * omega_eV * omega_eV * d0 * d0 /
         (3.0 * kPi * kLightSpeed * kLightSpeed * kLightSpeed);
}

inline constexpr double wavenumber(double omega_eV) { return omega_eV / kLightSpeed; }

}  // namespace plasmodicke
