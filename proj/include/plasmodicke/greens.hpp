#pragma once

#include <Eigen/Dense>
#include <complex>

#include "plasmodicke/geometry.hpp"

namespace plasmodicke {

using Complex = std::complex<double>;
using Eigen::Vector3cd;

// eps(omega) = eps_inf - omega_p^2 / (omega^2 + i gamma_p omega); Im >= 0.
Complex drude_permittivity(const DrudeModel& metal, double omega_eV);

// Quasi-static multipole response Delta_n = n (eps_m - eps_d) / (n eps_m + (n+1) eps_d).
// Throws std::domain_error when the denominator vanishes (lossless resonance).
Complex multipole_coefficient(int n, Complex eps_m, double eps_d);

// P_n, P_n', P_n'' for n = 0..n_max, one row per order. The derivative
// recurrences P'_{n+1} = P'_{n-1} + (2n+1) P_n (and its derivative) stay
// finite at t = +-1 where the (t^2-1) quotient forms blow up.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 3> legendre_table(int n_max, Scalar t) {
  Eigen::Array<Scalar, Eigen::Dynamic, 3> table(n_max + 1, 3);
  table.setZero();
  table(0, 0) = Scalar(1);
  if (n_max == 0) return table;
  table(1, 0) = t;
  table(1, 1) = Scalar(1);
  for (int n = 1; n < n_max; ++n) {
    const Scalar c = Scalar(2 * n + 1);
    table(n + 1, 0) = (c * t * table(n, 0) - Scalar(n) * table(n - 1, 0)) / Scalar(n + 1);
    table(n + 1, 1) = table(n - 1, 1) + c * table(n, 0);
    table(n + 1, 2) = table(n - 1, 2) + c * table(n, 1);
  }
  return table;
}

// Projection d_i . G(r_i, r_j, omega) . d_j for unit orientation vectors, in
// the convention E(r) = (omega^2 / eps_0 c^2) G . d, so G has units 1/nm.

// Retarded free-space dyadic. Coincident points return the renormalized value
// i k / 6 pi (the divergent real part is absorbed into the transition energy).
Complex free_projection(const Vector3d& r_i, const Vector3d& d_i,
                        const Vector3d& r_j, const Vector3d& d_j, double omega_eV);

// Sphere-scattered part from the multipole expansion of the image potential,
// mode = 0 sums n = 1..max_multipole, mode = n keeps a single multipole.
// Both points must lie outside the sphere.
Complex scattered_projection(const Vector3d& r_i, const Vector3d& d_i,
                             const Vector3d& r_j, const Vector3d& d_j,
                             const NanoSphere& sphere, double omega_eV,
                             int max_multipole, int mode = 0);

// d0 (d_hat + Delta_1 R^3 (3 (d_hat . r_hat) r_hat - d_hat) / r^3): the bare
// dipole plus the image dipole induced in the sphere, which is what radiates
// to the far field in the quasi-static picture.
Vector3cd effective_dipole(const Emitter& emitter, const NanoSphere& sphere,
                           double omega_eV);

}  // namespace plasmodicke
