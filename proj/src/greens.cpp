#include "plasmodicke/greens.hpp"

#include <cmath>
#include <stdexcept>

#include "plasmodicke/constants.hpp"

namespace plasmodicke {

namespace {
constexpr Complex kImagUnit{0.0, 1.0};
}

Complex drude_permittivity(const DrudeModel& metal, double omega_eV) {
  if (!(omega_eV > 0.0)) throw std::invalid_argument("omega must be positive");
  const double wp2 = metal.omega_p_eV * metal.omega_p_eV;
  const Complex lorentz = omega_eV * omega_eV + kImagUnit * metal.gamma_p_eV * omega_eV;
  return metal.eps_inf - wp2 / lorentz;
}

Complex multipole_coefficient(int n, Complex eps_m, double eps_d) {
  if (n < 1) throw std::invalid_argument("multipole order must be >= 1");
  const Complex denom = double(n) * eps_m + double(n + 1) * eps_d;
  const double scale = double(n) * std::abs(eps_m) + double(n + 1) * eps_d;
  if (std::abs(denom) < 1e-12 * scale)
    throw std::domain_error("multipole denominator vanishes: lossless LSP resonance");
  return double(n) * (eps_m - eps_d) / denom;
}

Complex free_projection(const Vector3d& r_i, const Vector3d& d_i,
                        const Vector3d& r_j, const Vector3d& d_j, double omega_eV) {
  const double k = wavenumber(omega_eV);
  const Vector3d sep = r_i - r_j;
  const double r = sep.norm();
  if (r < 1e-12) return kImagUnit * k / (6.0 * kPi) * d_i.dot(d_j);

  const Vector3d rhat = sep / r;
  const double x = k * r;
  const Complex phase = std::exp(kImagUnit * x);
  const Complex a = 1.0 + (kImagUnit * x - 1.0) / (x * x);
  const Complex b = (3.0 - 3.0 * kImagUnit * x - x * x) / (x * x);
  const double para = d_i.dot(d_j);
  const double proj = d_i.dot(rhat) * d_j.dot(rhat);
  return phase / (4.0 * kPi * r) * (a * para + b * proj);
}

Complex scattered_projection(const Vector3d& r_i, const Vector3d& d_i,
                             const Vector3d& r_j, const Vector3d& d_j,
                             const NanoSphere& sphere, double omega_eV,
                             int max_multipole, int mode) {
  if (max_multipole < 1) throw std::invalid_argument("max_multipole must be >= 1");
  if (mode < 0 || mode > max_multipole)
    throw std::invalid_argument("mode must be 0 (all) or in [1, max_multipole]");

  const double R = sphere.radius_nm;
  const double a = r_i.norm();
  const double b = r_j.norm();
  if (!(a > R) || !(b > R))
    throw std::invalid_argument("evaluation points must lie outside the sphere");

  const Vector3d xh = r_i / a;
  const Vector3d yh = r_j / b;
  const double t = std::clamp(xh.dot(yh), -1.0, 1.0);
  const double ai = d_i.dot(xh), bi = d_i.dot(yh);
  const double aj = d_j.dot(xh), bj = d_j.dot(yh);
  const double dd = d_i.dot(d_j);

  const auto leg = legendre_table<double>(max_multipole, t);
  const Complex eps_m = drude_permittivity(sphere.metal, omega_eV);

  // Bivariate directional derivative of r_i^-(n+1) r_j^-(n+1) P_n(cos gamma).
  const double q = R * R / (a * b);  // < 1 outside the sphere
  const int n_lo = mode == 0 ? 1 : mode;
  const int n_hi = mode == 0 ? max_multipole : mode;
  Complex sum = 0.0;
  double qpow = std::pow(q, n_lo + 1);
  for (int n = n_lo; n <= n_hi; ++n) {
    qpow *= q;  // q^(n+2)
    const double pn = leg(n, 0), dpn = leg(n, 1), ddpn = leg(n, 2);
    const double np1 = n + 1.0;
    const double bracket = np1 * np1 * ai * bj * pn -
                           np1 * (ai * (aj - t * bj) + bj * (bi - t * ai)) * dpn +
                           (bi - t * ai) * (aj - t * bj) * ddpn +
                           (dd - bi * bj - ai * aj + t * ai * bj) * dpn;
    sum += multipole_coefficient(n, eps_m, sphere.eps_d) * (qpow * bracket);
  }

  const double k = wavenumber(omega_eV);
  return sum / (4.0 * kPi * k * k * sphere.eps_d * R * R * R);
}

Vector3cd effective_dipole(const Emitter& emitter, const NanoSphere& sphere,
                           double omega_eV) {
  const double r = emitter.position_nm.norm();
  if (!(r > sphere.radius_nm))
    throw std::invalid_argument("emitter must lie outside the sphere");
  const Vector3d rhat = emitter.position_nm / r;
  const Complex delta1 =
      multipole_coefficient(1, drude_permittivity(sphere.metal, omega_eV), sphere.eps_d);
  const double f = std::pow(sphere.radius_nm / r, 3);
  const Vector3d image = 3.0 * emitter.orientation.dot(rhat) * rhat - emitter.orientation;
  return emitter.d0 * (emitter.orientation.cast<Complex>() +
                       delta1 * f * image.cast<Complex>());
}

}  // namespace plasmodicke
