#include <doctest.h>

#include <cmath>
#include <random>

#include "plasmodicke/constants.hpp"
#include "plasmodicke/greens.hpp"

using namespace plasmodicke;

namespace {

// Independent oracle for the scattered projection: the image potential
// kernel K(x, y) = sum_n Delta_n R^(2n+1) P_n(x_hat . y_hat) / (|x||y|)^(n+1)
// differentiated along both dipole directions with central differences.
Complex potential_kernel(const Vector3d& x, const Vector3d& y, const NanoSphere& sphere,
                         double omega_eV, int n_max) {
  const double a = x.norm();
  const double b = y.norm();
  const double t = std::clamp(x.dot(y) / (a * b), -1.0, 1.0);
  const auto leg = legendre_table<double>(n_max, t);
  const Complex eps_m = drude_permittivity(sphere.metal, omega_eV);
  Complex sum = 0.0;
  for (int n = 1; n <= n_max; ++n)
    sum += multipole_coefficient(n, eps_m, sphere.eps_d) *
           std::pow(sphere.radius_nm, 2 * n + 1) /
           (std::pow(a, n + 1) * std::pow(b, n + 1)) * leg(n, 0);
  return sum;
}

Complex fd_scattered(const Vector3d& x, const Vector3d& di, const Vector3d& y,
                     const Vector3d& dj, const NanoSphere& sphere, double omega_eV,
                     int n_max) {
  const double h = 1e-3;
  const Complex pp = potential_kernel(x + h * di, y + h * dj, sphere, omega_eV, n_max);
  const Complex pm = potential_kernel(x + h * di, y - h * dj, sphere, omega_eV, n_max);
  const Complex mp = potential_kernel(x - h * di, y + h * dj, sphere, omega_eV, n_max);
  const Complex mm = potential_kernel(x - h * di, y - h * dj, sphere, omega_eV, n_max);
  const Complex second = (pp - pm - mp + mm) / (4.0 * h * h);
  const double k = wavenumber(omega_eV);
  return second / (4.0 * kPi * k * k * sphere.eps_d);
}

}  // namespace

TEST_SUITE("greens") {

TEST_CASE("drude permittivity matches the frozen reference point") {
  DrudeModel metal;  // eps_inf 6, omega_p 7.90 eV, gamma_p 0.051 eV
  const Complex eps = drude_permittivity(metal, 2.77);
  CHECK(eps.real() == doctest::Approx(-2.13106532068721).epsilon(1e-12));
  CHECK(eps.imag() == doctest::Approx(0.149705534785216).epsilon(1e-12));
  for (double omega : {0.5, 1.7, 2.9, 5.0, 12.0})
    CHECK(drude_permittivity(metal, omega).imag() > 0.0);
  CHECK_THROWS_AS(drude_permittivity(metal, 0.0), std::invalid_argument);
}

TEST_CASE("multipole coefficients match the frozen reference points") {
  DrudeModel metal;
  const Complex eps = drude_permittivity(metal, 2.77);
  const Complex d1 = multipole_coefficient(1, eps, 1.0);
  const Complex d2 = multipole_coefficient(2, eps, 1.0);
  const Complex d3 = multipole_coefficient(3, eps, 1.0);
  CHECK(d1.real() == doctest::Approx(10.9317327242577).epsilon(1e-12));
  CHECK(d1.imag() == doctest::Approx(11.3442316474943).epsilon(1e-12));
  CHECK(d2.real() == doctest::Approx(4.75049055325398).epsilon(1e-12));
  CHECK(d2.imag() == doctest::Approx(0.889716445470915).epsilon(1e-12));
  CHECK(d3.real() == doctest::Approx(3.82545285757643).epsilon(1e-12));
  CHECK(d3.imag() == doctest::Approx(0.53023564023923).epsilon(1e-12));
  CHECK_THROWS_AS(multipole_coefficient(0, eps, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(multipole_coefficient(1, Complex(-2.0, 0.0), 1.0), std::domain_error);
}

TEST_CASE("legendre derivative recurrences stay finite at the endpoints") {
  const auto at_one = legendre_table<double>(25, 1.0);
  CHECK(at_one(25, 0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(at_one(25, 1) == doctest::Approx(325.0).epsilon(1e-13));      // n(n+1)/2
  CHECK(at_one(25, 2) == doctest::Approx(52650.0).epsilon(1e-13));    // (n-1)n(n+1)(n+2)/8
  const auto at_minus = legendre_table<double>(25, -1.0);
  CHECK(at_minus(25, 0) == doctest::Approx(-1.0).epsilon(1e-13));     // (-1)^n
  CHECK(at_minus(24, 0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(at_minus(25, 1) == doctest::Approx(325.0).epsilon(1e-13));    // (-1)^(n-1) n(n+1)/2
  for (int n = 0; n <= 50; ++n)
    for (double t : {-1.0, -0.6, 0.0, 0.3, 0.99, 1.0})
      CHECK(std::abs(legendre_table<double>(50, t)(n, 0)) <= 1.0 + 1e-12);
}

TEST_CASE("legendre derivatives agree with central differences") {
  const double t = 0.3;
  const double h = 1e-6;
  const auto mid = legendre_table<double>(20, t);
  const auto up = legendre_table<double>(20, t + h);
  const auto down = legendre_table<double>(20, t - h);
  for (int n = 1; n <= 20; ++n) {
    CHECK(mid(n, 1) == doctest::Approx((up(n, 0) - down(n, 0)) / (2.0 * h)).epsilon(1e-6));
    CHECK(mid(n, 2) == doctest::Approx((up(n, 1) - down(n, 1)) / (2.0 * h)).epsilon(1e-6));
  }
}

TEST_CASE("coincident free-space projection gives the renormalized imaginary part") {
  const Vector3d r(0.0, 0.0, 35.0);
  const Vector3d d(0.0, 0.0, 1.0);
  const Complex self = free_projection(r, d, r, d, 2.77);
  const double k = wavenumber(2.77);
  CHECK(k == doctest::Approx(1.4037614088e-2).epsilon(1e-10));
  CHECK(self.real() == 0.0);
  // (6 pi / k) Im is exactly the free-space rate normalization
  CHECK(6.0 * kPi / k * self.imag() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("free-space cross projection matches the frozen facing-pair value") {
  const Vector3d top(0.0, 0.0, 35.0), bottom(0.0, 0.0, -35.0);
  const Vector3d up(0.0, 0.0, 1.0), down(0.0, 0.0, -1.0);
  const Complex cross = free_projection(top, up, bottom, down, 2.771);
  CHECK(cross.real() == doctest::Approx(-0.0032296156022075).epsilon(1e-10));
  CHECK(cross.imag() == doctest::Approx(-0.000675442106596975).epsilon(1e-10));
  const double k = wavenumber(2.771);
  CHECK(6.0 * kPi / k * cross.imag() == doctest::Approx(-0.9066490236).epsilon(1e-9));
}

TEST_CASE("scattered projection matches the finite-difference potential oracle") {
  NanoSphere sphere;
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> radius(sphere.radius_nm + 4.0, sphere.radius_nm + 40.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> omega(2.5, 3.05);
  auto random_direction = [&] {
    Vector3d v;
    do
      v = Vector3d(unit(rng), unit(rng), unit(rng));
    while (v.norm() < 0.2);
    return Vector3d(v.normalized());
  };
  const int n_max = 8;
  for (int rep = 0; rep < 20; ++rep) {
    const Vector3d x = radius(rng) * random_direction();
    const Vector3d y = radius(rng) * random_direction();
    const Vector3d di = random_direction();
    const Vector3d dj = random_direction();
    const double w = omega(rng);
    const Complex got = scattered_projection(x, di, y, dj, sphere, w, n_max);
    const Complex want = fd_scattered(x, di, y, dj, sphere, w, n_max);
    CHECK(std::abs(got - want) <= 5e-6 * std::abs(want) + 1e-18);
  }
}

TEST_CASE("scattered projection is reciprocal") {
  NanoSphere sphere;
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> radius(17.0, 60.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto random_direction = [&] {
    Vector3d v;
    do
      v = Vector3d(unit(rng), unit(rng), unit(rng));
    while (v.norm() < 0.2);
    return Vector3d(v.normalized());
  };
  for (int rep = 0; rep < 20; ++rep) {
    const Vector3d x = radius(rng) * random_direction();
    const Vector3d y = radius(rng) * random_direction();
    const Vector3d di = random_direction();
    const Vector3d dj = random_direction();
    const Complex ij = scattered_projection(x, di, y, dj, sphere, 2.77, 25);
    const Complex ji = scattered_projection(y, dj, x, di, sphere, 2.77, 25);
    CHECK(std::abs(ij - ji) <= 1e-12 * std::abs(ij));
  }
}

TEST_CASE("single-mode projections sum to the full scattered projection") {
  NanoSphere sphere;
  const Vector3d x(0.0, 0.0, 17.0);
  const Vector3d y(12.0, 0.0, 12.0);
  const Vector3d di = Vector3d(1.0, 2.0, 0.5).normalized();
  const Vector3d dj = Vector3d(-0.3, 1.0, 0.8).normalized();
  Complex sum = 0.0;
  for (int n = 1; n <= 12; ++n)
    sum += scattered_projection(x, di, y, dj, sphere, 2.9, 12, n);
  const Complex all = scattered_projection(x, di, y, dj, sphere, 2.9, 12, 0);
  CHECK(std::abs(sum - all) <= 1e-12 * std::abs(all));
}

TEST_CASE("self projection has positive imaginary part in the absorbing metal") {
  NanoSphere sphere;
  for (double omega : {2.6, 2.77, 2.9, 3.0}) {
    const Vector3d r(0.0, 0.0, 17.0);
    for (const Vector3d& d : {Vector3d::UnitZ().eval(), Vector3d::UnitX().eval()})
      CHECK(scattered_projection(r, d, r, d, sphere, omega, 25).imag() > 0.0);
  }
}

TEST_CASE("evaluation points must lie outside the sphere") {
  NanoSphere sphere;
  const Vector3d out(0.0, 0.0, 20.0), in(0.0, 0.0, 10.0);
  const Vector3d d = Vector3d::UnitZ();
  CHECK_THROWS_AS(scattered_projection(in, d, out, d, sphere, 2.77, 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(scattered_projection(out, d, out, d, sphere, 2.77, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(scattered_projection(out, d, out, d, sphere, 2.77, 10, 11),
                  std::invalid_argument);
}

TEST_CASE("effective dipole combines the bare dipole with the image dipole") {
  NanoSphere sphere;
  const Complex delta1(10.9317327242577, 11.3442316474943);  // frozen at 2.77 eV
  const double f = std::pow(15.0 / 35.0, 3);

  Emitter radial;
  radial.position_nm = Vector3d(0.0, 0.0, 35.0);
  radial.orientation = Vector3d(0.0, 0.0, 1.0);
  const Vector3cd dr = effective_dipole(radial, sphere, 2.77);
  CHECK(std::abs(dr(2) - (1.0 + 2.0 * f * delta1)) < 1e-10);

  Emitter azimuthal = radial;
  azimuthal.orientation = Vector3d(1.0, 0.0, 0.0);
  const Vector3cd da = effective_dipole(azimuthal, sphere, 2.77);
  CHECK(std::abs(da(0) - (1.0 - f * delta1)) < 1e-10);
  CHECK(std::abs(da(2)) < 1e-14);
}

}  // TEST_SUITE
