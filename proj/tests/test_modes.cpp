#include <doctest.h>

#include <cmath>

#include "plasmodicke/constants.hpp"
#include "plasmodicke/errors.hpp"
#include "plasmodicke/geometry.hpp"
#include "plasmodicke/modes.hpp"

using namespace plasmodicke;

namespace {

SystemConfig azimuthal_ring() {
  SystemConfig config;
  config.emitters = place_ring(6, 20.0, "azimuthal", config.sphere, 2.77);
  return config;
}

}  // namespace

TEST_SUITE("modes") {

TEST_CASE("dipole resonance lands on the closed-form Drude pole") {
  // sqrt(omega_p^2 n / (n eps_inf + (n+1) eps_d) - gamma_p^2 / 4) for n = 1
  // evaluates to 2.7929553792 eV with the default silver parameters.
  NanoSphere sphere;
  NumericalControls controls;
  const LSPMode mode = find_resonance(1, sphere, controls);
  CHECK(mode.n == 1);
  CHECK(std::abs(mode.omega_n_eV - 2.7929553792) < 1e-4);
  CHECK(mode.gamma_n_eV == doctest::Approx(sphere.metal.gamma_p_eV).epsilon(0.05));
  CHECK(mode.fit_residual < 0.05);
}

TEST_CASE("high-order resonances approach the planar limit") {
  // n = 400 closed form: 2.9852773722 eV; n -> inf: 2.9858104487 eV.
  NanoSphere sphere;
  NumericalControls controls;
  const LSPMode mode = find_resonance(400, sphere, controls);
  CHECK(std::abs(mode.omega_n_eV - 2.9852773722) < 5e-4);
  CHECK(mode.omega_n_eV < 2.9858104487 + 1e-3);
  const LSPMode low = find_resonance(1, sphere, controls);
  CHECK(low.omega_n_eV < mode.omega_n_eV);
}

TEST_CASE("overdamped metal has no underdamped pole to fit") {
  NanoSphere sphere;
  sphere.metal.omega_p_eV = 0.001;
  sphere.metal.gamma_p_eV = 0.5;
  NumericalControls controls;
  CHECK_THROWS_AS(find_resonance(1, sphere, controls), convergence_error);
}

TEST_CASE("coupling strength scales linearly with the dipole magnitude") {
  NanoSphere sphere;
  NumericalControls controls;
  const LSPMode mode = find_resonance(1, sphere, controls);
  Emitter e;
  e.position_nm = Vector3d(0.0, 0.0, 35.0);
  e.orientation = Vector3d(0.0, 0.0, 1.0);
  const double g1 = coupling_strength(mode, e, sphere, 25);
  CHECK(g1 > 0.0);
  e.d0 = 2.0;
  CHECK(coupling_strength(mode, e, sphere, 25) == doctest::Approx(2.0 * g1).epsilon(1e-12));
}

TEST_CASE("facing radial pair overlaps alternate in sign with mode order") {
  NanoSphere sphere;
  NumericalControls controls;
  EmitterSet pair = place_pair(kPi, 20.0, "radial", sphere, 2.771);
  for (int n = 1; n <= 6; ++n) {
    const LSPMode mode = find_resonance(n, sphere, controls);
    const OverlapMatrix mu = overlap(mode, pair, sphere, 25);
    CHECK(mu.mu(0, 0) == 1.0);
    CHECK(mu.mu(1, 1) == 1.0);
    CHECK(mu.mu(0, 1) == doctest::Approx(n % 2 == 0 ? 1.0 : -1.0).epsilon(1e-10));
    CHECK(mu.mu(0, 1) == mu.mu(1, 0));
  }
}

TEST_CASE("overlap matrices are positive semidefinite gram matrices") {
  const SystemConfig config = azimuthal_ring();
  NumericalControls controls;
  for (int n : {1, 2, 5}) {
    const LSPMode mode = find_resonance(n, config.sphere, controls);
    const OverlapMatrix mu = overlap(mode, config.emitters, config.sphere, 25);
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(mu.mu);
    CHECK(solver.eigenvalues().minCoeff() > -1e-10);
    for (int j = 0; j < 6; ++j) CHECK(mu.mu(j, j) == 1.0);
  }
}

TEST_CASE("loewdin factorization reproduces the weighted overlap") {
  const SystemConfig config = azimuthal_ring();
  NumericalControls controls;
  const LSPMode mode = find_resonance(1, config.sphere, controls);
  const OverlapMatrix mu = overlap(mode, config.emitters, config.sphere, 25);
  VectorXd g(6);
  for (int j = 0; j < 6; ++j)
    g(j) = coupling_strength(mode, config.emitters.items[j], config.sphere, 25);

  const LowdinTransform lowdin_result = lowdin(mu, g);
  for (int i = 1; i < lowdin_result.eigenvalues.size(); ++i)
    CHECK(lowdin_result.eigenvalues(i) <= lowdin_result.eigenvalues(i - 1) + 1e-14);
  CHECK(lowdin_result.eigenvalues.minCoeff() > -1e-12);

  const MatrixXd identity_check =
      lowdin_result.transform.transpose() * lowdin_result.transform;
  CHECK((identity_check - MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-12);

  const MatrixXd target = (g * g.transpose()).cwiseProduct(mu.mu);
  const MatrixXd rebuilt = lowdin_result.cross * lowdin_result.cross.transpose();
  CHECK((rebuilt - target).cwiseAbs().maxCoeff() < 1e-10 * target.cwiseAbs().maxCoeff());
}

TEST_CASE("mode decomposition covers n = 1..max_multipole in order") {
  SystemConfig config = azimuthal_ring();
  config.controls.max_multipole = 8;
  const std::vector<ModeData> modes = mode_decomposition(config);
  REQUIRE(modes.size() == 8);
  for (int n = 1; n <= 8; ++n) {
    CHECK(modes[n - 1].mode.n == n);
    CHECK(modes[n - 1].g.size() == 6);
    CHECK(modes[n - 1].mu.rows() == 6);
    if (n > 1) CHECK(modes[n - 1].mode.omega_n_eV > modes[n - 2].mode.omega_n_eV);
    CHECK(modes[n - 1].mode.gamma_n_eV ==
          doctest::Approx(config.sphere.metal.gamma_p_eV).epsilon(0.05));
  }
}

TEST_CASE("ring at 20 nm sits in the weak-coupling regime") {
  const SystemConfig config = azimuthal_ring();
  const std::vector<ModeData> modes = mode_decomposition(config);
  const double ratio = weak_coupling_ratio(modes, 2.77);
  CHECK(ratio > 0.0);
  CHECK(ratio < 1.0);         // adiabatic elimination of the plasmons is justified
  CHECK(ratio > 0.01);        // but the coupling is not negligible
  CHECK(ratio < 0.04);
}

}  // TEST_SUITE
