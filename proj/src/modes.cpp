#include "plasmodicke/modes.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "plasmodicke/constants.hpp"
#include "plasmodicke/errors.hpp"

namespace plasmodicke {

namespace {

// Closed-form pole of Delta_n for a lossy Drude metal in host eps_d:
// omega = sqrt(omega_p^2 n / (n eps_inf + (n+1) eps_d) - gamma_p^2/4) - i gamma_p/2.
// The real part anchors the fit window.
double drude_pole_center(int n, const NanoSphere& sphere) {
  const DrudeModel& m = sphere.metal;
  const double big_omega_sq =
      m.omega_p_eV * m.omega_p_eV * n / (n * m.eps_inf + (n + 1) * sphere.eps_d);
  const double disc = big_omega_sq - 0.25 * m.gamma_p_eV * m.gamma_p_eV;
  if (disc <= 0.0) {
    throw convergence_error("multipole order " + std::to_string(n) +
                            ": Drude pole is overdamped, no resonance center");
  }
  return std::sqrt(disc);
}

}  // namespace

LSPMode find_resonance(int n, const NanoSphere& sphere, const NumericalControls& controls) {
  if (n < 1) throw std::invalid_argument("multipole order must be >= 1");
  const int samples = std::max(controls.fit_samples, 8);
  const double center0 = drude_pole_center(n, sphere);
  const double window = controls.fit_window_eV;

  // Sample the mode spectrum Im Delta_n(omega) across the window.
  VectorXd delta(samples), y(samples);
  for (int i = 0; i < samples; ++i) {
    const double d = -window + 2.0 * window * i / (samples - 1);
    const double omega = std::max(center0 + d, 1e-6);
    const Complex eps_m = drude_permittivity(sphere.metal, omega);
    delta(i) = omega - center0;
    y(i) = std::imag(multipole_coefficient(n, eps_m, sphere.eps_d));
  }

  // Rational least squares, y ~ (c0 + c1 d) / (d^2 + d1 d + d0), linearized as
  // c0 + c1 d - y d1 d - y d0 = y d^2. Exact for a simple-pole spectrum, so the
  // recovered center is free of the skew bias a symmetric-Lorentzian fit picks
  // up from the slowly varying numerator.
  MatrixXd A(samples, 4);
  VectorXd b(samples);
  for (int i = 0; i < samples; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = delta(i);
    A(i, 2) = -y(i) * delta(i);
    A(i, 3) = -y(i);
    b(i) = y(i) * delta(i) * delta(i);
  }
  const Eigen::Vector4d x = A.colPivHouseholderQr().solve(b);
  const double d1 = x(2), d0 = x(3);
  const double disc = d0 - 0.25 * d1 * d1;
  if (!std::isfinite(disc) || disc <= 0.0) {
    throw convergence_error("multipole order " + std::to_string(n) +
                            ": resonance fit produced a degenerate denominator");
  }

  LSPMode mode;
  mode.n = n;
  mode.omega_n_eV = center0 - 0.5 * d1;
  mode.gamma_n_eV = 2.0 * std::sqrt(disc);

  double misfit = 0.0, scale = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double denom = delta(i) * delta(i) + d1 * delta(i) + d0;
    const double fit = (x(0) + x(1) * delta(i)) / denom;
    misfit += (fit - y(i)) * (fit - y(i));
    scale += y(i) * y(i);
  }
  mode.fit_residual = std::sqrt(misfit / scale);
  return mode;
}

double coupling_strength(const LSPMode& mode, const Emitter& emitter,
                         const NanoSphere& sphere, int max_multipole) {
  const Complex self = scattered_projection(emitter.position_nm, emitter.orientation,
                                            emitter.position_nm, emitter.orientation,
                                            sphere, mode.omega_n_eV, max_multipole, mode.n);
  const double im_self = std::imag(self);
  if (im_self <= 0.0) {
    throw invariant_error("mode " + std::to_string(mode.n) +
                          ": emitter self-response must be positive");
  }
  const double c = kLightSpeed;
  const double spectral_density = mode.omega_n_eV * mode.omega_n_eV / (kPi * c * c) *
                                  im_self * emitter.d0 * emitter.d0;
  return std::sqrt(0.5 * kPi * mode.gamma_n_eV * spectral_density);
}

OverlapMatrix overlap(const LSPMode& mode, const EmitterSet& emitters,
                      const NanoSphere& sphere, int max_multipole) {
  const int n_e = emitters.size();
  VectorXd self(n_e);
  for (int j = 0; j < n_e; ++j) {
    const Emitter& e = emitters.items[j];
    const Complex proj = scattered_projection(e.position_nm, e.orientation, e.position_nm,
                                              e.orientation, sphere, mode.omega_n_eV,
                                              max_multipole, mode.n);
    self(j) = std::imag(proj);
    if (self(j) <= 0.0) {
      throw invariant_error("mode " + std::to_string(mode.n) +
                            ": emitter self-response must be positive");
    }
  }

  OverlapMatrix result;
  result.n = mode.n;
  result.mu = MatrixXd::Identity(n_e, n_e);
  for (int j = 0; j < n_e; ++j) {
    for (int k = j + 1; k < n_e; ++k) {
      const Emitter& ej = emitters.items[j];
      const Emitter& ek = emitters.items[k];
      const Complex proj = scattered_projection(ej.position_nm, ej.orientation, ek.position_nm,
                                                ek.orientation, sphere, mode.omega_n_eV,
                                                max_multipole, mode.n);
      const double mu = std::imag(proj) / std::sqrt(self(j) * self(k));
      result.mu(j, k) = mu;
      result.mu(k, j) = mu;
    }
  }
  return result;
}

LowdinTransform lowdin(const OverlapMatrix& overlap, const VectorXd& g) {
  const int n_e = static_cast<int>(overlap.mu.rows());
  if (g.size() != n_e) throw std::invalid_argument("coupling vector size mismatch");

  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(overlap.mu);
  if (solver.info() != Eigen::Success) {
    throw convergence_error("overlap eigendecomposition failed");
  }
  VectorXd lambda = solver.eigenvalues().reverse();
  MatrixXd vectors = solver.eigenvectors().rowwise().reverse();

  const double lambda_max = std::max(lambda(0), 0.0);
  if (lambda(n_e - 1) < -1e-10 * std::max(lambda_max, 1.0)) {
    throw invariant_error("overlap matrix has a negative eigenvalue: " +
                          std::to_string(lambda(n_e - 1)));
  }

  int kept = 0;
  while (kept < n_e && lambda(kept) > 1e-10 * lambda_max) ++kept;

  LowdinTransform result;
  result.eigenvalues = lambda;
  result.transform = vectors;
  result.cross.resize(n_e, kept);
  for (int i = 0; i < kept; ++i) {
    const double root = std::sqrt(std::max(lambda(i), 0.0));
    for (int j = 0; j < n_e; ++j) {
      result.cross(j, i) = g(j) * root * vectors(j, i);
    }
  }
  return result;
}

double weak_coupling_ratio(const std::vector<ModeData>& modes, double omega0_eV) {
  double total = 0.0;
  for (const ModeData& m : modes) {
    const double detuning = omega0_eV - m.mode.omega_n_eV;
    const double half_width = 0.5 * m.mode.gamma_n_eV;
    total += m.g.squaredNorm() / (detuning * detuning + half_width * half_width);
  }
  return std::sqrt(total);
}

std::vector<ModeData> mode_decomposition(const SystemConfig& config) {
  std::vector<ModeData> result;
  const int n_max = config.controls.max_multipole;
  result.reserve(n_max);
  for (int n = 1; n <= n_max; ++n) {
    ModeData data;
    data.mode = find_resonance(n, config.sphere, config.controls);
    data.g.resize(config.emitters.size());
    for (int j = 0; j < config.emitters.size(); ++j) {
      data.g(j) = coupling_strength(data.mode, config.emitters.items[j], config.sphere, n_max);
    }
    data.mu = overlap(data.mode, config.emitters, config.sphere, n_max).mu;
    result.push_back(std::move(data));
  }
  return result;
}

}  // namespace plasmodicke
