#pragma once

#include <Eigen/Dense>
#include <vector>

#include "plasmodicke/geometry.hpp"
#include "plasmodicke/greens.hpp"

namespace plasmodicke {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// One LSP multipole treated as a lossy harmonic mode.
struct LSPMode {
  int n = 1;
  double omega_n_eV = 0.0;  // Lorentzian center of Im Delta_n
  double gamma_n_eV = 0.0;  // full width at half maximum
  double fit_residual = 0.0;  // relative L2 misfit over the sample window
};

// Per-emitter coupling strengths to one mode, g in eV (hbar = 1).
struct CouplingSet {
  LSPMode mode;
  VectorXd g;
};

// mu_n^(jk) = Im cross / sqrt(Im self_j Im self_k); symmetric, unit diagonal,
// positive semidefinite (it is a Gram matrix of mode-field gradients).
struct OverlapMatrix {
  int n = 1;
  MatrixXd mu;
};

// Loewdin-orthogonalized couplings: mu = T diag(lambda) T^T with nonnegative
// lambda; cross(j, i) = g_j sqrt(lambda_i) T(j, i) reproduces
// sum_i cross(j, i) cross(k, i) = g_j g_k mu_jk.
struct LowdinTransform {
  VectorXd eigenvalues;  // descending, near-zero ones dropped from cross
  MatrixXd transform;    // orthogonal, columns match eigenvalues
  MatrixXd cross;        // emitters x kept-eigenmodes
};

// Bundle consumed by the rate-matrix builders.
struct ModeData {
  LSPMode mode;
  VectorXd g;
  MatrixXd mu;
};

// Center and width of Im Delta_n, from a rational least-squares fit of the
// sampled spectrum around the closed-form Drude pole.
LSPMode find_resonance(int n, const NanoSphere& sphere, const NumericalControls& controls);

// Spectral-density coupling g = sqrt(pi gamma_n J_n(omega_n) / 2) with
// J_n = (omega^2 / pi c^2) Im[d . G_n(r, r, omega) . d] d0^2.
double coupling_strength(const LSPMode& mode, const Emitter& emitter,
                         const NanoSphere& sphere, int max_multipole);

OverlapMatrix overlap(const LSPMode& mode, const EmitterSet& emitters,
                      const NanoSphere& sphere, int max_multipole);

LowdinTransform lowdin(const OverlapMatrix& overlap, const VectorXd& g);

// sqrt(sum_n sum_i g_{n,i}^2 / (delta_n^2 + (gamma_n/2)^2)); << 1 justifies
// adiabatic elimination of the plasmon modes.
double weak_coupling_ratio(const std::vector<ModeData>& modes, double omega0_eV);

// find_resonance + coupling_strength + overlap for n = 1..max_multipole.
std::vector<ModeData> mode_decomposition(const SystemConfig& config);

}  // namespace plasmodicke
