#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "plasmodicke/geometry.hpp"
#include "plasmodicke/modes.hpp"

namespace plasmodicke {

using Eigen::VectorXcd;

// Collective decay rates Gamma_jk, coherent shifts Delta_jk and radiative
// rates Gamma^rad_jk, all normalized by the free-space rate gamma0 of a d0 = 1
// emitter at omega0.
struct RateMatrices {
  MatrixXd gamma;
  MatrixXd delta;
  MatrixXd gamma_rad;
  double gamma0_eV = 0.0;
  double omega0_eV = 0.0;
  std::string route;              // "green", "modes" or "both"
  double route_discrepancy = 0.0;  // max |gamma_green - gamma_modes| / scale
};

// Eigenstate of the complex symmetric coupling matrix M_jk =
// (3 pi gamma0 / k) d_j . G(r_j, r_k, omega0) . d_k; the single-excitation
// effective Hamiltonian is -M, so Gamma_tot = 2 Im lambda and
// Delta_tot = -Re lambda.
struct CollectiveEigenstate {
  double gamma_over_gamma0 = 0.0;
  double delta_over_gamma0 = 0.0;
  VectorXcd amplitudes;
};

struct BrightnessReport {
  std::vector<CollectiveEigenstate> states;  // sorted, brightest first
  double gamma1_over_gamma0 = 0.0;           // single emitter, same placement
  double brightest_over_gamma1 = 0.0;
  std::string orientation_class;             // "radial", "azimuthal" or "mixed"
};

// Decay matrix straight from the imaginary part of the total Green function:
// Gamma_jk / gamma0 = (6 pi / k) Im[d_j . G . d_k] d0_j d0_k.
// mode = 0 sums all multipoles up to controls.max_multipole; mode = n keeps
// the single multipole n. include_free toggles the free-space contribution.
MatrixXd gamma_matrix_green(const SystemConfig& config, double omega0_eV, int mode = 0,
                            bool include_free = true);

// Same decay matrix assembled from the Lorentzian mode decomposition,
// Gamma_jk = sum_n gamma_n g_j g_k mu_jk / (delta_n^2 + (gamma_n/2)^2), plus
// the coherent shifts Delta_jk = sum_n g_j g_k mu_jk delta_n / (...). The
// free-space channel is added to Gamma only; Delta keeps the plasmonic part.
std::pair<MatrixXd, MatrixXd> gamma_delta_matrices(const SystemConfig& config, double omega0_eV,
                                                   const std::vector<ModeData>& modes,
                                                   bool include_free = true);

// Gamma^rad_jk / gamma0 = Re[d_eff_j . conj(d_eff_k)] / d0^2 with the
// first-multipole effective dipole (emitter dipole plus induced image).
MatrixXd radiative_matrix(const SystemConfig& config, double omega0_eV);

// route = "green" (gamma from the Green function, delta from modes),
// "modes" (both from the mode sum) or "both" (green gamma, mode delta, and
// the cross-route discrepancy recorded).
RateMatrices compute_rates(const SystemConfig& config, double omega0_eV,
                           const std::string& route = "both");

// Quantum yield of the brightest collective state: v^T gamma_rad v / v^T gamma v
// with v the leading eigenvector of the decay matrix.
double bright_state_yield(const MatrixXd& gamma, const MatrixXd& gamma_rad);

std::vector<CollectiveEigenstate> classical_eigenstates(const SystemConfig& config,
                                                        double omega0_eV, int mode = 0,
                                                        bool include_free = true);

BrightnessReport brightness_report(const SystemConfig& config, double omega0_eV, int mode = 0,
                                   bool include_free = true);

}  // namespace plasmodicke
