#include "plasmodicke/rates.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "plasmodicke/constants.hpp"
#include "plasmodicke/errors.hpp"
#include "plasmodicke/greens.hpp"

namespace plasmodicke {

namespace {

Complex pair_projection(const SystemConfig& config, int j, int k, double omega0_eV, int mode,
                        bool include_free) {
  const Emitter& ej = config.emitters.items[j];
  const Emitter& ek = config.emitters.items[k];
  const int n_max = std::max(config.controls.max_multipole, mode);
  Complex proj = scattered_projection(ej.position_nm, ej.orientation, ek.position_nm,
                                      ek.orientation, config.sphere, omega0_eV, n_max, mode);
  if (include_free) {
    proj += free_projection(ej.position_nm, ej.orientation, ek.position_nm, ek.orientation,
                            omega0_eV);
  }
  return proj;
}

// Coupling matrix M_jk = (3 pi / k) d_j . G(r_j, r_k) . d_k d0_j d0_k in
// gamma0 units; complex symmetric by reciprocity.
Eigen::MatrixXcd coupling_matrix(const SystemConfig& config, double omega0_eV, int mode,
                                 bool include_free) {
  const int n_e = config.emitters.size();
  const double k = wavenumber(omega0_eV);
  Eigen::MatrixXcd m(n_e, n_e);
  for (int j = 0; j < n_e; ++j) {
    for (int l = j; l < n_e; ++l) {
      const double d0d0 = config.emitters.items[j].d0 * config.emitters.items[l].d0;
      const Complex value =
          3.0 * kPi / k * pair_projection(config, j, l, omega0_eV, mode, include_free) * d0d0;
      m(j, l) = value;
      m(l, j) = value;
    }
  }
  return m;
}

std::string classify_orientation(const EmitterSet& emitters) {
  bool all_radial = true, all_azimuthal = true;
  for (const Emitter& e : emitters.items) {
    const double radialness = std::abs(e.orientation.dot(e.position_nm.normalized()));
    if (radialness < 1.0 - 1e-9) all_radial = false;
    if (radialness > 1e-9) all_azimuthal = false;
  }
  if (all_radial) return "radial";
  if (all_azimuthal) return "azimuthal";
  return "mixed";
}

}  // namespace

MatrixXd gamma_matrix_green(const SystemConfig& config, double omega0_eV, int mode,
                            bool include_free) {
  const int n_e = config.emitters.size();
  const double k = wavenumber(omega0_eV);
  MatrixXd gamma(n_e, n_e);
  for (int j = 0; j < n_e; ++j) {
    for (int l = j; l < n_e; ++l) {
      const double d0d0 = config.emitters.items[j].d0 * config.emitters.items[l].d0;
      const double value =
          6.0 * kPi / k *
          std::imag(pair_projection(config, j, l, omega0_eV, mode, include_free)) * d0d0;
      gamma(j, l) = value;
      gamma(l, j) = value;
    }
  }
  return gamma;
}

std::pair<MatrixXd, MatrixXd> gamma_delta_matrices(const SystemConfig& config, double omega0_eV,
                                                   const std::vector<ModeData>& modes,
                                                   bool include_free) {
  const int n_e = config.emitters.size();
  const double gamma0 = free_space_rate(omega0_eV);
  MatrixXd gamma = MatrixXd::Zero(n_e, n_e);
  MatrixXd delta = MatrixXd::Zero(n_e, n_e);

  for (const ModeData& m : modes) {
    const double detuning = omega0_eV - m.mode.omega_n_eV;
    const double half_width = 0.5 * m.mode.gamma_n_eV;
    const double lorentz = 1.0 / (detuning * detuning + half_width * half_width);
    const MatrixXd strength = (m.g * m.g.transpose()).cwiseProduct(m.mu);
    gamma += m.mode.gamma_n_eV * lorentz / gamma0 * strength;
    delta += detuning * lorentz / gamma0 * strength;
  }

  if (include_free) {
    const double k = wavenumber(omega0_eV);
    for (int j = 0; j < n_e; ++j) {
      for (int l = j; l < n_e; ++l) {
        const Emitter& ej = config.emitters.items[j];
        const Emitter& el = config.emitters.items[l];
        const double value = 6.0 * kPi / k *
                             std::imag(free_projection(ej.position_nm, ej.orientation,
                                                       el.position_nm, el.orientation,
                                                       omega0_eV)) *
                             ej.d0 * el.d0;
        gamma(j, l) += value;
        if (l != j) gamma(l, j) += value;
      }
    }
  }
  return {gamma, delta};
}

MatrixXd radiative_matrix(const SystemConfig& config, double omega0_eV) {
  const int n_e = config.emitters.size();
  std::vector<Eigen::Vector3cd> d_eff(n_e);
  for (int j = 0; j < n_e; ++j) {
    d_eff[j] = effective_dipole(config.emitters.items[j], config.sphere, omega0_eV);
  }
  MatrixXd result(n_e, n_e);
  for (int j = 0; j < n_e; ++j) {
    for (int l = j; l < n_e; ++l) {
      const double value = std::real(d_eff[j].dot(d_eff[l]));
      result(j, l) = value;
      result(l, j) = value;
    }
  }
  return result;
}

RateMatrices compute_rates(const SystemConfig& config, double omega0_eV,
                           const std::string& route) {
  if (route != "green" && route != "modes" && route != "both") {
    throw std::invalid_argument("unknown rate route: " + route);
  }
  RateMatrices result;
  result.route = route;
  result.omega0_eV = omega0_eV;
  result.gamma0_eV = free_space_rate(omega0_eV);

  const std::vector<ModeData> modes = mode_decomposition(config);
  const MatrixXd gamma_green = gamma_matrix_green(config, omega0_eV);
  auto [gamma_modes, delta_modes] = gamma_delta_matrices(config, omega0_eV, modes);

  const double scale = gamma_green.cwiseAbs().maxCoeff();
  result.route_discrepancy = (gamma_green - gamma_modes).cwiseAbs().maxCoeff() / scale;

  result.gamma = (route == "modes") ? gamma_modes : gamma_green;
  result.delta = delta_modes;
  result.gamma_rad = radiative_matrix(config, omega0_eV);
  return result;
}

double bright_state_yield(const MatrixXd& gamma, const MatrixXd& gamma_rad) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(gamma);
  const VectorXd v = solver.eigenvectors().col(gamma.rows() - 1);  // largest eigenvalue
  const double total = v.dot(gamma * v);
  if (total <= 0.0) {
    throw invariant_error("brightest collective state has a non-positive decay rate");
  }
  return v.dot(gamma_rad * v) / total;
}

std::vector<CollectiveEigenstate> classical_eigenstates(const SystemConfig& config,
                                                        double omega0_eV, int mode,
                                                        bool include_free) {
  const Eigen::MatrixXcd m = coupling_matrix(config, omega0_eV, mode, include_free);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw convergence_error("collective eigenstate solve failed");
  }

  const double tol = std::max(config.controls.eigen_tolerance, 1e-14);
  const double m_norm = m.norm();
  std::vector<CollectiveEigenstate> states;
  for (int i = 0; i < m.rows(); ++i) {
    const Complex lambda = solver.eigenvalues()(i);
    VectorXcd v = solver.eigenvectors().col(i);
    const double residual = (m * v - lambda * v).norm();
    if (residual > tol * std::max(m_norm, 1e-300)) {
      throw convergence_error("collective eigenstate residual " + std::to_string(residual) +
                              " exceeds tolerance");
    }
    // Deterministic phase: largest amplitude real positive.
    int i_max = 0;
    v.cwiseAbs().maxCoeff(&i_max);
    v *= std::abs(v(i_max)) / v(i_max);

    CollectiveEigenstate state;
    state.gamma_over_gamma0 = 2.0 * std::imag(lambda);
    state.delta_over_gamma0 = -std::real(lambda);
    state.amplitudes = v;
    states.push_back(std::move(state));
  }
  std::sort(states.begin(), states.end(), [](const auto& a, const auto& b) {
    return a.gamma_over_gamma0 > b.gamma_over_gamma0;
  });
  return states;
}

BrightnessReport brightness_report(const SystemConfig& config, double omega0_eV, int mode,
                                   bool include_free) {
  BrightnessReport report;
  report.states = classical_eigenstates(config, omega0_eV, mode, include_free);
  report.orientation_class = classify_orientation(config.emitters);

  SystemConfig single = config;
  single.emitters.items.assign(1, config.emitters.items.front());
  const auto single_state = classical_eigenstates(single, omega0_eV, mode, include_free);
  report.gamma1_over_gamma0 = single_state.front().gamma_over_gamma0;
  if (report.gamma1_over_gamma0 <= 0.0) {
    throw invariant_error("single-emitter decay rate must be positive");
  }
  report.brightest_over_gamma1 =
      report.states.front().gamma_over_gamma0 / report.gamma1_over_gamma0;
  return report;
}

}  // namespace plasmodicke
