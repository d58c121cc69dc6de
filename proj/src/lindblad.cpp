#include "plasmodicke/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "plasmodicke/errors.hpp"
#include "plasmodicke/ode.hpp"

namespace plasmodicke {

namespace {

using Eigen::VectorXcd;
using Triplet = Eigen::Triplet<Complex>;

void append_kron(std::vector<Triplet>& out, Complex scale, const SparseC& a, const SparseC& b) {
  const int p = static_cast<int>(b.rows());
  const int q = static_cast<int>(b.cols());
  for (int ja = 0; ja < a.outerSize(); ++ja) {
    for (SparseC::InnerIterator ita(a, ja); ita; ++ita) {
      for (int jb = 0; jb < b.outerSize(); ++jb) {
        for (SparseC::InnerIterator itb(b, jb); itb; ++itb) {
          out.emplace_back(static_cast<int>(ita.row()) * p + static_cast<int>(itb.row()),
                           static_cast<int>(ita.col()) * q + static_cast<int>(itb.col()),
                           scale * ita.value() * itb.value());
        }
      }
    }
  }
}

void require_symmetric(const MatrixXd& m, const char* name) {
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1.0);
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument(std::string(name) + " matrix must be symmetric");
  }
}

double max_abs_eigenvalue(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

VectorXcd vectorize(const MatrixXcd& rho) {
  const int dim = static_cast<int>(rho.rows());
  VectorXcd v(dim * dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) v(i * dim + j) = rho(i, j);
  }
  return v;
}

MatrixXcd unvectorize(const VectorXcd& v, int dim) {
  MatrixXcd rho(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) rho(i, j) = v(i * dim + j);
  }
  return rho;
}

double expectation(const SparseC& op, const MatrixXcd& rho) {
  Complex sum = 0.0;
  for (int j = 0; j < op.outerSize(); ++j) {
    for (SparseC::InnerIterator it(op, j); it; ++it) {
      sum += it.value() * rho(it.col(), it.row());
    }
  }
  return std::real(sum);
}

}  // namespace

OperatorSet build_operators(int n_emitters) {
  if (n_emitters < 1 || n_emitters > 10) {
    throw std::invalid_argument("emitter count must be between 1 and 10");
  }
  OperatorSet ops;
  ops.n_emitters = n_emitters;
  ops.dim = 1 << n_emitters;

  ops.labels.reserve(ops.dim);
  for (int mask = 0; mask < ops.dim; ++mask) {
    std::string label(n_emitters, 'g');
    for (int i = 0; i < n_emitters; ++i) {
      if (mask & (1 << (n_emitters - 1 - i))) label[i] = 'e';
    }
    ops.labels.push_back(std::move(label));
  }
  auto excitations = [](const std::string& s) {
    return std::count(s.begin(), s.end(), 'e');
  };
  std::sort(ops.labels.begin(), ops.labels.end(), [&](const std::string& a, const std::string& b) {
    const auto ea = excitations(a), eb = excitations(b);
    return ea != eb ? ea > eb : a < b;
  });

  std::vector<int> index_of(ops.dim, -1);
  auto mask_of = [&](const std::string& label) {
    int mask = 0;
    for (int i = 0; i < n_emitters; ++i) {
      if (label[i] == 'e') mask |= 1 << (n_emitters - 1 - i);
    }
    return mask;
  };
  for (int idx = 0; idx < ops.dim; ++idx) index_of[mask_of(ops.labels[idx])] = idx;

  ops.sigma_minus.resize(n_emitters);
  ops.sigma_plus.resize(n_emitters);
  for (int i = 0; i < n_emitters; ++i) {
    std::vector<Triplet> triplets;
    for (int src = 0; src < ops.dim; ++src) {
      if (ops.labels[src][i] != 'e') continue;
      std::string target = ops.labels[src];
      target[i] = 'g';
      triplets.emplace_back(index_of[mask_of(target)], src, Complex(1.0, 0.0));
    }
    ops.sigma_minus[i].resize(ops.dim, ops.dim);
    ops.sigma_minus[i].setFromTriplets(triplets.begin(), triplets.end());
    ops.sigma_plus[i] = SparseC(ops.sigma_minus[i].adjoint());
  }

  ops.number_total.resize(ops.dim, ops.dim);
  for (int i = 0; i < n_emitters; ++i) {
    ops.number_total += SparseC(ops.sigma_plus[i] * ops.sigma_minus[i]);
  }
  return ops;
}

Liouvillian build_liouvillian(const OperatorSet& ops, const MatrixXd& gamma,
                              const MatrixXd& delta) {
  const int n = ops.n_emitters;
  const int dim = ops.dim;
  if (gamma.rows() != n || gamma.cols() != n || delta.rows() != n || delta.cols() != n) {
    throw std::invalid_argument("rate matrix size does not match the emitter count");
  }
  require_symmetric(gamma, "decay");
  require_symmetric(delta, "shift");

  Eigen::SelfAdjointEigenSolver<MatrixXd> gamma_eigs(gamma, Eigen::EigenvaluesOnly);
  const double lambda_max = gamma_eigs.eigenvalues().cwiseAbs().maxCoeff();
  if (gamma_eigs.eigenvalues().minCoeff() < -1e-8 * std::max(lambda_max, 1.0)) {
    throw invariant_error("decay matrix must be positive semidefinite");
  }

  SparseC h(dim, dim), q(dim, dim);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      const SparseC raise_lower(ops.sigma_plus[j] * ops.sigma_minus[k]);
      h += Complex(delta(j, k)) * raise_lower;
      q += Complex(gamma(j, k)) * raise_lower;
    }
  }

  SparseC identity(dim, dim);
  identity.setIdentity();
  const SparseC left = (Complex(0, -1) * h - Complex(0.5) * q).eval();
  const SparseC right = (Complex(0, 1) * SparseC(h.transpose()) -
                         Complex(0.5) * SparseC(q.transpose())).eval();

  std::vector<Triplet> triplets;
  append_kron(triplets, Complex(1.0), left, identity);
  append_kron(triplets, Complex(1.0), identity, right);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (gamma(j, k) == 0.0) continue;
      append_kron(triplets, Complex(gamma(j, k)), ops.sigma_minus[j], ops.sigma_minus[k]);
    }
  }

  Liouvillian result;
  result.dim = dim;
  result.matrix.resize(dim * dim, dim * dim);
  result.matrix.setFromTriplets(triplets.begin(), triplets.end());
  result.rate_scale = std::max({lambda_max, max_abs_eigenvalue(delta), 1e-12});

  // Trace preservation: vec(I)^T L must vanish column-wise.
  VectorXcd column_sums = VectorXcd::Zero(dim * dim);
  double l_scale = 0.0;
  for (int j = 0; j < result.matrix.outerSize(); ++j) {
    for (SparseC::InnerIterator it(result.matrix, j); it; ++it) {
      l_scale = std::max(l_scale, std::abs(it.value()));
      const int row = static_cast<int>(it.row());
      if (row / dim == row % dim) column_sums(it.col()) += it.value();
    }
  }
  if (column_sums.cwiseAbs().maxCoeff() > 1e-10 * std::max(l_scale, 1.0)) {
    throw invariant_error("generator does not preserve the trace");
  }
  return result;
}

void check_density(const MatrixXcd& rho) {
  const double hermitian_defect = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (hermitian_defect > 1e-10) {
    throw invariant_error("density operator lost Hermiticity: defect " +
                          std::to_string(hermitian_defect));
  }
  const double trace_defect = std::abs(rho.trace() - Complex(1.0));
  if (trace_defect > 1e-8) {
    throw invariant_error("density operator lost unit trace: defect " +
                          std::to_string(trace_defect));
  }
  Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(0.5 * (rho + rho.adjoint()),
                                                  Eigen::EigenvaluesOnly);
  const double min_eig = solver.eigenvalues().minCoeff();
  if (min_eig < -1e-8) {
    throw invariant_error("density operator lost positivity: eigenvalue " +
                          std::to_string(min_eig));
  }
}

Trajectory evolve(const Liouvillian& liouvillian, const MatrixXcd& rho0,
                  const std::vector<double>& times, const NumericalControls& controls) {
  const int dim = liouvillian.dim;
  if (rho0.rows() != dim || rho0.cols() != dim) {
    throw std::invalid_argument("initial state size does not match the generator");
  }
  check_density(rho0);

  const VectorXcd v0 = vectorize(rho0);
  auto deriv = [&](double, const VectorXcd& v) { return (liouvillian.matrix * v).eval(); };

  double factor = controls.time_step_factor;
  OdeOptions opt;
  opt.rtol = 1e-9;
  opt.atol = 1e-12;

  constexpr int kMaxRefinements = 3;
  for (int attempt = 0;; ++attempt) {
    opt.h_max = factor / liouvillian.rate_scale;
    try {
      const std::vector<VectorXcd> snapshots = integrate_on_grid(deriv, v0, times, opt);
      Trajectory result;
      result.times = times;
      result.refinements = attempt;
      result.rho.reserve(snapshots.size());
      for (const VectorXcd& v : snapshots) {
        MatrixXcd rho = unvectorize(v, dim);
        check_density(rho);
        result.rho.push_back(std::move(rho));
      }
      return result;
    } catch (const invariant_error&) {
      if (attempt >= kMaxRefinements) throw;
      factor /= 5.0;
      opt.rtol /= 10.0;
      opt.atol /= 10.0;
    }
  }
}

EmissionTrace emission_trace(const OperatorSet& ops, const Trajectory& trajectory,
                             const MatrixXd& gamma, const MatrixXd& gamma_rad) {
  const int n = ops.n_emitters;
  SparseC q_total(ops.dim, ops.dim), q_pop(ops.dim, ops.dim), q_coh(ops.dim, ops.dim),
      q_rad(ops.dim, ops.dim);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      const SparseC raise_lower(ops.sigma_plus[j] * ops.sigma_minus[k]);
      q_total += Complex(gamma(j, k)) * raise_lower;
      q_rad += Complex(gamma_rad(j, k)) * raise_lower;
      (j == k ? q_pop : q_coh) += Complex(gamma(j, k)) * raise_lower;
    }
  }

  EmissionTrace trace;
  trace.times = trajectory.times;
  for (const MatrixXcd& rho : trajectory.rho) {
    const double total = expectation(q_total, rho);
    const double population = expectation(q_pop, rho);
    const double radiated = expectation(q_rad, rho);
    trace.total.push_back(total);
    trace.population.push_back(population);
    trace.coherence.push_back(expectation(q_coh, rho));
    trace.radiated.push_back(radiated);
    trace.efficiency.push_back(total > 0.0 ? radiated / total : 0.0);
    trace.quanta.push_back(expectation(ops.number_total, rho));
  }
  return trace;
}

Eigen::VectorXcd dicke_state(const OperatorSet& ops, int two_m) {
  const int n = ops.n_emitters;
  if (std::abs(two_m) > n || (n - two_m) % 2 != 0) {
    throw std::invalid_argument("invalid Dicke projection for " + std::to_string(n) +
                                " emitters");
  }
  SparseC lowering(ops.dim, ops.dim);
  for (const SparseC& s : ops.sigma_minus) lowering += s;

  VectorXcd state = VectorXcd::Zero(ops.dim);
  state(0) = 1.0;  // |e...e> by the basis ordering
  const int steps = (n - two_m) / 2;
  for (int i = 0; i < steps; ++i) state = lowering * state;

  // sqrt((J+M)! / (N! (J-M)!)) via log-gamma
  const double j_plus_m = 0.5 * (n + two_m);
  const double j_minus_m = 0.5 * (n - two_m);
  const double log_coeff =
      0.5 * (std::lgamma(j_plus_m + 1.0) - std::lgamma(n + 1.0) - std::lgamma(j_minus_m + 1.0));
  return std::exp(log_coeff) * state;
}

CascadeResult ideal_cascade(int n_emitters, double gamma1, const std::vector<double>& times,
                            double rtol, double atol) {
  const int rungs = n_emitters + 1;
  VectorXd rates(rungs);
  for (int i = 0; i < rungs; ++i) {
    rates(i) = gamma1 * (n_emitters - i) * (i + 1.0);  // (J+M)(J-M+1), M = J - i
  }

  auto deriv = [&](double, const VectorXd& p) {
    VectorXd dp = VectorXd::Zero(rungs);
    for (int i = 0; i < rungs; ++i) {
      dp(i) -= rates(i) * p(i);
      if (i > 0) dp(i) += rates(i - 1) * p(i - 1);
    }
    return dp;
  };

  VectorXd p0 = VectorXd::Zero(rungs);
  p0(0) = 1.0;
  OdeOptions opt;
  opt.rtol = rtol;
  opt.atol = atol;
  opt.h_max = times.size() > 1 ? (times.back() - times.front()) : 1.0;
  const std::vector<VectorXd> snapshots = integrate_on_grid(deriv, p0, times, opt);

  CascadeResult result;
  result.times = times;
  result.populations.resize(static_cast<Eigen::Index>(times.size()), rungs);
  for (std::size_t t = 0; t < snapshots.size(); ++t) {
    result.populations.row(static_cast<Eigen::Index>(t)) = snapshots[t].transpose();
    result.emission.push_back(rates.dot(snapshots[t]));
  }
  return result;
}

ExtendedDickeRates extended_dicke_rates(const OperatorSet& ops, const MatrixXd& gamma) {
  const int n = ops.n_emitters;
  ExtendedDickeRates result;
  result.ladder.resize(n);
  result.diag.resize(n + 1);
  result.leak_out.resize(n);
  result.feed_in.resize(n);

  for (int i = 0; i <= n; ++i) {
    const int two_m = n - 2 * i;
    const VectorXcd upper = dicke_state(ops, two_m);

    std::vector<VectorXcd> lowered(n);
    for (int j = 0; j < n; ++j) lowered[j] = ops.sigma_minus[j] * upper;
    double total_out = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        total_out += gamma(j, k) * std::real(lowered[j].dot(lowered[k]));
      }
    }
    result.diag(i) = total_out;

    if (i == n) break;
    const VectorXcd lower = dicke_state(ops, two_m - 2);
    VectorXd amplitude(n);
    for (int j = 0; j < n; ++j) amplitude(j) = std::real(lower.dot(lowered[j]));
    result.ladder(i) = amplitude.dot(gamma * amplitude);
    result.leak_out(i) = result.diag(i) - result.ladder(i);

    std::vector<VectorXcd> raised(n);
    for (int j = 0; j < n; ++j) raised[j] = ops.sigma_plus[j] * lower;
    double total_in = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        total_in += gamma(j, k) * std::real(raised[j].dot(raised[k]));
      }
    }
    result.feed_in(i) = total_in - result.ladder(i);
  }
  return result;
}

TwoEmitterAnalytic two_emitter_closed_form(double gamma1, double gamma12,
                                           const std::vector<double>& times) {
  const double gamma_s = gamma1 + gamma12;
  const double gamma_a = gamma1 - gamma12;
  const double gamma_ee = 2.0 * gamma1;

  auto branch = [&](double rate, double t) {
    const double gap = rate - gamma_ee;
    if (std::abs(gap) < 1e-12 * gamma_ee) {
      return rate * t * std::exp(-gamma_ee * t);
    }
    return rate * (std::exp(-gamma_ee * t) - std::exp(-rate * t)) / gap;
  };

  TwoEmitterAnalytic result;
  result.times = times;
  for (double t : times) {
    const double ee = std::exp(-gamma_ee * t);
    const double sym = branch(gamma_s, t);
    const double asym = branch(gamma_a, t);
    result.ee.push_back(ee);
    result.sym.push_back(sym);
    result.asym.push_back(asym);
    result.emission.push_back(gamma_ee * ee + gamma_s * sym + gamma_a * asym);
  }
  return result;
}

}  // namespace plasmodicke
