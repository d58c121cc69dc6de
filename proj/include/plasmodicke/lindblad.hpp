#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <string>
#include <vector>

#include "plasmodicke/geometry.hpp"
#include "plasmodicke/greens.hpp"

namespace plasmodicke {

using SparseC = Eigen::SparseMatrix<Complex>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Product basis for n two-level emitters, ordered by excitation number
// (descending) and lexicographically within each excitation sector, so
// |e...e> is state 0 and |g...g> is the last one.
struct OperatorSet {
  int n_emitters = 0;
  int dim = 0;
  std::vector<std::string> labels;
  std::vector<SparseC> sigma_minus;
  std::vector<SparseC> sigma_plus;
  SparseC number_total;  // sum_j sigma+_j sigma-_j
};

OperatorSet build_operators(int n_emitters);

// Collective-emission generator in row-major vectorization,
// vec(A rho B) = (A kron B^T) vec(rho):
//   d rho / dt = -i [H, rho] + sum_jk gamma_jk (s-_j rho s+_k
//                - 1/2 {s+_k s-_j, rho}),  H = sum_jk delta_jk s+_j s-_k.
// gamma and delta enter pre-normalized (e.g. by the free-space rate); the
// resulting times are in the matching inverse-rate units.
struct Liouvillian {
  SparseC matrix;
  int dim = 0;
  double rate_scale = 1.0;  // max |eigenvalue| of gamma and delta
};

Liouvillian build_liouvillian(const OperatorSet& ops, const MatrixXd& gamma,
                              const MatrixXd& delta);

struct Trajectory {
  std::vector<double> times;
  std::vector<MatrixXcd> rho;
  int refinements = 0;  // invariant-triggered restarts that were needed
};

// Integrates the master equation across the grid, enforcing Hermiticity,
// unit trace and positivity of every snapshot; on a violation the step
// ceiling and tolerances are tightened and the run restarts (up to three
// times) before giving up with invariant_error.
Trajectory evolve(const Liouvillian& liouvillian, const MatrixXcd& rho0,
                  const std::vector<double>& times, const NumericalControls& controls);

// Throws invariant_error unless rho is Hermitian (1e-10), unit-trace (1e-8)
// and positive semidefinite (eigenvalues >= -1e-8).
void check_density(const MatrixXcd& rho);

struct EmissionTrace {
  std::vector<double> times;
  std::vector<double> total;       // W = sum_jk gamma_jk <s+_j s-_k>
  std::vector<double> population;  // diagonal (j = k) part
  std::vector<double> coherence;   // off-diagonal part, W = population + coherence
  std::vector<double> radiated;    // same contraction with gamma_rad
  std::vector<double> efficiency;  // radiated / total
  std::vector<double> quanta;      // <N>(t)
};

EmissionTrace emission_trace(const OperatorSet& ops, const Trajectory& trajectory,
                             const MatrixXd& gamma, const MatrixXd& gamma_rad);

// Symmetric Dicke state |J = n/2, M = two_m / 2> as a state vector.
Eigen::VectorXcd dicke_state(const OperatorSet& ops, int two_m);

// Populations of the Dicke ladder rungs, index i <-> M = J - i.
struct CascadeResult {
  std::vector<double> times;
  MatrixXd populations;         // times.size() x (n + 1)
  std::vector<double> emission;
};

// Permutation-symmetric cascade d p_M / dt = G_{M+1} p_{M+1} - G_M p_M with
// the ideal rates G_M = gamma1 (J+M)(J-M+1), started from |J, J>.
CascadeResult ideal_cascade(int n_emitters, double gamma1, const std::vector<double>& times,
                            double rtol = 1e-11, double atol = 1e-14);

// Decay channels of the Dicke ladder under a non-uniform gamma matrix:
// ladder(i): rate M -> M-1 staying on the ladder (M = J - i),
// diag(i):   total rate out of |J, M>,
// leak_out(i) = diag - ladder >= 0: rate into non-symmetric states,
// feed_in(i): rate into |J, M-1> arriving from outside the ladder.
struct ExtendedDickeRates {
  VectorXd ladder;
  VectorXd diag;
  VectorXd leak_out;
  VectorXd feed_in;
};

ExtendedDickeRates extended_dicke_rates(const OperatorSet& ops, const MatrixXd& gamma);

// Closed-form two-emitter decay from |ee>: populations of |ee>, the symmetric
// and the antisymmetric one-excitation states, and the emission rate.
struct TwoEmitterAnalytic {
  std::vector<double> times;
  std::vector<double> ee, sym, asym;
  std::vector<double> emission;
};

TwoEmitterAnalytic two_emitter_closed_form(double gamma1, double gamma12,
                                           const std::vector<double>& times);

}  // namespace plasmodicke
