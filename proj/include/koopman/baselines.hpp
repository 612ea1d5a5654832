#pragma once

#include <vector>

#include "koopman/model.hpp"

namespace koopman {

/// SVD-projected DMD: per-step eigenvalues, unit-norm modes (rows), and
/// amplitudes from the least-squares Vandermonde fit of the snapshots.
struct DmdModel {
    ComplexVector eigenvalues;  // lambda per step
    ComplexMatrix modes;        // r x N, row i is phi_i^T with ||phi_i|| = 1
    ComplexVector amplitudes;   // alpha_i
    double dt = 0.0;
    std::vector<Index> conj_partner;
};

DmdModel fit_dmd(const Eigen::Ref<const RealMatrix>& x_traj, Index rank, double dt);

/// Vandermonde matrix T(m, i) = lambda_i^m, m = 0..m_rows-1.
ComplexMatrix dmd_vandermonde(const DmdModel& dmd, Index m_rows);

/// X_DMD = T diag(a) Phi, the rank-1-sum reconstruction over m_rows steps.
ComplexMatrix dmd_reconstruction(const DmdModel& dmd, Index m_rows);

struct SpdmdOptions {
    double rho_admm = 1.0;
    double abs_tol = 1e-8;
    double rel_tol = 1e-6;
    int max_iter = 10000;
};

struct SpdmdResult {
    ComplexVector amplitudes;   // sparse iterate (exact zeros)
    std::vector<Index> support;
    bool converged = false;
    int iterations = 0;
    std::vector<double> objective_history;  // (1/2M)||X - T diag(a) Phi||^2 + gamma ||a||_1
};

/// l1-penalized amplitude selection over fixed DMD modes, solved by ADMM.
/// Modes are never refit.
SpdmdResult fit_spdmd(const DmdModel& dmd, const Eigen::Ref<const RealMatrix>& x,
                      double gamma, const SpdmdOptions& opt = {});

/// The same objective solved by exact coordinate descent on the amplitudes
/// (the multi-task row solver under the diagonal structural constraint);
/// cross-checks the ADMM support.
ComplexVector spdmd_support_cd(const DmdModel& dmd,
                               const Eigen::Ref<const RealMatrix>& x, double gamma,
                               double tol = 1e-12, int max_sweeps = 100000);

/// Max KKT violation of the spDMD objective at amplitude vector a.
double spdmd_kkt_violation(const DmdModel& dmd, const Eigen::Ref<const RealMatrix>& x,
                           const ComplexVector& a, double gamma);

/// Kou's time-summed mode "energy" I_i = sum_{j=1..M} |alpha_i| beta^(j-1)
/// with beta = |lambda_step,i|; the geometric closed form switches to the
/// M |alpha| branch when |beta - 1| < 1e-9 (removable singularity).
RealVector kou_energy(const ComplexVector& step_multipliers,
                      const ComplexVector& amplitudes, Index m);
RealVector kou_energy(const DmdModel& dmd, Index m);

/// Per-mode amplitude surrogate |phi_i(x0)| * ||b_i|| for ranking Koopman
/// models with amplitude-based criteria.
ComplexVector koopman_amplitudes(const KoopmanModel& model,
                                 const Eigen::Ref<const RealMatrix>& x0);

/// beta_i of the decay-penalizing weights w_i = 1 / beta_i^2.
RealVector kou_betas(const ComplexVector& step_multipliers, Index m);

struct ProxL0Options {
    double lambda = 0.0;     // weighted-l0 penalty
    int steps = 50;
    double eta_first = 1e-12;  // first-iteration step size
    double eta = 1e-3;         // later step sizes
    RealVector weights;        // empty: w_i = 1/beta_i^2 from kou_betas
};

struct ProxL0Result {
    std::vector<ComplexVector> iterates;  // a^0 (initial) .. a^steps
    RealVector weights;
};

/// Proximal gradient on Q(a) = 1/2 ||X_DMD - T diag(a) Phi||_F^2 with the
/// weighted-l0 prox: keep a_i only when |a_i / sqrt(w_i)| >= sqrt(lambda eta_k).
ProxL0Result prox_weighted_l0(const DmdModel& dmd, const ComplexMatrix& x_dmd,
                              const ProxL0Options& opt);

}  // namespace koopman
