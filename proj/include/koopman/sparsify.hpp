#pragma once

#include <string>
#include <vector>

#include "koopman/model.hpp"

namespace koopman {

/// Sum of row 2-norms (complex modulus): the l1/l2 matrix norm inducing
/// row-wise sparsity across all reconstruction tasks.
double l21_norm(const ComplexMatrix& w);

/// (1/2M)||X - F B||_F^2 + alpha rho ||B||_{2,1} + alpha(1-rho)/2 ||B||_F^2.
double elastic_net_objective(const ComplexMatrix& features,
                             const Eigen::Ref<const RealMatrix>& targets,
                             const ComplexMatrix& coeffs, double alpha, double rho);

/// Smallest alpha at which B = 0 is optimal: max_i ||F_i^H X||_2 / (M rho).
double max_alpha(const ComplexMatrix& features,
                 const Eigen::Ref<const RealMatrix>& targets, double rho);

struct MultitaskOptions {
    double tol = 1e-12;      // max row-update 2-norm per sweep
    int max_sweeps = 100000;
    /// Conjugate-pair map over feature columns (partner[i] == i when
    /// unpaired); paired rows are kept exact conjugates during updates.
    std::vector<Index> conj_partner;
    const ComplexMatrix* warm_start = nullptr;
    bool record_objective = true;
};

struct MultitaskResult {
    ComplexMatrix coeffs;  // B', Lhat x N
    int sweeps = 0;
    bool converged = false;
    double final_update_norm = 0.0;
    std::vector<double> objective_history;  // one value per sweep
};

/// Block coordinate descent over rows of B'; each complex row is one block
/// (real/imaginary parts share the row 2-norm) with an exact group
/// soft-threshold update.
MultitaskResult multitask_elasticnet(const ComplexMatrix& features,
                                     const Eigen::Ref<const RealMatrix>& targets,
                                     double alpha, double rho,
                                     const MultitaskOptions& opt = {});

/// Max KKT violation at B: zero rows need ||F_i^H R||/M <= alpha rho, nonzero
/// rows need a vanishing stationarity residual.
double kkt_violation(const ComplexMatrix& features,
                     const Eigen::Ref<const RealMatrix>& targets,
                     const ComplexMatrix& coeffs, double alpha, double rho);

/// Multi-step prediction features scaled to unit initial value:
/// row m = (exp(m dt mu_1), ..., exp(m dt mu_Lhat)).
ComplexMatrix aposteriori_features_scaled(const ComplexVector& rates, Index m,
                                          double dt);

/// Lambda_ini diagonal phi_i(x1); |phi_i(x1)| < 1e-12 raises a
/// degenerate-initialization error naming the mode.
ComplexVector initial_eigenfunction_values(const KoopmanModel& model,
                                           const Eigen::Ref<const RealMatrix>& x1);

struct SparsePathEntry {
    double alpha = 0.0;
    ComplexMatrix coeffs;            // penalized B' in the scaled basis
    Index solver_nonzero_rows = 0;   // exact zeros from coordinate descent
    Index nonzero_rows = 0;          // rows surviving the entrywise eps screen
    double penalized_residual = 0.0; // ||X - F_scaled B'||_F / ||X||_F
    double refit_residual = 0.0;     // least-squares refit on the eps support
    int sweeps = 0;
    bool converged = true;
};

struct SparsePath {
    std::vector<SparsePathEntry> entries;  // alphas descending
    double selected_alpha = 0.0;
    double rho = 0.99;
    double eps = 1e-2;
};

struct SweepOptions {
    int n_alphas = 100;
    double alpha_min_ratio = 1e-7;
    double eps = 1e-2;  // entrywise screen used for the per-alpha diagnostics
    MultitaskOptions solver;
};

/// Log-spaced alpha grid from alpha_max down, warm-started descending.
SparsePath alpha_sweep(const ComplexMatrix& features_scaled,
                       const Eigen::Ref<const RealMatrix>& targets,
                       double rho = 0.99, const SweepOptions& opt = {});

/// Default selection: largest alpha whose refit residual is within 1.1x of
/// the sweep minimum. Returns the entry index.
Index select_alpha_auto(const SparsePath& path);

struct SparseSelection {
    KoopmanModel model;        // retained modes with refit Koopman modes B
    std::vector<Index> kept;   // indices into the top-Lhat model
    double refit_residual = 0.0;
    double penalized_residual = 0.0;
    ComplexMatrix thresholded_coeffs;  // B' after the eps screen (scaled basis)
};

/// Entrywise hard threshold at eps, drop all-zero rows, refit modes by least
/// squares on the unscaled a-posteriori features of the retained set.
SparseSelection threshold_and_refit(const KoopmanModel& model_top,
                                    const SparsePath& path, double selected_alpha,
                                    double eps,
                                    const Eigen::Ref<const RealMatrix>& targets,
                                    const ComplexMatrix& features_unscaled);

/// CSV columns: alpha, nonzero_rows, solver_nonzero_rows, penalized_residual,
/// refit_residual, sweeps, converged, then per-row coefficient norms.
void write_path_csv(const std::string& path, const SparsePath& sparse_path);

}  // namespace koopman
