#pragma once

#include <string>
#include <variant>
#include <vector>

#include "koopman/features.hpp"
#include "koopman/linalg.hpp"

namespace koopman {

enum class FitMethod { edmd, kdmd };
enum class TimeDomain { discrete, continuous };

struct FitDiagnostics {
    double gram_condition = 0.0;
    Index rank_used = 0;
    std::vector<std::string> warnings;
};

/// Fitted Koopman approximation. Eigenfunction i is
///   EDMD:  phi_i(x) = Psi(x) * eigvec_coeffs.col(i)
///   KDMD:  phi_i(x) = k(x, train_x) * eigvec_coeffs.col(i)
/// where eigvec_coeffs folds Q_r Sigma_r^+ V_hat for kernel models.
/// `eigenvalues` are per-step multipliers lambda for discrete models and
/// rates mu (1/time) for continuous ones.
struct KoopmanModel {
    FitMethod method = FitMethod::edmd;
    TimeDomain domain = TimeDomain::discrete;
    ComplexVector eigenvalues;
    ComplexMatrix eigvec_coeffs;
    ComplexMatrix modes;  // mode_count x state_dim Koopman modes B
    double dt = 0.0;      // training sampling interval (discrete models)
    DictionarySpec dictionary;
    KernelSpec kernel;
    RealMatrix train_x;  // kernel models: points backing evaluation
    std::vector<Index> conj_partner;
    FitDiagnostics diagnostics;

    Index mode_count() const { return eigenvalues.size(); }
    Index state_dim() const;
};

ComplexMatrix eval_eigenfunctions(const KoopmanModel& model,
                                  const Eigen::Ref<const RealMatrix>& x);

/// Rows (xdot_m . grad) phi(x_m) for continuous-time residuals.
ComplexMatrix eval_eigenfunction_dot(const KoopmanModel& model,
                                     const Eigen::Ref<const RealMatrix>& x,
                                     const Eigen::Ref<const RealMatrix>& xdot);

/// Continuous rates mu; discrete eigenvalues convert by the principal
/// branch mu = Log(lambda) / dt.
ComplexVector continuous_rates(const KoopmanModel& model);

/// Per-step multipliers exp(mu * dt_step); for a discrete model evaluated at
/// its own dt this reproduces lambda exactly.
ComplexVector step_multipliers(const KoopmanModel& model, double dt_step);

/// Restrict the model to the given modes (order preserved as given).
KoopmanModel select_modes(const KoopmanModel& model, const std::vector<Index>& keep);

/// Nearest-conjugate pairing on an eigenvalue list; partner[i] == i for
/// (numerically) real entries.
std::vector<Index> conjugate_pairs(const ComplexVector& values);

}  // namespace koopman
