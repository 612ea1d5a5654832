#pragma once

#include <string>

#include "koopman/model.hpp"

namespace koopman {

/// A-posteriori accuracy screen on a validation trajectory: per-mode maximal
/// normalized deviation from linear evolution (Q), the ascending-Q ordering,
/// and the reconstruction-error curve R(Lhat) over that ordering.
struct PruneReport {
    RealVector q_errors;        // one per mode, original mode order
    std::vector<Index> order;   // ascending Q, ties by ascending mode index
    RealVector r_curve;         // R(Lhat), Lhat = 1..L
    Index chosen_lhat = 0;
};

/// Q_i = max_m |phi_i(x(t_m)) - exp(mu_i t_m) phi_i(x(0))| / rms|phi_i|,
/// with rms taken discretely over the trajectory. Degenerate modes
/// (rms < 1e-14) get Q = +inf. Discrete models use mu = Log(lambda)/dt on
/// the principal branch; t_m = m * dt keeps negative-real eigenvalues
/// unambiguous at sample instants.
RealVector q_error(const KoopmanModel& model,
                   const Eigen::Ref<const RealMatrix>& val_traj, double dt);

/// R for one mode subset: ||X - P_span(phi_S) X||_F / ||X||_F; empty subset
/// gives 1 by convention.
double reconstruction_error(const ComplexMatrix& phi_subset,
                            const Eigen::Ref<const RealMatrix>& states);

/// R(Lhat) over nested prefixes of `order`, computed incrementally (monotone
/// nonincreasing by construction).
RealVector r_curve(const KoopmanModel& model,
                   const Eigen::Ref<const RealMatrix>& val_traj,
                   const std::vector<Index>& order);

PruneReport prune_report(const KoopmanModel& model,
                         const Eigen::Ref<const RealMatrix>& val_traj, double dt);

/// Largest Lhat with Q_{i_Lhat} <= q_threshold (paper-style 5% default).
Index default_lhat(const PruneReport& report, double q_threshold = 0.05);

/// Keep the top-Lhat accurate modes, ordered by ascending Q.
KoopmanModel select_top(const KoopmanModel& model, const PruneReport& report,
                        Index lhat);

/// CSV columns: L_hat, Q, R, mode_index.
void write_prune_csv(const std::string& path, const PruneReport& report);

}  // namespace koopman
