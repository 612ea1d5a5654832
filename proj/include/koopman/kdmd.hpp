#pragma once

#include "koopman/model.hpp"

namespace koopman {

struct KdmdOptions {
    /// Gram eigenvalues below rank_cutoff * max are excluded from the
    /// truncation regardless of the requested rank (Sigma_r^+ squares
    /// conditioning).
    double rank_cutoff = 1e-12;
};

/// Discrete-time KDMD on a uniformly sampled trajectory.
KoopmanModel fit_kdmd_discrete(const Eigen::Ref<const RealMatrix>& x_traj,
                               const KernelSpec& kernel, Index rank, double dt,
                               const KdmdOptions& opt = {});

/// Discrete-time KDMD on explicit (x, x_next) pairs.
KoopmanModel fit_kdmd_discrete_pairs(const Eigen::Ref<const RealMatrix>& x,
                                     const Eigen::Ref<const RealMatrix>& x_next,
                                     const KernelSpec& kernel, Index rank, double dt,
                                     const KdmdOptions& opt = {});

/// Continuous-time KDMD on (x, xdot) samples (requires a differentiable
/// kernel; all supported kinds are).
KoopmanModel fit_kdmd_continuous(const Eigen::Ref<const RealMatrix>& x,
                                 const Eigen::Ref<const RealMatrix>& xdot,
                                 const KernelSpec& kernel, Index rank,
                                 const KdmdOptions& opt = {});

}  // namespace koopman
