#pragma once

#include "koopman/model.hpp"

namespace koopman {

struct EdmdOptions {
    /// Project features onto the leading right-singular directions of Psi_x
    /// before solving; < 0 keeps the full dictionary (default).
    Index svd_rank = -1;
};

/// Discrete-time EDMD on a uniformly sampled trajectory (rows time-ordered).
KoopmanModel fit_edmd_discrete(const Eigen::Ref<const RealMatrix>& x_traj,
                               const DictionarySpec& dict, double dt,
                               const EdmdOptions& opt = {});

/// Discrete-time EDMD on explicit (x, x_next) pairs, e.g. point clouds
/// advanced by the flow map.
KoopmanModel fit_edmd_discrete_pairs(const Eigen::Ref<const RealMatrix>& x,
                                     const Eigen::Ref<const RealMatrix>& x_next,
                                     const DictionarySpec& dict, double dt,
                                     const EdmdOptions& opt = {});

/// Continuous-time EDMD on (x, xdot) samples; no time ordering required.
KoopmanModel fit_edmd_continuous(const Eigen::Ref<const RealMatrix>& x,
                                 const Eigen::Ref<const RealMatrix>& xdot,
                                 const DictionarySpec& dict,
                                 const EdmdOptions& opt = {});

}  // namespace koopman
