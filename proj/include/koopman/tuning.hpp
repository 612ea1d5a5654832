#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "koopman/model.hpp"

namespace koopman {

/// A-priori mean normalized error per mode, discrete form:
/// mean_j |phi_i(x_{j+1}) - lambda_i phi_i(x_j)| / rms|phi_i|.
RealVector apriori_error(const KoopmanModel& model,
                         const Eigen::Ref<const RealMatrix>& x_seq);

/// Discrete form on explicit (x, x_next) pairs.
RealVector apriori_error_pairs(const KoopmanModel& model,
                               const Eigen::Ref<const RealMatrix>& x,
                               const Eigen::Ref<const RealMatrix>& x_next);

/// Continuous form: mean_j |xdot_j . grad phi_i(x_j) - mu_i phi_i(x_j)| / rms.
RealVector apriori_error(const KoopmanModel& model,
                         const Eigen::Ref<const RealMatrix>& x,
                         const Eigen::Ref<const RealMatrix>& xdot);

struct GridSearchOptions {
    double threshold = 0.05;  // Q^a accuracy threshold on both splits
    int folds = 5;
    std::uint64_t seed = 0;
    bool shuffle = true;
    KernelKind kernel_kind = KernelKind::gaussian;
    int poly_order = 2;
};

struct GridPoint {
    double sigma = 0.0;
    Index rank = 0;
    double mean_count = 0.0;  // modes accurate on both train and held-out fold
    bool rank_clipped = false;
    std::string note;
};

struct GridSearchResult {
    std::vector<GridPoint> table;  // sigma-major, rank-minor grid order
    const GridPoint& at(double sigma, Index rank) const;
};

/// K-fold cross-validated accurate-mode counts for continuous KDMD on
/// (x, xdot) samples. Folds are contiguous blocks of the (optionally
/// shuffled) sample index; aggregation is deterministic by grid index.
GridSearchResult grid_search(const Eigen::Ref<const RealMatrix>& x,
                             const Eigen::Ref<const RealMatrix>& xdot,
                             const std::vector<double>& sigma_grid,
                             const std::vector<Index>& rank_grid,
                             const GridSearchOptions& opt = {});

/// Discrete variant: sequential snapshots are folded as (x_i, x_{i+1}) pairs.
GridSearchResult grid_search_discrete(const Eigen::Ref<const RealMatrix>& x_traj,
                                      double dt,
                                      const std::vector<double>& sigma_grid,
                                      const std::vector<Index>& rank_grid,
                                      const GridSearchOptions& opt = {});

/// CSV columns: sigma, rank, mean_count, rank_clipped.
void write_surface_csv(const std::string& path, const GridSearchResult& result);

}  // namespace koopman
