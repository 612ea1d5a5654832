#include "koopman/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "koopman/kdmd.hpp"

namespace koopman {

namespace {

RealVector mean_normalized_error(const ComplexMatrix& predicted,
                                 const ComplexMatrix& actual,
                                 const ComplexMatrix& phi_rms_basis) {
    const Index l = predicted.cols();
    const Index m = predicted.rows();
    RealVector out(l);
    for (Index i = 0; i < l; ++i) {
        const double rms = std::sqrt(phi_rms_basis.col(i).squaredNorm() /
                                     static_cast<double>(phi_rms_basis.rows()));
        if (rms < 1e-14) {
            out(i) = std::numeric_limits<double>::infinity();
            continue;
        }
        out(i) = (actual.col(i) - predicted.col(i)).cwiseAbs().sum() /
                 (static_cast<double>(m) * rms);
    }
    return out;
}

}  // namespace

RealVector apriori_error(const KoopmanModel& model,
                         const Eigen::Ref<const RealMatrix>& x_seq) {
    if (x_seq.rows() < 2) throw LinalgError("apriori_error: need >= 2 snapshots");
    const Index m = x_seq.rows() - 1;
    return apriori_error_pairs(model, x_seq.topRows(m), x_seq.bottomRows(m));
}

RealVector apriori_error_pairs(const KoopmanModel& model,
                               const Eigen::Ref<const RealMatrix>& x,
                               const Eigen::Ref<const RealMatrix>& x_next) {
    if (model.domain != TimeDomain::discrete) {
        throw LinalgError("apriori_error_pairs: model is continuous-time");
    }
    ComplexMatrix phi = eval_eigenfunctions(model, x);
    ComplexMatrix phi_next = eval_eigenfunctions(model, x_next);
    ComplexMatrix predicted = phi * model.eigenvalues.asDiagonal();
    return mean_normalized_error(predicted, phi_next, phi);
}

RealVector apriori_error(const KoopmanModel& model,
                         const Eigen::Ref<const RealMatrix>& x,
                         const Eigen::Ref<const RealMatrix>& xdot) {
    if (model.domain != TimeDomain::continuous) {
        throw LinalgError("apriori_error: model is discrete-time");
    }
    ComplexMatrix phi = eval_eigenfunctions(model, x);
    ComplexMatrix phi_dot = eval_eigenfunction_dot(model, x, xdot);
    ComplexMatrix predicted = phi * model.eigenvalues.asDiagonal();
    return mean_normalized_error(predicted, phi_dot, phi);
}

const GridPoint& GridSearchResult::at(double sigma, Index rank) const {
    for (const auto& p : table) {
        if (p.rank == rank && std::abs(p.sigma - sigma) <= 1e-12 * std::max(1.0, sigma)) {
            return p;
        }
    }
    throw LinalgError("GridSearchResult::at: grid point not found");
}

namespace {

struct FoldPlan {
    std::vector<Index> perm;          // shuffled sample order
    std::vector<Index> fold_begin;    // folds as contiguous blocks of perm
};

FoldPlan make_folds(Index m, int folds, std::uint64_t seed, bool shuffle) {
    if (folds < 2) throw LinalgError("grid_search: need >= 2 folds");
    if (m < folds) throw LinalgError("grid_search: fewer samples than folds");
    FoldPlan plan;
    plan.perm.resize(static_cast<size_t>(m));
    std::iota(plan.perm.begin(), plan.perm.end(), Index{0});
    if (shuffle) {
        std::mt19937_64 rng(seed);
        std::shuffle(plan.perm.begin(), plan.perm.end(), rng);
    }
    plan.fold_begin.resize(static_cast<size_t>(folds) + 1);
    for (int k = 0; k <= folds; ++k) {
        plan.fold_begin[static_cast<size_t>(k)] =
            (m * static_cast<Index>(k)) / static_cast<Index>(folds);
    }
    return plan;
}

Index count_accurate(const RealVector& train_err, const RealVector& val_err,
                     double threshold) {
    Index count = 0;
    for (Index i = 0; i < train_err.size(); ++i) {
        if (train_err(i) <= threshold && val_err(i) <= threshold) ++count;
    }
    return count;
}

KernelSpec make_kernel(const GridSearchOptions& opt, double sigma) {
    KernelSpec k;
    k.kind = opt.kernel_kind;
    k.poly_order = opt.poly_order;
    k.sigma = sigma;
    k.validate();
    return k;
}

template <typename FitFold, typename TrainErr, typename ValErr>
GridSearchResult run_grid(Index m, const std::vector<double>& sigma_grid,
                          const std::vector<Index>& rank_grid,
                          const GridSearchOptions& opt, FitFold fit_fold,
                          TrainErr train_err, ValErr val_err) {
    FoldPlan plan = make_folds(m, opt.folds, opt.seed, opt.shuffle);
    GridSearchResult result;
    for (double sigma : sigma_grid) {
        for (Index rank : rank_grid) {
            GridPoint point;
            point.sigma = sigma;
            point.rank = rank;
            double total = 0.0;
            for (int k = 0; k < opt.folds; ++k) {
                const Index lo = plan.fold_begin[static_cast<size_t>(k)];
                const Index hi = plan.fold_begin[static_cast<size_t>(k) + 1];
                std::vector<Index> train_idx, val_idx;
                for (Index p = 0; p < m; ++p) {
                    const Index sample = plan.perm[static_cast<size_t>(p)];
                    if (p >= lo && p < hi) {
                        val_idx.push_back(sample);
                    } else {
                        train_idx.push_back(sample);
                    }
                }
                Index fold_rank = rank;
                if (fold_rank > static_cast<Index>(train_idx.size())) {
                    fold_rank = static_cast<Index>(train_idx.size());
                    point.rank_clipped = true;
                    point.note = "rank reduced to fold size";
                }
                KoopmanModel model = fit_fold(make_kernel(opt, sigma), fold_rank,
                                              train_idx);
                if (model.diagnostics.rank_used < rank) point.rank_clipped = true;
                total += static_cast<double>(count_accurate(
                    train_err(model, train_idx), val_err(model, val_idx),
                    opt.threshold));
            }
            point.mean_count = total / static_cast<double>(opt.folds);
            result.table.push_back(std::move(point));
        }
    }
    return result;
}

RealMatrix take_rows(const Eigen::Ref<const RealMatrix>& m,
                     const std::vector<Index>& rows) {
    RealMatrix out(static_cast<Index>(rows.size()), m.cols());
    for (size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Index>(k)) = m.row(rows[k]);
    return out;
}

}  // namespace

GridSearchResult grid_search(const Eigen::Ref<const RealMatrix>& x,
                             const Eigen::Ref<const RealMatrix>& xdot,
                             const std::vector<double>& sigma_grid,
                             const std::vector<Index>& rank_grid,
                             const GridSearchOptions& opt) {
    if (x.rows() != xdot.rows()) throw LinalgError("grid_search: x/xdot rows differ");
    auto fit_fold = [&](const KernelSpec& kernel, Index rank,
                        const std::vector<Index>& idx) {
        return fit_kdmd_continuous(take_rows(x, idx), take_rows(xdot, idx), kernel, rank);
    };
    auto split_err = [&](const KoopmanModel& model, const std::vector<Index>& idx) {
        return apriori_error(model, take_rows(x, idx), take_rows(xdot, idx));
    };
    return run_grid(x.rows(), sigma_grid, rank_grid, opt, fit_fold, split_err, split_err);
}

GridSearchResult grid_search_discrete(const Eigen::Ref<const RealMatrix>& x_traj,
                                      double dt,
                                      const std::vector<double>& sigma_grid,
                                      const std::vector<Index>& rank_grid,
                                      const GridSearchOptions& opt) {
    if (x_traj.rows() < 2) throw LinalgError("grid_search_discrete: need >= 2 snapshots");
    const Index m = x_traj.rows() - 1;
    RealMatrix x = x_traj.topRows(m);
    RealMatrix x_next = x_traj.bottomRows(m);
    auto fit_fold = [&](const KernelSpec& kernel, Index rank,
                        const std::vector<Index>& idx) {
        return fit_kdmd_discrete_pairs(take_rows(x, idx), take_rows(x_next, idx),
                                       kernel, rank, dt);
    };
    auto split_err = [&](const KoopmanModel& model, const std::vector<Index>& idx) {
        return apriori_error_pairs(model, take_rows(x, idx), take_rows(x_next, idx));
    };
    return run_grid(m, sigma_grid, rank_grid, opt, fit_fold, split_err, split_err);
}

void write_surface_csv(const std::string& path, const GridSearchResult& result) {
    std::ofstream out(path);
    if (!out) throw LinalgError("write_surface_csv: cannot open " + path);
    out << "sigma,rank,mean_count,rank_clipped\n";
    out.precision(17);
    for (const auto& p : result.table) {
        out << p.sigma << ',' << p.rank << ',' << p.mean_count << ','
            << (p.rank_clipped ? 1 : 0) << '\n';
    }
}

}  // namespace koopman
