#include "koopman/sparsify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace koopman {

double l21_norm(const ComplexMatrix& w) {
    double total = 0.0;
    for (Index i = 0; i < w.rows(); ++i) total += w.row(i).norm();
    return total;
}

double elastic_net_objective(const ComplexMatrix& features,
                             const Eigen::Ref<const RealMatrix>& targets,
                             const ComplexMatrix& coeffs, double alpha, double rho) {
    const double m = static_cast<double>(features.rows());
    const double fit =
        (targets.cast<Complex>() - features * coeffs).squaredNorm() / (2.0 * m);
    return fit + alpha * rho * l21_norm(coeffs) +
           0.5 * alpha * (1.0 - rho) * coeffs.squaredNorm();
}

double max_alpha(const ComplexMatrix& features,
                 const Eigen::Ref<const RealMatrix>& targets, double rho) {
    const double m = static_cast<double>(features.rows());
    ComplexMatrix corr = features.adjoint() * targets.cast<Complex>();
    double best = 0.0;
    for (Index i = 0; i < corr.rows(); ++i) best = std::max(best, corr.row(i).norm());
    return best / (m * rho);
}

namespace {

void validate_pairs(const std::vector<Index>& pairs, Index l) {
    for (Index i = 0; i < static_cast<Index>(pairs.size()); ++i) {
        const Index j = pairs[static_cast<size_t>(i)];
        if (j < 0 || j >= l || pairs[static_cast<size_t>(j)] != i) {
            throw LinalgError("multitask_elasticnet: invalid conjugate-pair map");
        }
    }
}

}  // namespace

MultitaskResult multitask_elasticnet(const ComplexMatrix& features,
                                     const Eigen::Ref<const RealMatrix>& targets,
                                     double alpha, double rho,
                                     const MultitaskOptions& opt) {
    if (!(alpha > 0.0)) throw LinalgError("multitask_elasticnet: alpha must be > 0");
    if (!(rho > 0.0 && rho <= 1.0)) {
        throw LinalgError("multitask_elasticnet: rho must lie in (0,1]");
    }
    if (features.rows() != targets.rows()) {
        throw LinalgError("multitask_elasticnet: row counts differ");
    }
    const Index m = features.rows();
    const Index l = features.cols();
    const Index n = targets.cols();
    if (!opt.conj_partner.empty() &&
        static_cast<Index>(opt.conj_partner.size()) != l) {
        throw LinalgError("multitask_elasticnet: pair map size mismatch");
    }
    if (!opt.conj_partner.empty()) validate_pairs(opt.conj_partner, l);

    const double md = static_cast<double>(m);
    RealVector col_sq(l);
    for (Index i = 0; i < l; ++i) col_sq(i) = features.col(i).squaredNorm() / md;

    MultitaskResult res;
    res.coeffs = (opt.warm_start && opt.warm_start->rows() == l &&
                  opt.warm_start->cols() == n)
                     ? *opt.warm_start
                     : ComplexMatrix::Zero(l, n);
    ComplexMatrix resid = targets.cast<Complex>() - features * res.coeffs;

    const double ridge = alpha * (1.0 - rho);
    const double group = alpha * rho;

    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
        double max_update = 0.0;
        for (Index i = 0; i < l; ++i) {
            // Exact block minimizer for complex row i: group soft threshold.
            Eigen::RowVectorXcd c =
                (features.col(i).adjoint() * resid) / md + col_sq(i) * res.coeffs.row(i);
            const double cn = c.norm();
            Eigen::RowVectorXcd next;
            if (cn > group && col_sq(i) + ridge > 0.0) {
                next = c * ((1.0 - group / cn) / (col_sq(i) + ridge));
            } else {
                next = Eigen::RowVectorXcd::Zero(n);
            }
            Eigen::RowVectorXcd delta = next - res.coeffs.row(i);
            const double dn = delta.norm();
            if (dn > 0.0) {
                resid.noalias() -= features.col(i) * delta;
                res.coeffs.row(i) = next;
            }
            max_update = std::max(max_update, dn);
        }

        // Keep conjugate-paired rows exact conjugates. The objective is
        // invariant under the pair swap, so projecting onto the symmetric
        // subspace cannot increase it.
        if (!opt.conj_partner.empty()) {
            for (Index i = 0; i < l; ++i) {
                const Index j = opt.conj_partner[static_cast<size_t>(i)];
                if (j <= i) continue;
                Eigen::RowVectorXcd avg =
                    0.5 * (res.coeffs.row(i) + res.coeffs.row(j).conjugate());
                Eigen::RowVectorXcd di = avg - res.coeffs.row(i);
                Eigen::RowVectorXcd dj = avg.conjugate() - res.coeffs.row(j);
                if (di.norm() > 0.0 || dj.norm() > 0.0) {
                    resid.noalias() -= features.col(i) * di;
                    resid.noalias() -= features.col(j) * dj;
                    res.coeffs.row(i) = avg;
                    res.coeffs.row(j) = avg.conjugate();
                }
            }
        }

        if (opt.record_objective) {
            res.objective_history.push_back(
                elastic_net_objective(features, targets, res.coeffs, alpha, rho));
        }
        res.sweeps = sweep + 1;
        res.final_update_norm = max_update;
        if (max_update <= opt.tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

double kkt_violation(const ComplexMatrix& features,
                     const Eigen::Ref<const RealMatrix>& targets,
                     const ComplexMatrix& coeffs, double alpha, double rho) {
    const double md = static_cast<double>(features.rows());
    ComplexMatrix resid = targets.cast<Complex>() - features * coeffs;
    double worst = 0.0;
    for (Index i = 0; i < features.cols(); ++i) {
        Eigen::RowVectorXcd corr = (features.col(i).adjoint() * resid) / md;
        const double row_norm = coeffs.row(i).norm();
        if (row_norm == 0.0) {
            worst = std::max(worst, corr.norm() - alpha * rho);
        } else {
            Eigen::RowVectorXcd stat = -corr + alpha * (1.0 - rho) * coeffs.row(i) +
                                       alpha * rho * coeffs.row(i) / row_norm;
            worst = std::max(worst, stat.norm());
        }
    }
    return worst;
}

ComplexMatrix aposteriori_features_scaled(const ComplexVector& rates, Index m,
                                          double dt) {
    if (!(dt > 0.0)) throw LinalgError("aposteriori_features: dt must be positive");
    ComplexMatrix out(m, rates.size());
    for (Index i = 0; i < rates.size(); ++i) {
        const Complex step = std::exp(rates(i) * dt);
        Complex v = 1.0;
        for (Index k = 0; k < m; ++k) {
            out(k, i) = v;
            v *= step;
        }
    }
    return out;
}

ComplexVector initial_eigenfunction_values(const KoopmanModel& model,
                                           const Eigen::Ref<const RealMatrix>& x1) {
    ComplexMatrix phi = eval_eigenfunctions(model, x1.topRows(1));
    for (Index i = 0; i < phi.cols(); ++i) {
        if (std::abs(phi(0, i)) < 1e-12) {
            throw LinalgError(
                "aposteriori features: eigenfunction " + std::to_string(i) +
                " is degenerate at the initial state (|phi(x1)| < 1e-12)");
        }
    }
    return phi.row(0).transpose();
}

namespace {

Index count_nonzero_rows(const ComplexMatrix& b, double entry_eps) {
    Index count = 0;
    for (Index i = 0; i < b.rows(); ++i) {
        for (Index j = 0; j < b.cols(); ++j) {
            if (b(i, j) != Complex(0.0, 0.0) && std::abs(b(i, j)) >= entry_eps) {
                ++count;
                break;
            }
        }
    }
    return count;
}

std::vector<Index> support_rows(const ComplexMatrix& b, double entry_eps) {
    std::vector<Index> rows;
    for (Index i = 0; i < b.rows(); ++i) {
        for (Index j = 0; j < b.cols(); ++j) {
            if (std::abs(b(i, j)) >= entry_eps && b(i, j) != Complex(0.0, 0.0)) {
                rows.push_back(i);
                break;
            }
        }
    }
    return rows;
}

double support_refit_residual(const ComplexMatrix& features,
                              const Eigen::Ref<const RealMatrix>& targets,
                              const std::vector<Index>& rows) {
    const double xnorm = targets.norm();
    if (xnorm == 0.0) return 0.0;
    if (rows.empty()) return 1.0;
    ComplexMatrix sub(features.rows(), static_cast<Index>(rows.size()));
    for (size_t k = 0; k < rows.size(); ++k) sub.col(static_cast<Index>(k)) = features.col(rows[k]);
    ComplexMatrix xc = targets.cast<Complex>();
    return (xc - sub * lstsq(sub, xc)).norm() / xnorm;
}

}  // namespace

SparsePath alpha_sweep(const ComplexMatrix& features_scaled,
                       const Eigen::Ref<const RealMatrix>& targets, double rho,
                       const SweepOptions& opt) {
    if (opt.n_alphas < 2) throw LinalgError("alpha_sweep: need at least 2 alphas");
    const double amax = max_alpha(features_scaled, targets, rho);
    if (!(amax > 0.0)) throw LinalgError("alpha_sweep: targets are identically zero");

    SparsePath path;
    path.rho = rho;
    path.eps = opt.eps;
    const double xnorm = targets.norm();

    ComplexMatrix warm = ComplexMatrix::Zero(features_scaled.cols(), targets.cols());
    for (int k = 0; k < opt.n_alphas; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(opt.n_alphas - 1);
        const double alpha = amax * std::pow(opt.alpha_min_ratio, t);

        MultitaskOptions solver = opt.solver;
        solver.warm_start = &warm;
        solver.record_objective = false;
        MultitaskResult sol = multitask_elasticnet(features_scaled, targets, alpha, rho, solver);
        warm = sol.coeffs;

        SparsePathEntry entry;
        entry.alpha = alpha;
        entry.coeffs = sol.coeffs;
        entry.solver_nonzero_rows = count_nonzero_rows(sol.coeffs, 0.0);
        entry.nonzero_rows = count_nonzero_rows(sol.coeffs, opt.eps);
        entry.penalized_residual =
            xnorm == 0.0 ? 0.0
                         : (targets.cast<Complex>() - features_scaled * sol.coeffs).norm() / xnorm;
        entry.refit_residual = support_refit_residual(
            features_scaled, targets, support_rows(sol.coeffs, opt.eps));
        entry.sweeps = sol.sweeps;
        entry.converged = sol.converged;
        path.entries.push_back(std::move(entry));
    }
    return path;
}

Index select_alpha_auto(const SparsePath& path) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : path.entries) {
        if (e.nonzero_rows > 0) best = std::min(best, e.refit_residual);
    }
    if (!std::isfinite(best)) {
        throw LinalgError("select_alpha_auto: no entry retains any mode");
    }
    for (size_t k = 0; k < path.entries.size(); ++k) {
        const auto& e = path.entries[k];
        if (e.nonzero_rows > 0 && e.refit_residual <= 1.1 * best + 1e-15) {
            return static_cast<Index>(k);
        }
    }
    return static_cast<Index>(path.entries.size() - 1);
}

SparseSelection threshold_and_refit(const KoopmanModel& model_top,
                                    const SparsePath& path, double selected_alpha,
                                    double eps,
                                    const Eigen::Ref<const RealMatrix>& targets,
                                    const ComplexMatrix& features_unscaled) {
    const SparsePathEntry* entry = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& e : path.entries) {
        const double d = std::abs(e.alpha - selected_alpha);
        if (d < best_d) {
            best_d = d;
            entry = &e;
        }
    }
    if (!entry || best_d > 1e-9 * std::max(1.0, selected_alpha)) {
        throw LinalgError("threshold_and_refit: selected alpha is not on the path");
    }

    ComplexMatrix b = entry->coeffs;
    for (Index i = 0; i < b.rows(); ++i) {
        for (Index j = 0; j < b.cols(); ++j) {
            if (std::abs(b(i, j)) < eps) b(i, j) = Complex(0.0, 0.0);
        }
    }
    std::vector<Index> kept = support_rows(b, 0.0);
    if (kept.empty()) {
        throw LinalgError(
            "threshold_and_refit: every row thresholded away; decrease alpha or eps");
    }

    ComplexMatrix sub(features_unscaled.rows(), static_cast<Index>(kept.size()));
    for (size_t k = 0; k < kept.size(); ++k) {
        sub.col(static_cast<Index>(k)) = features_unscaled.col(kept[k]);
    }
    ComplexMatrix xc = targets.cast<Complex>();
    ComplexMatrix refit = lstsq(sub, xc);

    SparseSelection sel;
    sel.kept = kept;
    sel.thresholded_coeffs = b;
    sel.model = select_modes(model_top, kept);
    sel.model.modes = refit;
    const double xnorm = targets.norm();
    sel.refit_residual = xnorm == 0.0 ? 0.0 : (xc - sub * refit).norm() / xnorm;
    sel.penalized_residual = entry->penalized_residual;
    return sel;
}

void write_path_csv(const std::string& path, const SparsePath& sparse_path) {
    std::ofstream out(path);
    if (!out) throw LinalgError("write_path_csv: cannot open " + path);
    const Index rows =
        sparse_path.entries.empty() ? 0 : sparse_path.entries.front().coeffs.rows();
    out << "alpha,nonzero_rows,solver_nonzero_rows,penalized_residual,refit_residual,"
           "sweeps,converged";
    for (Index i = 0; i < rows; ++i) out << ",row_norm_" << i;
    out << '\n';
    out.precision(17);
    for (const auto& e : sparse_path.entries) {
        out << e.alpha << ',' << e.nonzero_rows << ',' << e.solver_nonzero_rows << ','
            << e.penalized_residual << ',' << e.refit_residual << ',' << e.sweeps << ','
            << (e.converged ? 1 : 0);
        for (Index i = 0; i < e.coeffs.rows(); ++i) out << ',' << e.coeffs.row(i).norm();
        out << '\n';
    }
}

}  // namespace koopman
