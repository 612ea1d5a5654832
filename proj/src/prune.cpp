#include "koopman/prune.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace koopman {

RealVector q_error(const KoopmanModel& model,
                   const Eigen::Ref<const RealMatrix>& val_traj, double dt) {
    if (!(dt > 0.0)) throw LinalgError("q_error: dt must be positive");
    const Index m = val_traj.rows();
    if (m < 2) throw LinalgError("q_error: need at least 2 validation samples");

    const ComplexMatrix phi = eval_eigenfunctions(model, val_traj);
    const ComplexVector mu = continuous_rates(model);
    const Index l = model.mode_count();

    RealVector q(l);
    for (Index i = 0; i < l; ++i) {
        const double rms = std::sqrt(phi.col(i).squaredNorm() / static_cast<double>(m));
        if (rms < 1e-14) {
            q(i) = std::numeric_limits<double>::infinity();
            continue;
        }
        double worst = 0.0;
        const Complex phi0 = phi(0, i);
        for (Index k = 0; k < m; ++k) {
            const Complex pred = std::exp(mu(i) * (static_cast<double>(k) * dt)) * phi0;
            worst = std::max(worst, std::abs(phi(k, i) - pred));
        }
        q(i) = worst / rms;
    }
    return q;
}

double reconstruction_error(const ComplexMatrix& phi_subset,
                            const Eigen::Ref<const RealMatrix>& states) {
    const double xnorm = states.norm();
    if (xnorm == 0.0) return 0.0;
    if (phi_subset.cols() == 0) return 1.0;
    ComplexMatrix xc = states.cast<Complex>();
    ComplexMatrix b = lstsq(phi_subset, xc);
    return (xc - phi_subset * b).norm() / xnorm;
}

RealVector r_curve(const KoopmanModel& model,
                   const Eigen::Ref<const RealMatrix>& val_traj,
                   const std::vector<Index>& order) {
    const ComplexMatrix phi = eval_eigenfunctions(model, val_traj);
    const ComplexMatrix xc = val_traj.cast<Complex>();
    const double xsq = xc.squaredNorm();
    const Index l = static_cast<Index>(order.size());
    const Index m = val_traj.rows();

    RealVector r(l);
    if (xsq == 0.0) {
        r.setZero();
        return r;
    }

    // Incremental Gram-Schmidt over the ordered eigenfunction columns;
    // ||X - QQ^H X||^2 = ||X||^2 - sum ||q^H X||^2 keeps the curve
    // nonincreasing even across numerically dependent columns.
    ComplexMatrix basis(m, l);
    Index used = 0;
    double captured = 0.0;
    for (Index k = 0; k < l; ++k) {
        ComplexVector c = phi.col(order[static_cast<size_t>(k)]);
        const double orig = c.norm();
        if (orig > 0.0) {
            for (int pass = 0; pass < 2; ++pass) {
                if (used > 0) {
                    c -= basis.leftCols(used) * (basis.leftCols(used).adjoint() * c);
                }
            }
            const double nc = c.norm();
            if (nc > 1e-12 * orig) {
                basis.col(used) = c / nc;
                captured += (basis.col(used).adjoint() * xc).squaredNorm();
                ++used;
            }
        }
        r(k) = std::sqrt(std::max(0.0, xsq - captured) / xsq);
    }
    return r;
}

PruneReport prune_report(const KoopmanModel& model,
                         const Eigen::Ref<const RealMatrix>& val_traj, double dt) {
    PruneReport report;
    report.q_errors = q_error(model, val_traj, dt);
    report.order.resize(static_cast<size_t>(report.q_errors.size()));
    std::iota(report.order.begin(), report.order.end(), Index{0});
    std::stable_sort(report.order.begin(), report.order.end(), [&](Index a, Index b) {
        if (report.q_errors(a) != report.q_errors(b)) {
            return report.q_errors(a) < report.q_errors(b);
        }
        return a < b;
    });
    report.r_curve = r_curve(model, val_traj, report.order);
    return report;
}

Index default_lhat(const PruneReport& report, double q_threshold) {
    Index lhat = 0;
    for (size_t k = 0; k < report.order.size(); ++k) {
        if (report.q_errors(report.order[k]) <= q_threshold) {
            lhat = static_cast<Index>(k + 1);
        } else {
            break;
        }
    }
    return lhat;
}

KoopmanModel select_top(const KoopmanModel& model, const PruneReport& report,
                        Index lhat) {
    if (lhat < 1 || lhat > model.mode_count()) {
        throw LinalgError("select_top: Lhat out of range");
    }
    std::vector<Index> keep(report.order.begin(), report.order.begin() + lhat);
    return select_modes(model, keep);
}

void write_prune_csv(const std::string& path, const PruneReport& report) {
    std::ofstream out(path);
    if (!out) throw LinalgError("write_prune_csv: cannot open " + path);
    out << "L_hat,Q,R,mode_index\n";
    out.precision(17);
    for (size_t k = 0; k < report.order.size(); ++k) {
        out << (k + 1) << ',' << report.q_errors(report.order[k]) << ','
            << report.r_curve(static_cast<Index>(k)) << ',' << report.order[k] << '\n';
    }
}

}  // namespace koopman
