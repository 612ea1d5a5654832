#include "koopman/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace koopman {

DmdModel fit_dmd(const Eigen::Ref<const RealMatrix>& x_traj, Index rank, double dt) {
    if (x_traj.rows() < 2) throw LinalgError("fit_dmd: need at least 2 snapshots");
    const Index m = x_traj.rows() - 1;

    RealMatrix y1 = x_traj.topRows(m).transpose();     // N x (M-1), states as columns
    RealMatrix y2 = x_traj.bottomRows(m).transpose();

    SvdResult f = svd(y1);
    const double rel_cut = static_cast<double>(std::max(y1.rows(), y1.cols())) *
                           std::numeric_limits<double>::epsilon();
    const Index num_rank = f.rank(rel_cut);
    Index r = std::min<Index>(rank < 0 ? num_rank : rank, num_rank);
    if (r < 1) throw LinalgError("fit_dmd: data matrix is numerically zero");
    SvdResult fr = truncate_rank(f, r);

    RealMatrix a_tilde = fr.u.transpose() * y2 * fr.v * fr.s.cwiseInverse().asDiagonal();
    EigenDecomposition eig = eig_general(a_tilde);

    DmdModel dmd;
    dmd.dt = dt;
    dmd.eigenvalues = eig.values;
    dmd.conj_partner = eig.conj_partner;
    dmd.modes.resize(r, x_traj.cols());
    for (Index i = 0; i < r; ++i) {
        ComplexVector phi = fr.u.cast<Complex>() * eig.vectors.col(i);
        const double nphi = phi.norm();
        if (nphi > 0.0) phi /= nphi;
        dmd.modes.row(i) = phi.transpose();
    }

    // Amplitudes from min_a ||X - T diag(a) Phi||_F via the normal equations
    // P a = q with P = (T^H T) o conj(Phi Phi^H), q_i = t_i^H X conj(phi_i).
    ComplexMatrix t = dmd_vandermonde(dmd, x_traj.rows());
    ComplexMatrix xc = x_traj.cast<Complex>();
    ComplexMatrix p = (t.adjoint() * t).cwiseProduct((dmd.modes * dmd.modes.adjoint()).conjugate());
    ComplexVector q(r);
    for (Index i = 0; i < r; ++i) {
        q(i) = (t.col(i).adjoint() * xc * dmd.modes.row(i).transpose().conjugate())(0, 0);
    }
    dmd.amplitudes = lstsq(p, ComplexMatrix(q)).col(0);
    return dmd;
}

ComplexMatrix dmd_vandermonde(const DmdModel& dmd, Index m_rows) {
    const Index r = dmd.eigenvalues.size();
    ComplexMatrix t(m_rows, r);
    for (Index i = 0; i < r; ++i) {
        Complex v = 1.0;
        for (Index k = 0; k < m_rows; ++k) {
            t(k, i) = v;
            v *= dmd.eigenvalues(i);
        }
    }
    return t;
}

ComplexMatrix dmd_reconstruction(const DmdModel& dmd, Index m_rows) {
    return dmd_vandermonde(dmd, m_rows) * dmd.amplitudes.asDiagonal() * dmd.modes;
}

namespace {

// Quadratic data for the amplitude problem: (1/2M) a^H P a - (1/M) Re(a^H q) + c.
struct AmplitudeQuadratic {
    ComplexMatrix p;
    ComplexVector q;
    double x_sq = 0.0;
    double m = 1.0;

    double objective(const ComplexVector& a, double gamma) const {
        const double quad =
            (a.adjoint() * p * a)(0, 0).real() - 2.0 * (a.adjoint() * q)(0, 0).real() + x_sq;
        return quad / (2.0 * m) + gamma * a.cwiseAbs().sum();
    }
};

AmplitudeQuadratic amplitude_quadratic(const DmdModel& dmd, const ComplexMatrix& xc) {
    AmplitudeQuadratic out;
    const Index r = dmd.eigenvalues.size();
    ComplexMatrix t = dmd_vandermonde(dmd, xc.rows());
    out.p = (t.adjoint() * t).cwiseProduct((dmd.modes * dmd.modes.adjoint()).conjugate());
    out.q.resize(r);
    for (Index i = 0; i < r; ++i) {
        out.q(i) = (t.col(i).adjoint() * xc * dmd.modes.row(i).transpose().conjugate())(0, 0);
    }
    out.x_sq = xc.squaredNorm();
    out.m = static_cast<double>(xc.rows());
    return out;
}

Complex soft_threshold(Complex v, double t) {
    const double a = std::abs(v);
    if (a <= t) return Complex(0.0, 0.0);
    return v * ((a - t) / a);
}

}  // namespace

SpdmdResult fit_spdmd(const DmdModel& dmd, const Eigen::Ref<const RealMatrix>& x,
                      double gamma, const SpdmdOptions& opt) {
    const Index r = dmd.eigenvalues.size();
    ComplexMatrix xc = x.cast<Complex>();
    AmplitudeQuadratic quad = amplitude_quadratic(dmd, xc);

    ComplexMatrix lhs = quad.p / quad.m;
    lhs.diagonal().array() += opt.rho_admm;
    Eigen::LDLT<ComplexMatrix> factor(lhs);
    if (factor.info() != Eigen::Success) {
        throw LinalgError("fit_spdmd: ADMM system factorization failed");
    }

    ComplexVector a = ComplexVector::Zero(r);
    ComplexVector z = ComplexVector::Zero(r);
    ComplexVector u = ComplexVector::Zero(r);

    SpdmdResult res;
    const double sqrt_r = std::sqrt(static_cast<double>(r));
    for (int it = 0; it < opt.max_iter; ++it) {
        a = factor.solve(quad.q / quad.m + opt.rho_admm * (z - u));
        ComplexVector z_old = z;
        for (Index i = 0; i < r; ++i) {
            z(i) = soft_threshold(a(i) + u(i), gamma / opt.rho_admm);
        }
        u += a - z;

        res.objective_history.push_back(quad.objective(z, gamma));
        res.iterations = it + 1;

        const double r_prim = (a - z).norm();
        const double s_dual = opt.rho_admm * (z - z_old).norm();
        const double eps_pri =
            sqrt_r * opt.abs_tol + opt.rel_tol * std::max(a.norm(), z.norm());
        const double eps_dual = sqrt_r * opt.abs_tol + opt.rel_tol * (opt.rho_admm * u).norm();
        if (r_prim <= eps_pri && s_dual <= eps_dual) {
            res.converged = true;
            break;
        }
    }

    res.amplitudes = z;
    for (Index i = 0; i < r; ++i) {
        if (z(i) != Complex(0.0, 0.0)) res.support.push_back(i);
    }
    return res;
}

ComplexVector spdmd_support_cd(const DmdModel& dmd,
                               const Eigen::Ref<const RealMatrix>& x, double gamma,
                               double tol, int max_sweeps) {
    ComplexMatrix xc = x.cast<Complex>();
    AmplitudeQuadratic quad = amplitude_quadratic(dmd, xc);
    const Index r = dmd.eigenvalues.size();

    ComplexVector a = ComplexVector::Zero(r);
    ComplexVector pa = ComplexVector::Zero(r);  // running P a
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_update = 0.0;
        for (Index i = 0; i < r; ++i) {
            const double pii = quad.p(i, i).real();
            const Complex c = (quad.q(i) - pa(i) + quad.p(i, i) * a(i)) / quad.m;
            Complex next(0.0, 0.0);
            if (pii > 0.0) next = soft_threshold(c, gamma) / (pii / quad.m);
            const Complex delta = next - a(i);
            if (delta != Complex(0.0, 0.0)) {
                pa += quad.p.col(i) * delta;
                a(i) = next;
            }
            max_update = std::max(max_update, std::abs(delta));
        }
        if (max_update <= tol) break;
    }
    return a;
}

double spdmd_kkt_violation(const DmdModel& dmd, const Eigen::Ref<const RealMatrix>& x,
                           const ComplexVector& a, double gamma) {
    ComplexMatrix xc = x.cast<Complex>();
    AmplitudeQuadratic quad = amplitude_quadratic(dmd, xc);
    ComplexVector grad = (quad.p * a - quad.q) / quad.m;
    double worst = 0.0;
    for (Index i = 0; i < a.size(); ++i) {
        if (a(i) == Complex(0.0, 0.0)) {
            worst = std::max(worst, std::abs(grad(i)) - gamma);
        } else {
            worst = std::max(worst, std::abs(grad(i) + gamma * a(i) / std::abs(a(i))));
        }
    }
    return worst;
}

RealVector kou_energy(const ComplexVector& step_multipliers,
                      const ComplexVector& amplitudes, Index m) {
    if (step_multipliers.size() != amplitudes.size()) {
        throw LinalgError("kou_energy: size mismatch");
    }
    RealVector betas = kou_betas(step_multipliers, m);
    return betas.cwiseProduct(amplitudes.cwiseAbs());
}

RealVector kou_energy(const DmdModel& dmd, Index m) {
    return kou_energy(dmd.eigenvalues, dmd.amplitudes, m);
}

RealVector kou_betas(const ComplexVector& step_multipliers, Index m) {
    RealVector betas(step_multipliers.size());
    for (Index i = 0; i < betas.size(); ++i) {
        const double b = std::abs(step_multipliers(i));
        if (std::abs(b - 1.0) < 1e-9) {
            betas(i) = static_cast<double>(m);
        } else {
            betas(i) = (1.0 - std::pow(b, static_cast<double>(m))) / (1.0 - b);
        }
    }
    return betas;
}

ComplexVector koopman_amplitudes(const KoopmanModel& model,
                                 const Eigen::Ref<const RealMatrix>& x0) {
    ComplexMatrix phi = eval_eigenfunctions(model, x0.topRows(1));
    ComplexVector amp(model.mode_count());
    for (Index i = 0; i < amp.size(); ++i) {
        amp(i) = phi(0, i) * model.modes.row(i).norm();
    }
    return amp;
}

ProxL0Result prox_weighted_l0(const DmdModel& dmd, const ComplexMatrix& x_dmd,
                              const ProxL0Options& opt) {
    const Index r = dmd.eigenvalues.size();
    AmplitudeQuadratic quad = amplitude_quadratic(dmd, x_dmd);
    quad.m = 1.0;  // Q uses the plain 1/2 scaling

    ProxL0Result res;
    res.weights = opt.weights.size()
                      ? opt.weights
                      : RealVector(kou_betas(dmd.eigenvalues, x_dmd.rows())
                                       .cwiseAbs()
                                       .cwiseInverse()
                                       .array()
                                       .square()
                                       .matrix());

    ComplexVector a = dmd.amplitudes;
    res.iterates.push_back(a);
    for (int k = 0; k < opt.steps; ++k) {
        const double eta = (k == 0) ? opt.eta_first : opt.eta;
        ComplexVector grad = quad.p * a - quad.q;
        a -= eta * grad;
        if (opt.lambda > 0.0) {
            const double thr = std::sqrt(opt.lambda * eta);
            for (Index i = 0; i < r; ++i) {
                if (std::abs(a(i)) / std::sqrt(res.weights(i)) < thr) {
                    a(i) = Complex(0.0, 0.0);
                }
            }
        }
        res.iterates.push_back(a);
    }
    return res;
}

}  // namespace koopman
