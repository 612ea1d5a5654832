#include "koopman/kdmd.hpp"

namespace koopman {

namespace {

// Khat = Sigma_r^+ Q_r^H Gprime Q_r Sigma_r^+ from the symmetric
// eigendecomposition Ghat = Q Sigma^2 Q^H, truncated to rank r.
KoopmanModel fit_core(const RealMatrix& ghat, const RealMatrix& gprime,
                      const Eigen::Ref<const RealMatrix>& states,
                      const KernelSpec& kernel, TimeDomain domain, double dt,
                      Index rank, const KdmdOptions& opt) {
    KoopmanModel model;
    model.method = FitMethod::kdmd;
    model.domain = domain;
    model.kernel = kernel;
    model.dt = dt;
    model.train_x = states;

    Eigen::SelfAdjointEigenSolver<RealMatrix> es(ghat);
    if (es.info() != Eigen::Success) {
        throw LinalgError("fit_kdmd: Gram eigendecomposition failed");
    }
    const Index m = ghat.rows();
    RealVector evals(m);
    RealMatrix q(m, m);
    for (Index i = 0; i < m; ++i) {  // descending order
        evals(i) = es.eigenvalues()(m - 1 - i);
        q.col(i) = es.eigenvectors().col(m - 1 - i);
    }

    const double cut = opt.rank_cutoff * std::max(evals(0), 0.0);
    Index num_rank = 0;
    while (num_rank < m && evals(num_rank) > cut) ++num_rank;

    if (rank < 0 || rank > m) rank = num_rank;
    Index r = std::min(rank, num_rank);
    if (r < rank) {
        model.diagnostics.warnings.push_back(
            "requested rank " + std::to_string(rank) + " exceeds numerical Gram rank " +
            std::to_string(num_rank) + "; truncated");
    }
    if (r == 0) {
        throw LinalgError("fit_kdmd: Gram matrix is numerically zero");
    }
    model.diagnostics.rank_used = r;
    model.diagnostics.gram_condition = evals(0) / evals(r - 1);

    RealVector sigma_inv = evals.head(r).cwiseSqrt().cwiseInverse();
    RealMatrix qr = q.leftCols(r);

    RealMatrix khat = sigma_inv.asDiagonal() * (qr.transpose() * gprime * qr) *
                      sigma_inv.asDiagonal();
    EigenDecomposition eig = eig_general(khat);

    model.eigenvalues = eig.values;
    model.conj_partner = eig.conj_partner;
    model.eigvec_coeffs =
        (qr * sigma_inv.asDiagonal()).cast<Complex>() * eig.vectors;

    ComplexMatrix phi_train = ghat.cast<Complex>() * model.eigvec_coeffs;
    model.modes = lstsq(phi_train, ComplexMatrix(states.cast<Complex>()));
    return model;
}

}  // namespace

KoopmanModel fit_kdmd_discrete(const Eigen::Ref<const RealMatrix>& x_traj,
                               const KernelSpec& kernel, Index rank, double dt,
                               const KdmdOptions& opt) {
    if (x_traj.rows() < 2) {
        throw LinalgError("fit_kdmd_discrete: need at least 2 snapshots");
    }
    const Index m = x_traj.rows() - 1;
    return fit_kdmd_discrete_pairs(x_traj.topRows(m), x_traj.bottomRows(m), kernel,
                                   rank, dt, opt);
}

KoopmanModel fit_kdmd_discrete_pairs(const Eigen::Ref<const RealMatrix>& x,
                                     const Eigen::Ref<const RealMatrix>& x_next,
                                     const KernelSpec& kernel, Index rank, double dt,
                                     const KdmdOptions& opt) {
    if (x.rows() != x_next.rows() || x.cols() != x_next.cols()) {
        throw LinalgError("fit_kdmd_discrete_pairs: pair shapes differ");
    }
    // Materialize the training block so later eigenfunction evaluations run
    // the Gram product on an identically laid-out matrix.
    RealMatrix xa = x;
    RealMatrix ghat = gram(kernel, xa, xa);
    RealMatrix gprime = gram(kernel, x_next, xa);
    return fit_core(ghat, gprime, xa, kernel, TimeDomain::discrete, dt, rank, opt);
}

KoopmanModel fit_kdmd_continuous(const Eigen::Ref<const RealMatrix>& x,
                                 const Eigen::Ref<const RealMatrix>& xdot,
                                 const KernelSpec& kernel, Index rank,
                                 const KdmdOptions& opt) {
    if (x.rows() != xdot.rows() || x.cols() != xdot.cols()) {
        throw LinalgError("fit_kdmd_continuous: x and xdot shapes differ");
    }
    RealMatrix xa = x;
    RealMatrix ghat = gram(kernel, xa, xa);
    RealMatrix gprime = gram_dot(kernel, xa, xdot, xa);
    return fit_core(ghat, gprime, xa, kernel, TimeDomain::continuous, 0.0, rank, opt);
}

}  // namespace koopman
