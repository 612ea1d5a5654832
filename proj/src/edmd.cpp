#include "koopman/edmd.hpp"

#include <limits>

namespace koopman {

namespace {

// Shared normal-equation core: K = G^+ A on (optionally SVD-projected)
// features, eigendecomposition, modes by least squares against the states.
KoopmanModel fit_core(const RealMatrix& psi_x, const RealMatrix& psi_y,
                      const Eigen::Ref<const RealMatrix>& states,
                      const DictionarySpec& dict, TimeDomain domain, double dt,
                      const EdmdOptions& opt) {
    const Index l = psi_x.cols();
    KoopmanModel model;
    model.method = FitMethod::edmd;
    model.domain = domain;
    model.dictionary = dict;
    model.dt = dt;

    RealMatrix basis;  // L x r feature projection (identity when r == L)
    Index r = l;
    if (opt.svd_rank >= 0) {
        SvdResult f = svd(psi_x);
        if (opt.svd_rank > f.s.size()) {
            throw LinalgError("fit_edmd: svd_rank exceeds the number of singular values");
        }
        r = opt.svd_rank;
        basis = f.v.leftCols(r);
    }

    const RealMatrix px = basis.size() ? RealMatrix(psi_x * basis) : psi_x;
    const RealMatrix py = basis.size() ? RealMatrix(psi_y * basis) : psi_y;

    RealMatrix g = px.transpose() * px;
    RealMatrix a = px.transpose() * py;

    SvdResult gf = svd(g);
    const double rel_cut =
        static_cast<double>(g.rows()) * std::numeric_limits<double>::epsilon();
    const Index g_rank = gf.rank(rel_cut);
    model.diagnostics.rank_used = r;
    model.diagnostics.gram_condition =
        (g_rank > 0 && gf.s(g_rank - 1) > 0.0) ? gf.s(0) / gf.s(g_rank - 1) : 0.0;
    if (g_rank < g.rows()) {
        model.diagnostics.warnings.push_back(
            "G rank-deficient: numerical rank " + std::to_string(g_rank) + " of " +
            std::to_string(g.rows()) + "; condition " +
            std::to_string(model.diagnostics.gram_condition));
    }

    RealMatrix k = pinv(g) * a;
    EigenDecomposition eig = eig_general(k);

    model.eigenvalues = eig.values;
    model.conj_partner = eig.conj_partner;
    model.eigvec_coeffs =
        basis.size() ? ComplexMatrix(basis.cast<Complex>() * eig.vectors) : eig.vectors;

    ComplexMatrix phi_train = px.cast<Complex>() * eig.vectors;
    model.modes = lstsq(phi_train, ComplexMatrix(states.cast<Complex>()));
    return model;
}

}  // namespace

KoopmanModel fit_edmd_discrete(const Eigen::Ref<const RealMatrix>& x_traj,
                               const DictionarySpec& dict, double dt,
                               const EdmdOptions& opt) {
    if (x_traj.rows() < 2) {
        throw LinalgError("fit_edmd_discrete: need at least 2 snapshots");
    }
    const Index m = x_traj.rows() - 1;
    return fit_edmd_discrete_pairs(x_traj.topRows(m), x_traj.bottomRows(m), dict, dt, opt);
}

KoopmanModel fit_edmd_discrete_pairs(const Eigen::Ref<const RealMatrix>& x,
                                     const Eigen::Ref<const RealMatrix>& x_next,
                                     const DictionarySpec& dict, double dt,
                                     const EdmdOptions& opt) {
    if (x.rows() != x_next.rows() || x.cols() != x_next.cols()) {
        throw LinalgError("fit_edmd_discrete_pairs: pair shapes differ");
    }
    RealMatrix psi_x = eval_dictionary(dict, x);
    RealMatrix psi_y = eval_dictionary(dict, x_next);
    return fit_core(psi_x, psi_y, x, dict, TimeDomain::discrete, dt, opt);
}

KoopmanModel fit_edmd_continuous(const Eigen::Ref<const RealMatrix>& x,
                                 const Eigen::Ref<const RealMatrix>& xdot,
                                 const DictionarySpec& dict, const EdmdOptions& opt) {
    if (x.rows() != xdot.rows() || x.cols() != xdot.cols()) {
        throw LinalgError("fit_edmd_continuous: x and xdot shapes differ");
    }
    RealMatrix psi_x = eval_dictionary(dict, x);
    RealMatrix psi_y = eval_dictionary_dot(dict, x, xdot);
    return fit_core(psi_x, psi_y, x, dict, TimeDomain::continuous, 0.0, opt);
}

}  // namespace koopman
