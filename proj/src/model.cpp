#include "koopman/model.hpp"

#include <cmath>
#include <limits>

namespace koopman {

Index KoopmanModel::state_dim() const {
    if (modes.size() > 0) return modes.cols();
    return method == FitMethod::edmd ? dictionary.state_dim : train_x.cols();
}

ComplexMatrix eval_eigenfunctions(const KoopmanModel& model,
                                  const Eigen::Ref<const RealMatrix>& x) {
    if (model.method == FitMethod::edmd) {
        return eval_dictionary(model.dictionary, x).cast<Complex>() * model.eigvec_coeffs;
    }
    return gram(model.kernel, x, model.train_x).cast<Complex>() * model.eigvec_coeffs;
}

ComplexMatrix eval_eigenfunction_dot(const KoopmanModel& model,
                                     const Eigen::Ref<const RealMatrix>& x,
                                     const Eigen::Ref<const RealMatrix>& xdot) {
    if (model.method == FitMethod::edmd) {
        return eval_dictionary_dot(model.dictionary, x, xdot).cast<Complex>() *
               model.eigvec_coeffs;
    }
    return gram_dot(model.kernel, x, xdot, model.train_x).cast<Complex>() *
           model.eigvec_coeffs;
}

ComplexVector continuous_rates(const KoopmanModel& model) {
    if (model.domain == TimeDomain::continuous) return model.eigenvalues;
    if (!(model.dt > 0.0)) {
        throw LinalgError("continuous_rates: discrete model lacks a sampling interval");
    }
    ComplexVector mu(model.eigenvalues.size());
    for (Index i = 0; i < mu.size(); ++i) {
        mu(i) = std::log(model.eigenvalues(i)) / model.dt;
    }
    return mu;
}

ComplexVector step_multipliers(const KoopmanModel& model, double dt_step) {
    ComplexVector mu = continuous_rates(model);
    ComplexVector lam(mu.size());
    for (Index i = 0; i < mu.size(); ++i) lam(i) = std::exp(mu(i) * dt_step);
    return lam;
}

KoopmanModel select_modes(const KoopmanModel& model, const std::vector<Index>& keep) {
    KoopmanModel out = model;
    const Index k = static_cast<Index>(keep.size());
    out.eigenvalues.resize(k);
    out.eigvec_coeffs.resize(model.eigvec_coeffs.rows(), k);
    out.modes.resize(k, model.modes.cols());
    for (Index i = 0; i < k; ++i) {
        const Index src = keep[static_cast<size_t>(i)];
        if (src < 0 || src >= model.mode_count()) {
            throw LinalgError("select_modes: index out of range");
        }
        out.eigenvalues(i) = model.eigenvalues(src);
        out.eigvec_coeffs.col(i) = model.eigvec_coeffs.col(src);
        if (model.modes.rows() == model.mode_count()) {
            out.modes.row(i) = model.modes.row(src);
        }
    }
    if (model.modes.rows() != model.mode_count()) out.modes.resize(0, model.modes.cols());
    out.conj_partner = conjugate_pairs(out.eigenvalues);
    return out;
}

std::vector<Index> conjugate_pairs(const ComplexVector& values) {
    const Index n = values.size();
    std::vector<Index> partner(static_cast<size_t>(n));
    std::vector<bool> done(static_cast<size_t>(n), false);
    double scale = 0.0;
    for (Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(values(i)));
    const double real_tol = 1e-12 * std::max(1.0, scale);
    const double match_tol = 1e-8 * std::max(1.0, scale);

    for (Index i = 0; i < n; ++i) partner[static_cast<size_t>(i)] = i;
    for (Index i = 0; i < n; ++i) {
        if (done[static_cast<size_t>(i)]) continue;
        if (std::abs(values(i).imag()) <= real_tol) {
            done[static_cast<size_t>(i)] = true;
            continue;
        }
        Index best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (Index j = i + 1; j < n; ++j) {
            if (done[static_cast<size_t>(j)]) continue;
            const double d = std::abs(values(j) - std::conj(values(i)));
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        done[static_cast<size_t>(i)] = true;
        if (best >= 0 && best_d <= match_tol) {
            partner[static_cast<size_t>(i)] = best;
            partner[static_cast<size_t>(best)] = i;
            done[static_cast<size_t>(best)] = true;
        }
    }
    return partner;
}

}  // namespace koopman
