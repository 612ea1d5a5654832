#include "koopman/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace koopman {

RealMatrix FixedPointSystem::flow(const Eigen::Ref<const RealMatrix>& x0,
                                  double t) const {
    const double c = manifold_coeff();
    RealMatrix out(x0.rows(), 2);
    for (Index i = 0; i < x0.rows(); ++i) {
        const double x1 = x0(i, 0), x2 = x0(i, 1);
        const double x1t = x1 * std::exp(mu * t);
        out(i, 0) = x1t;
        out(i, 1) = (x2 - c * x1 * x1) * std::exp(lambda * t) + c * x1t * x1t;
    }
    return out;
}

RealMatrix FixedPointSystem::rhs(const Eigen::Ref<const RealMatrix>& x) const {
    RealMatrix out(x.rows(), 2);
    out.col(0) = mu * x.col(0);
    out.col(1) = lambda * (x.col(1).array() - x.col(0).array().square()).matrix();
    return out;
}

SnapshotSet generate_fixed_point_lhs(Index m, double lo, double hi,
                                     std::uint64_t seed,
                                     const FixedPointSystem& sys) {
    if (m < 1 || !(hi > lo)) {
        throw LinalgError("generate_fixed_point_lhs: need m >= 1 and hi > lo");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double width = (hi - lo) / static_cast<double>(m);

    SnapshotSet set;
    set.states.resize(m, 2);
    // Stratified permutation sampling: one jittered stratum per sample per axis.
    for (int d = 0; d < 2; ++d) {
        std::vector<Index> strata(static_cast<size_t>(m));
        std::iota(strata.begin(), strata.end(), Index{0});
        std::shuffle(strata.begin(), strata.end(), rng);
        for (Index i = 0; i < m; ++i) {
            set.states(i, d) =
                lo + (static_cast<double>(strata[static_cast<size_t>(i)]) + unit(rng)) * width;
        }
    }
    set.derivatives = sys.rhs(set.states);
    set.provenance = {"generated", "fixed_point", "lhs", seed, "mt19937_64", ""};
    return set;
}

SnapshotSet generate_fixed_point_trajectory(const Eigen::Vector2d& x0, double dt,
                                            double t_end,
                                            const FixedPointSystem& sys) {
    if (!(dt > 0.0) || !(t_end >= 0.0)) {
        throw LinalgError("generate_fixed_point_trajectory: dt > 0, t_end >= 0 required");
    }
    const Index m = static_cast<Index>(std::floor(t_end / dt + 1e-9)) + 1;
    SnapshotSet set;
    set.states.resize(m, 2);
    RealMatrix start = x0.transpose();
    for (Index k = 0; k < m; ++k) {
        set.states.row(k) = sys.flow(start, static_cast<double>(k) * dt).row(0);
    }
    set.derivatives = sys.rhs(set.states);
    set.dt = dt;
    set.provenance = {"generated", "fixed_point", "trajectory", 0, "mt19937_64", ""};
    return set;
}

RealMatrix HopfSystem::flow(const Eigen::Ref<const RealMatrix>& x0, double t) const {
    RealMatrix out(x0.rows(), 3);
    for (Index i = 0; i < x0.rows(); ++i) {
        const double r0 = std::hypot(x0(i, 0), x0(i, 1));
        const double th0 = std::atan2(x0(i, 1), x0(i, 0));
        // rdot = mu_h r - r^3: r(t)^2 = mu_h r0^2 e^{2 mu_h t} /
        //                               (mu_h + r0^2 (e^{2 mu_h t} - 1))
        const double e2 = std::exp(2.0 * mu_h * t);
        const double r2 = mu_h * r0 * r0 * e2 / (mu_h + r0 * r0 * (e2 - 1.0));
        const double r = std::sqrt(std::max(0.0, r2));
        const double th = th0 + omega * t;
        out(i, 0) = r * std::cos(th);
        out(i, 1) = r * std::sin(th);
        out(i, 2) = x0(i, 2) * std::exp(-kappa * t);
    }
    return out;
}

SnapshotSet generate_hopf_trajectory(const Eigen::Vector3d& x0, double dt,
                                     double t_end, const HopfSystem& sys) {
    if (!(dt > 0.0) || !(t_end >= 0.0)) {
        throw LinalgError("generate_hopf_trajectory: dt > 0, t_end >= 0 required");
    }
    const Index m = static_cast<Index>(std::floor(t_end / dt + 1e-9)) + 1;
    SnapshotSet set;
    set.states.resize(m, 3);
    RealMatrix start = x0.transpose();
    for (Index k = 0; k < m; ++k) {
        set.states.row(k) = sys.flow(start, static_cast<double>(k) * dt).row(0);
    }
    set.dt = dt;
    set.provenance = {"generated", "hopf", "trajectory", 0, "mt19937_64", ""};
    return set;
}

PodReduction pod_reduce(const SnapshotSet& full, Index k, double energy) {
    const Index m = full.rows();
    if (m < 1) throw LinalgError("pod_reduce: empty snapshot set");
    PodReduction out;
    out.pod.mean = full.states.colwise().mean();
    RealMatrix centered = full.states.rowwise() - out.pod.mean.transpose();
    SvdResult f = svd(centered);
    out.pod.singular_values = f.s;

    const double total = f.s.squaredNorm();
    if (k < 0) {
        if (!(energy > 0.0 && energy <= 1.0)) {
            throw LinalgError("pod_reduce: energy must lie in (0,1] when k < 0");
        }
        double acc = 0.0;
        k = 0;
        while (k < f.s.size() && (total == 0.0 ? false : acc / total < energy)) {
            acc += f.s(k) * f.s(k);
            ++k;
        }
    }
    if (k > f.s.size()) throw LinalgError("pod_reduce: k exceeds available rank");
    out.pod.basis = f.v.leftCols(k);
    out.pod.energy_fraction = total == 0.0 ? 1.0 : f.s.head(k).squaredNorm() / total;

    out.coefficients = full;
    out.coefficients.states = centered * out.pod.basis;
    if (full.has_derivatives()) {
        out.coefficients.derivatives = full.derivatives * out.pod.basis;
    }
    return out;
}

RealMatrix pod_lift(const PodBasis& pod, const Eigen::Ref<const RealMatrix>& coeffs) {
    return (coeffs * pod.basis.transpose()).rowwise() + pod.mean.transpose();
}

TrainValTest stride_split(const SnapshotSet& traj) {
    TrainValTest out;
    SnapshotSet* children[3] = {&out.train, &out.val, &out.test};
    for (int c = 0; c < 3; ++c) {
        const Index rows = (traj.rows() - c + 2) / 3;
        children[c]->states.resize(rows, traj.cols());
        if (traj.has_derivatives()) children[c]->derivatives.resize(rows, traj.cols());
        children[c]->dt = 3.0 * traj.dt;
        children[c]->normalization = traj.normalization;
        children[c]->provenance = traj.provenance;
    }
    for (Index i = 0; i < traj.rows(); ++i) {
        SnapshotSet* child = children[i % 3];
        const Index row = i / 3;
        child->states.row(row) = traj.states.row(i);
        if (traj.has_derivatives()) child->derivatives.row(row) = traj.derivatives.row(i);
    }
    return out;
}

RealMatrix predict(const KoopmanModel& model, const Eigen::Ref<const RealVector>& x0,
                   Index horizon, double dt_step, double* imag_residual) {
    if (!(dt_step > 0.0)) throw LinalgError("predict: dt_step must be positive");
    const Index n = model.state_dim();
    RealMatrix x0m = x0.transpose();
    ComplexMatrix phi0 = eval_eigenfunctions(model, x0m);  // 1 x K
    ComplexVector lam = step_multipliers(model, dt_step);

    RealMatrix out(horizon + 1, n);
    double worst_imag = 0.0;
    ComplexVector coef = phi0.row(0).transpose();
    for (Index m = 0; m <= horizon; ++m) {
        Eigen::RowVectorXcd state = coef.transpose() * model.modes;
        worst_imag = std::max(worst_imag, state.imag().cwiseAbs().maxCoeff());
        out.row(m) = state.real();
        coef = coef.cwiseProduct(lam);
    }
    if (imag_residual) *imag_residual = worst_imag;
    return out;
}

SnapshotSet normalize(const SnapshotSet& raw) {
    if (raw.normalization.applied) {
        throw LinalgError("normalize: snapshot set is already normalized");
    }
    SnapshotSet out = raw;
    const Index n = raw.cols();
    out.normalization.applied = true;
    out.normalization.shift.resize(n);
    out.normalization.scale.resize(n);
    for (Index d = 0; d < n; ++d) {
        const double hi = raw.states.col(d).maxCoeff();
        const double lo = raw.states.col(d).minCoeff();
        out.normalization.shift(d) = 0.5 * (hi + lo);
        const double half = 0.5 * (hi - lo);
        out.normalization.scale(d) = half > 0.0 ? half : 1.0;
        out.states.col(d) =
            (raw.states.col(d).array() - out.normalization.shift(d)) /
            out.normalization.scale(d);
        if (raw.has_derivatives()) {
            out.derivatives.col(d) = raw.derivatives.col(d) / out.normalization.scale(d);
        }
    }
    return out;
}

SnapshotSet denormalize(const SnapshotSet& normalized) {
    if (!normalized.normalization.applied) {
        throw LinalgError("denormalize: snapshot set is not normalized");
    }
    SnapshotSet out = normalized;
    const Index n = normalized.cols();
    for (Index d = 0; d < n; ++d) {
        const double shift = normalized.normalization.shift(d);
        const double scale = normalized.normalization.scale(d);
        out.states.col(d) = normalized.states.col(d).array() * scale + shift;
        if (normalized.has_derivatives()) {
            out.derivatives.col(d) = normalized.derivatives.col(d) * scale;
        }
    }
    out.normalization = Normalization{};
    return out;
}

}  // namespace koopman
