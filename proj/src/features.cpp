#include "koopman/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace koopman {

Index DictionarySpec::feature_count() const {
    return static_cast<Index>(multi_indices().size());
}

std::vector<std::vector<int>> DictionarySpec::multi_indices() const {
    if (max_order < 0 || state_dim <= 0) {
        throw LinalgError("DictionarySpec: max_order >= 0 and state_dim >= 1 required");
    }
    std::vector<std::vector<int>> out;
    std::vector<int> idx(static_cast<size_t>(state_dim), 0);
    // Odometer over {0..p}^N with the first dimension fastest.
    while (true) {
        const int total = std::accumulate(idx.begin(), idx.end(), 0);
        if (per_dimension_order || total <= max_order) out.push_back(idx);
        int d = 0;
        while (d < state_dim) {
            if (++idx[static_cast<size_t>(d)] <= max_order) break;
            idx[static_cast<size_t>(d)] = 0;
            ++d;
        }
        if (d == state_dim) break;
    }
    if (!per_dimension_order) {
        std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
            return std::accumulate(a.begin(), a.end(), 0) <
                   std::accumulate(b.begin(), b.end(), 0);
        });
    }
    return out;
}

KernelSpec KernelSpec::linear() { return KernelSpec{KernelKind::linear, 1, 1.0}; }

KernelSpec KernelSpec::polynomial(int order) {
    KernelSpec s{KernelKind::polynomial, order, 1.0};
    s.validate();
    return s;
}

KernelSpec KernelSpec::gaussian(double sigma) {
    KernelSpec s{KernelKind::gaussian, 2, sigma};
    s.validate();
    return s;
}

void KernelSpec::validate() const {
    if (kind == KernelKind::polynomial && poly_order < 1) {
        throw LinalgError("KernelSpec: polynomial order must be >= 1");
    }
    if (kind == KernelKind::gaussian && !(sigma > 0.0)) {
        throw LinalgError("KernelSpec: gaussian sigma must be positive");
    }
}

namespace {

// he_n(x) = He_n(x)/sqrt(n!) via the normalized three-term recurrence
// he_{n+1} = (x he_n - sqrt(n) he_{n-1}) / sqrt(n+1).
void hermite_row(double x, int max_order, double* out) {
    out[0] = 1.0;
    if (max_order >= 1) out[1] = x;
    for (int n = 1; n < max_order; ++n) {
        out[n + 1] =
            (x * out[n] - std::sqrt(static_cast<double>(n)) * out[n - 1]) /
            std::sqrt(static_cast<double>(n + 1));
    }
}

}  // namespace

RealMatrix eval_dictionary(const DictionarySpec& spec, const Eigen::Ref<const RealMatrix>& x) {
    require_finite(x, "eval_dictionary");
    if (x.cols() != spec.state_dim) {
        throw LinalgError("eval_dictionary: state dimension mismatch");
    }
    const auto indices = spec.multi_indices();
    const Index m = x.rows();
    const Index l = static_cast<Index>(indices.size());
    const int p = spec.max_order;
    const int n = spec.state_dim;

    RealMatrix out(m, l);
    std::vector<double> table(static_cast<size_t>(n * (p + 1)));
    for (Index i = 0; i < m; ++i) {
        for (int d = 0; d < n; ++d) {
            hermite_row(x(i, d), p, table.data() + d * (p + 1));
        }
        for (Index j = 0; j < l; ++j) {
            double v = 1.0;
            for (int d = 0; d < n; ++d) {
                v *= table[static_cast<size_t>(d * (p + 1) + indices[static_cast<size_t>(j)][static_cast<size_t>(d)])];
            }
            out(i, j) = v;
        }
    }
    return out;
}

std::vector<RealMatrix> eval_dictionary_grad(const DictionarySpec& spec,
                                             const Eigen::Ref<const RealMatrix>& x) {
    require_finite(x, "eval_dictionary_grad");
    if (x.cols() != spec.state_dim) {
        throw LinalgError("eval_dictionary_grad: state dimension mismatch");
    }
    const auto indices = spec.multi_indices();
    const Index m = x.rows();
    const Index l = static_cast<Index>(indices.size());
    const int p = spec.max_order;
    const int n = spec.state_dim;

    std::vector<RealMatrix> out(static_cast<size_t>(n), RealMatrix(m, l));
    std::vector<double> table(static_cast<size_t>(n * (p + 1)));
    for (Index i = 0; i < m; ++i) {
        for (int d = 0; d < n; ++d) {
            hermite_row(x(i, d), p, table.data() + d * (p + 1));
        }
        for (Index j = 0; j < l; ++j) {
            const auto& alpha = indices[static_cast<size_t>(j)];
            for (int g = 0; g < n; ++g) {
                // d/dx he_k = sqrt(k) he_{k-1}
                const int k = alpha[static_cast<size_t>(g)];
                if (k == 0) {
                    out[static_cast<size_t>(g)](i, j) = 0.0;
                    continue;
                }
                double v = std::sqrt(static_cast<double>(k)) *
                           table[static_cast<size_t>(g * (p + 1) + (k - 1))];
                for (int d = 0; d < n; ++d) {
                    if (d == g) continue;
                    v *= table[static_cast<size_t>(d * (p + 1) + alpha[static_cast<size_t>(d)])];
                }
                out[static_cast<size_t>(g)](i, j) = v;
            }
        }
    }
    return out;
}

RealMatrix eval_dictionary_dot(const DictionarySpec& spec,
                               const Eigen::Ref<const RealMatrix>& x,
                               const Eigen::Ref<const RealMatrix>& xdot) {
    if (x.rows() != xdot.rows() || x.cols() != xdot.cols()) {
        throw LinalgError("eval_dictionary_dot: x and xdot shapes differ");
    }
    const auto grads = eval_dictionary_grad(spec, x);
    RealMatrix out = RealMatrix::Zero(x.rows(), grads.empty() ? 0 : grads[0].cols());
    for (int d = 0; d < spec.state_dim; ++d) {
        out += xdot.col(d).asDiagonal() * grads[static_cast<size_t>(d)];
    }
    return out;
}

RealMatrix gram(const KernelSpec& spec, const Eigen::Ref<const RealMatrix>& x,
                const Eigen::Ref<const RealMatrix>& y) {
    spec.validate();
    require_finite(x, "gram");
    require_finite(y, "gram");
    if (x.cols() != y.cols()) {
        throw LinalgError("gram: point dimensions differ");
    }
    switch (spec.kind) {
        case KernelKind::linear:
            return x * y.transpose();
        case KernelKind::polynomial: {
            RealMatrix base = (x * y.transpose()).array() + 1.0;
            return base.array().pow(spec.poly_order).matrix();
        }
        case KernelKind::gaussian: {
            RealVector xs = x.rowwise().squaredNorm();
            RealVector ys = y.rowwise().squaredNorm();
            RealMatrix d2 = (-2.0 * x * y.transpose());
            d2.colwise() += xs;
            d2.rowwise() += ys.transpose();
            return (-d2.array().max(0.0) / (spec.sigma * spec.sigma)).exp().matrix();
        }
    }
    throw LinalgError("gram: unknown kernel kind");
}

RealMatrix gram_dot(const KernelSpec& spec, const Eigen::Ref<const RealMatrix>& x,
                    const Eigen::Ref<const RealMatrix>& xdot,
                    const Eigen::Ref<const RealMatrix>& y) {
    spec.validate();
    require_finite(x, "gram_dot");
    require_finite(xdot, "gram_dot");
    require_finite(y, "gram_dot");
    if (x.rows() != xdot.rows() || x.cols() != xdot.cols()) {
        throw LinalgError("gram_dot: x and xdot shapes differ");
    }
    if (x.cols() != y.cols()) {
        throw LinalgError("gram_dot: point dimensions differ");
    }
    switch (spec.kind) {
        case KernelKind::linear:
            // grad_x k = x', so xdot . grad = xdot . y_j
            return xdot * y.transpose();
        case KernelKind::polynomial: {
            RealMatrix base = (x * y.transpose()).array() + 1.0;
            RealMatrix outer =
                base.array().pow(spec.poly_order - 1).matrix() * spec.poly_order;
            return outer.cwiseProduct(xdot * y.transpose());
        }
        case KernelKind::gaussian: {
            RealMatrix k = gram(spec, x, y);
            // xdot . grad_x k = -2 (xdot.(x - y)) k / sigma^2
            RealMatrix dot_xy = xdot * y.transpose();
            RealVector dot_xx = (xdot.array() * x.array()).rowwise().sum();
            RealMatrix proj = (-dot_xy).colwise() + dot_xx;
            return (-2.0 / (spec.sigma * spec.sigma)) * proj.cwiseProduct(k);
        }
    }
    throw LinalgError("gram_dot: unknown kernel kind");
}

}  // namespace koopman
