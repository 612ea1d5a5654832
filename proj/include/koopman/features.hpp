#pragma once

#include <vector>

#include "koopman/linalg.hpp"

namespace koopman {

/// Tensor-product dictionary of probabilists' Hermite polynomials He_n,
/// normalized to unit L2(standard Gaussian) norm: he_n = He_n / sqrt(n!).
///
/// per_dimension_order = true enumerates all multi-indices with every
/// component <= max_order, giving (max_order+1)^state_dim features; false
/// keeps total degree <= max_order, giving C(max_order+state_dim, state_dim).
struct DictionarySpec {
    int max_order = 0;
    int state_dim = 0;
    bool per_dimension_order = true;

    Index feature_count() const;
    /// Multi-indices in evaluation order (first dimension varies fastest;
    /// total-degree mode additionally sorts by degree, stably).
    std::vector<std::vector<int>> multi_indices() const;
};

enum class KernelKind { linear, polynomial, gaussian };

struct KernelSpec {
    KernelKind kind = KernelKind::gaussian;
    int poly_order = 2;   // polynomial exponent alpha >= 1
    double sigma = 1.0;   // Gaussian length scale > 0

    static KernelSpec linear();
    static KernelSpec polynomial(int order);
    static KernelSpec gaussian(double sigma);
    void validate() const;
};

/// Row m of the result is Psi(x_m); x is M x N with N = spec.state_dim.
RealMatrix eval_dictionary(const DictionarySpec& spec, const Eigen::Ref<const RealMatrix>& x);

/// Rank-3 gradient d psi_l / d x_d flattened as a vector of N matrices,
/// result[d](m, l) = d psi_l(x_m) / d x_d.
std::vector<RealMatrix> eval_dictionary_grad(const DictionarySpec& spec,
                                             const Eigen::Ref<const RealMatrix>& x);

/// Directional derivative rows: out(m, l) = xdot_m . grad psi_l(x_m).
RealMatrix eval_dictionary_dot(const DictionarySpec& spec,
                               const Eigen::Ref<const RealMatrix>& x,
                               const Eigen::Ref<const RealMatrix>& xdot);

/// Gram block k(x_i, y_j); x is M x N, y is P x N.
RealMatrix gram(const KernelSpec& spec, const Eigen::Ref<const RealMatrix>& x,
                const Eigen::Ref<const RealMatrix>& y);

/// Directional kernel derivative xdot_i . grad_x k(x, x')|_{x=x_i, x'=y_j}.
RealMatrix gram_dot(const KernelSpec& spec, const Eigen::Ref<const RealMatrix>& x,
                    const Eigen::Ref<const RealMatrix>& xdot,
                    const Eigen::Ref<const RealMatrix>& y);

}  // namespace koopman
