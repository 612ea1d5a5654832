#pragma once

#include <random>
#include <vector>

#include "koopman/linalg.hpp"
#include "koopman/model.hpp"

namespace koopman::testing {

inline RealMatrix random_matrix(Index rows, Index cols, std::mt19937_64& rng,
                                double scale = 1.0) {
    std::normal_distribution<double> dist(0.0, scale);
    RealMatrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
    }
    return m;
}

inline ComplexMatrix random_complex_matrix(Index rows, Index cols,
                                           std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> dist(0.0, scale);
    ComplexMatrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) m(i, j) = Complex(dist(rng), dist(rng));
    }
    return m;
}

/// Durand-Kerner roots of a monic polynomial with the given coefficients
/// (c[0] + c[1] z + ... + c[n-1] z^{n-1} + z^n).
inline std::vector<Complex> polynomial_roots(const std::vector<double>& coeffs) {
    const size_t n = coeffs.size();
    auto eval = [&](Complex z) {
        Complex p = 1.0;
        for (size_t k = n; k-- > 0;) p = p * z + coeffs[k];
        return p;
    };
    std::vector<Complex> roots(n);
    Complex seed(0.4, 0.9);
    Complex z = 1.0;
    for (size_t i = 0; i < n; ++i) {
        z *= seed;
        roots[i] = z;
    }
    for (int iter = 0; iter < 200; ++iter) {
        for (size_t i = 0; i < n; ++i) {
            Complex denom = 1.0;
            for (size_t j = 0; j < n; ++j) {
                if (j != i) denom *= roots[i] - roots[j];
            }
            roots[i] -= eval(roots[i]) / denom;
        }
    }
    return roots;
}

/// Matrix exponential by scaling-and-squaring on the Taylor series
/// (independent of any eigendecomposition path).
inline RealMatrix expm_series(const RealMatrix& a) {
    const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    RealMatrix scaled = a;
    while (norm / std::pow(2.0, squarings) > 0.5) ++squarings;
    scaled /= std::pow(2.0, squarings);
    RealMatrix result = RealMatrix::Identity(a.rows(), a.cols());
    RealMatrix term = result;
    for (int k = 1; k <= 24; ++k) {
        term = term * scaled / static_cast<double>(k);
        result += term;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

/// Match each target against the closest model eigenvalue; returns the max
/// distance over targets.
inline double spectrum_distance(const ComplexVector& values,
                                const std::vector<Complex>& targets) {
    double worst = 0.0;
    for (const Complex& t : targets) {
        double best = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < values.size(); ++i) {
            best = std::min(best, std::abs(values(i) - t));
        }
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace koopman::testing
