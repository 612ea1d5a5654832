#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace koopman {

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;
using Complex = std::complex<double>;

/// Thrown when a numerical routine cannot deliver its contract
/// (non-finite input, solver non-convergence, invalid truncation rank).
class LinalgError : public std::runtime_error {
public:
    explicit LinalgError(const std::string& what) : std::runtime_error(what) {}
};

void require_finite(const Eigen::Ref<const RealMatrix>& m, const char* what);
void require_finite(const Eigen::Ref<const ComplexMatrix>& m, const char* what);

/// Thin SVD factors: m = u * s.asDiagonal() * v^T with s descending.
struct SvdResult {
    RealMatrix u;
    RealVector s;
    RealMatrix v;

    Index rank(double rel_cutoff) const;
};

SvdResult svd(const RealMatrix& m);

/// Keep the leading r singular triplets. Throws if r exceeds the factor count.
SvdResult truncate_rank(const SvdResult& f, Index r);

/// Smallest r with sum_{i<=r} s_i^2 / sum s_i^2 >= 1 - tol, tol in (0,1).
SvdResult truncate_rank_tol(const SvdResult& f, double tol);

/// Eigenpairs of a real square matrix. Column i of `vectors` pairs with
/// `values[i]`; complex eigenvalues of the real input appear as exact
/// conjugate pairs after the pairing pass, with conjugate eigenvectors.
/// Ordering: descending |lambda|, ties by descending imaginary part.
/// `conj_partner[i]` is the index of i's conjugate mate (i itself when real).
struct EigenDecomposition {
    ComplexVector values;
    ComplexMatrix vectors;
    std::vector<Index> conj_partner;
};

EigenDecomposition eig_general(const RealMatrix& m);

/// Singular values below max(rows, cols) * eps * s_max are treated as zero.
double pinv_cutoff(Index rows, Index cols, double smax);

RealMatrix pinv(const RealMatrix& m);
ComplexMatrix pinv(const ComplexMatrix& m);

/// Minimum-norm X minimizing ||A X - B||_F (SVD-based, same cutoff as pinv).
RealMatrix lstsq(const RealMatrix& a, const RealMatrix& b);
ComplexMatrix lstsq(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace koopman
