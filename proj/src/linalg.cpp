#include "koopman/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace koopman {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

template <typename Scalar>
bool all_finite(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& m) {
    return m.allFinite();
}

}  // namespace

void require_finite(const Eigen::Ref<const RealMatrix>& m, const char* what) {
    if (!m.allFinite()) {
        throw LinalgError(std::string(what) + ": non-finite entries");
    }
}

void require_finite(const Eigen::Ref<const ComplexMatrix>& m, const char* what) {
    if (!m.allFinite()) {
        throw LinalgError(std::string(what) + ": non-finite entries");
    }
}

Index SvdResult::rank(double rel_cutoff) const {
    if (s.size() == 0) return 0;
    const double cut = rel_cutoff * s(0);
    Index r = 0;
    while (r < s.size() && s(r) > cut) ++r;
    return r;
}

SvdResult svd(const RealMatrix& m) {
    require_finite(m, "svd");
    Eigen::BDCSVD<RealMatrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() != Eigen::Success) {
        throw LinalgError("svd: did not converge (Eigen info=" +
                          std::to_string(static_cast<int>(dec.info())) + ")");
    }
    return SvdResult{dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

SvdResult truncate_rank(const SvdResult& f, Index r) {
    if (r < 0 || r > f.s.size()) {
        throw LinalgError("truncate_rank: requested rank " + std::to_string(r) +
                          " exceeds factor count " + std::to_string(f.s.size()));
    }
    return SvdResult{f.u.leftCols(r), f.s.head(r), f.v.leftCols(r)};
}

SvdResult truncate_rank_tol(const SvdResult& f, double tol) {
    if (!(tol > 0.0 && tol < 1.0)) {
        throw LinalgError("truncate_rank_tol: tol must lie in (0,1)");
    }
    const double total = f.s.squaredNorm();
    if (total == 0.0) return truncate_rank(f, 0);
    double acc = 0.0;
    Index r = 0;
    while (r < f.s.size() && acc / total < 1.0 - tol) {
        acc += f.s(r) * f.s(r);
        ++r;
    }
    return truncate_rank(f, r);
}

namespace {

// Rotate a unit eigenvector so its largest-modulus entry is real positive.
void canonicalize_phase(Eigen::Ref<ComplexVector> v) {
    Index imax = 0;
    double best = -1.0;
    for (Index k = 0; k < v.size(); ++k) {
        const double a = std::abs(v(k));
        if (a > best) {
            best = a;
            imax = k;
        }
    }
    if (best > 0.0) v *= std::conj(v(imax)) / best;
}

struct SortKey {
    double mod;
    double imag;
    Index orig;
};

}  // namespace

EigenDecomposition eig_general(const RealMatrix& m) {
    require_finite(m, "eig_general");
    if (m.rows() != m.cols()) {
        throw LinalgError("eig_general: matrix must be square");
    }
    Eigen::EigenSolver<RealMatrix> dec(m, /*computeEigenvectors=*/true);
    if (dec.info() != Eigen::Success) {
        throw LinalgError("eig_general: QR iteration did not converge (Eigen info=" +
                          std::to_string(static_cast<int>(dec.info())) + ")");
    }
    const Index n = m.rows();
    ComplexVector vals = dec.eigenvalues();
    ComplexMatrix vecs = dec.eigenvectors();

    const double scale = std::max(1e-300, vals.cwiseAbs().maxCoeff());
    const double real_tol = 1e-12 * std::max(1.0, scale);

    // Pair complex eigenvalues with their nearest conjugates, then symmetrize
    // so that paired values/vectors are exact conjugates.
    std::vector<Index> partner(static_cast<size_t>(n));
    std::vector<bool> done(static_cast<size_t>(n), false);
    for (Index i = 0; i < n; ++i) partner[static_cast<size_t>(i)] = i;

    for (Index i = 0; i < n; ++i) {
        if (done[static_cast<size_t>(i)]) continue;
        if (std::abs(vals(i).imag()) <= real_tol) {
            vals(i) = Complex(vals(i).real(), 0.0);
            canonicalize_phase(vecs.col(i));
            ComplexVector re = vecs.col(i).real().cast<Complex>();
            const double rn = re.norm();
            if (rn > 0.5) vecs.col(i) = re / rn;  // drop residual imaginary part
            done[static_cast<size_t>(i)] = true;
            continue;
        }
        Index best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (Index j = i + 1; j < n; ++j) {
            if (done[static_cast<size_t>(j)]) continue;
            const double d = std::abs(vals(j) - std::conj(vals(i)));
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        if (best < 0) {  // no mate left; keep as-is
            done[static_cast<size_t>(i)] = true;
            continue;
        }
        Complex lam = 0.5 * (vals(i) + std::conj(vals(best)));
        if (lam.imag() < 0.0) lam = std::conj(lam);
        canonicalize_phase(vecs.col(i));
        vecs.col(i) /= vecs.col(i).norm();
        if (vals(i).imag() >= 0.0) {
            vals(i) = lam;
            vals(best) = std::conj(lam);
            vecs.col(best) = vecs.col(i).conjugate();
        } else {
            vals(i) = std::conj(lam);
            vals(best) = lam;
            vecs.col(best) = vecs.col(i).conjugate();
        }
        partner[static_cast<size_t>(i)] = best;
        partner[static_cast<size_t>(best)] = i;
        done[static_cast<size_t>(i)] = done[static_cast<size_t>(best)] = true;
    }

    for (Index i = 0; i < n; ++i) {
        const double nv = vecs.col(i).norm();
        if (nv > 0.0) vecs.col(i) /= nv;
    }

    // Deterministic ordering: descending |lambda|, ties by descending Im,
    // then by original position.
    std::vector<Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        const double ma = std::abs(vals(a)), mb = std::abs(vals(b));
        if (ma != mb) return ma > mb;
        if (vals(a).imag() != vals(b).imag()) return vals(a).imag() > vals(b).imag();
        return a < b;
    });

    std::vector<Index> pos(static_cast<size_t>(n));
    for (Index k = 0; k < n; ++k) pos[static_cast<size_t>(order[static_cast<size_t>(k)])] = k;

    EigenDecomposition out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    out.conj_partner.resize(static_cast<size_t>(n));
    for (Index k = 0; k < n; ++k) {
        const Index src = order[static_cast<size_t>(k)];
        out.values(k) = vals(src);
        out.vectors.col(k) = vecs.col(src);
        out.conj_partner[static_cast<size_t>(k)] =
            pos[static_cast<size_t>(partner[static_cast<size_t>(src)])];
    }
    return out;
}

double pinv_cutoff(Index rows, Index cols, double smax) {
    return static_cast<double>(std::max(rows, cols)) * kEps * smax;
}

namespace {

template <typename Matrix>
Matrix pinv_impl(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = dec.singularValues();
    const double cut = s.size() ? pinv_cutoff(m.rows(), m.cols(), s(0)) : 0.0;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
    for (Index i = 0; i < s.size(); ++i) {
        if (s(i) > cut) inv(i) = 1.0 / s(i);
    }
    return dec.matrixV() * inv.asDiagonal() * dec.matrixU().adjoint();
}

template <typename Matrix>
Matrix lstsq_impl(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw LinalgError("lstsq: row counts differ");
    }
    Eigen::JacobiSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = dec.singularValues();
    const double cut = s.size() ? pinv_cutoff(a.rows(), a.cols(), s(0)) : 0.0;
    Matrix ub = dec.matrixU().adjoint() * b;
    for (Index i = 0; i < s.size(); ++i) {
        if (s(i) > cut) {
            ub.row(i) /= s(i);
        } else {
            ub.row(i).setZero();
        }
    }
    return dec.matrixV() * ub;
}

}  // namespace

RealMatrix pinv(const RealMatrix& m) {
    require_finite(m, "pinv");
    return pinv_impl(m);
}

ComplexMatrix pinv(const ComplexMatrix& m) {
    require_finite(m, "pinv");
    return pinv_impl(m);
}

RealMatrix lstsq(const RealMatrix& a, const RealMatrix& b) {
    require_finite(a, "lstsq");
    require_finite(b, "lstsq");
    return lstsq_impl(a, b);
}

ComplexMatrix lstsq(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_finite(a, "lstsq");
    require_finite(b, "lstsq");
    return lstsq_impl(a, b);
}

}  // namespace koopman
