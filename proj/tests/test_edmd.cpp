#include <doctest.h>

#include "koopman/edmd.hpp"
#include "koopman/pipeline.hpp"
#include "support/test_utils.hpp"

using namespace koopman;
using namespace koopman::testing;

namespace {

RealMatrix iterate_map(const RealMatrix& d, const RealVector& x0, Index steps) {
    RealMatrix traj(steps + 1, x0.size());
    RealVector x = x0;
    for (Index k = 0; k <= steps; ++k) {
        traj.row(k) = x.transpose();
        x = d * x;
    }
    return traj;
}

}  // namespace

TEST_SUITE("edmd") {

TEST_CASE("linear map with a linear dictionary reproduces the map spectrum") {
    RealMatrix d(2, 2);
    d << 0.9, 0.2, -0.1, 0.7;
    std::mt19937_64 rng(2);
    RealMatrix x0s = random_matrix(40, 2, rng);
    RealMatrix x_next = (d * x0s.transpose()).transpose();

    DictionarySpec dict{1, 2, false};  // 1, x1, x2
    KoopmanModel model = fit_edmd_discrete_pairs(x0s, x_next, dict, 0.1);

    EigenDecomposition oracle = eig_general(d);
    CHECK(spectrum_distance(model.eigenvalues,
                            {oracle.values(0), oracle.values(1)}) < 1e-10);
    CHECK(model.mode_count() == 3);  // plus the trivial constant mode at 1
    CHECK(spectrum_distance(model.eigenvalues, {Complex(1.0, 0.0)}) < 1e-10);
}

TEST_CASE("order-zero dictionary gives the single unit eigenvalue") {
    std::mt19937_64 rng(4);
    RealMatrix traj = random_matrix(6, 2, rng);
    DictionarySpec dict{0, 2, true};
    KoopmanModel model = fit_edmd_discrete(traj, dict, 1.0);
    CHECK(model.mode_count() == 1);
    CHECK(std::abs(model.eigenvalues(0) - Complex(1.0, 0.0)) < 1e-12);
}

TEST_CASE("monomial closure of the scalar contraction map") {
    // x+ = 0.9 x with features spanning {1, x, x^2}: K is triangular with
    // eigenvalues {1, 0.9, 0.81}.
    std::mt19937_64 rng(6);
    RealMatrix x = random_matrix(30, 1, rng);
    RealMatrix x_next = 0.9 * x;
    DictionarySpec dict{2, 1, true};
    KoopmanModel model = fit_edmd_discrete_pairs(x, x_next, dict, 1.0);
    CHECK(spectrum_distance(model.eigenvalues,
                            {Complex(0.9, 0.0), Complex(0.81, 0.0)}) < 1e-10);
}

TEST_CASE("continuous fit of the scalar linear flow") {
    std::mt19937_64 rng(8);
    RealMatrix x = random_matrix(20, 1, rng);
    const double mu = -0.37;
    RealMatrix xdot = mu * x;
    DictionarySpec dict{1, 1, true};
    KoopmanModel model = fit_edmd_continuous(x, xdot, dict);
    CHECK(model.domain == TimeDomain::continuous);
    CHECK(spectrum_distance(model.eigenvalues, {Complex(mu, 0.0)}) < 1e-12);
}

TEST_CASE("fixed-point system spectrum contains the analytic rates") {
    SnapshotSet data = generate_fixed_point_lhs(400, -0.5, 0.5, 99);
    DictionarySpec dict{2, 2, true};
    KoopmanModel model = fit_edmd_continuous(data.states, data.derivatives, dict);
    CHECK(spectrum_distance(model.eigenvalues,
                            {Complex(-1.0, 0.0), Complex(-0.05, 0.0),
                             Complex(-0.1, 0.0)}) < 1e-6);
}

TEST_CASE("continuous linear system with a linear dictionary matches eig(A)") {
    RealMatrix a(2, 2);
    a << -0.5, 1.1, -1.1, -0.5;  // stable spiral
    std::mt19937_64 rng(10);
    RealMatrix x = random_matrix(50, 2, rng);
    RealMatrix xdot = (a * x.transpose()).transpose();
    DictionarySpec dict{1, 2, false};
    KoopmanModel model = fit_edmd_continuous(x, xdot, dict);
    EigenDecomposition oracle = eig_general(a);
    CHECK(spectrum_distance(model.eigenvalues, {oracle.values(0), oracle.values(1)}) <
          1e-8);
}

TEST_CASE("eigenfunction evaluation is consistent with the training features") {
    std::mt19937_64 rng(12);
    RealMatrix traj = random_matrix(12, 2, rng);
    DictionarySpec dict{2, 2, true};
    KoopmanModel model = fit_edmd_discrete(traj, dict, 1.0);
    ComplexMatrix phi = eval_eigenfunctions(model, traj.topRows(1));
    ComplexMatrix psi = eval_dictionary(dict, traj.topRows(1)).cast<Complex>();
    CHECK((phi - psi * model.eigvec_coeffs).norm() == 0.0);
}

TEST_CASE("the unit-eigenvalue mode of the contraction map is constant") {
    std::mt19937_64 rng(14);
    RealMatrix x = random_matrix(30, 1, rng);
    DictionarySpec dict{2, 1, true};
    KoopmanModel model = fit_edmd_discrete_pairs(x, RealMatrix(0.9 * x), dict, 1.0);
    Index unit = -1;
    for (Index i = 0; i < model.mode_count(); ++i) {
        if (std::abs(model.eigenvalues(i) - Complex(1.0, 0.0)) < 1e-8) unit = i;
    }
    REQUIRE(unit >= 0);
    ComplexMatrix phi = eval_eigenfunctions(model, random_matrix(15, 1, rng));
    ComplexVector col = phi.col(unit);
    CHECK((col.array() - col(0)).abs().maxCoeff() < 1e-9 * std::abs(col(0)));
}

TEST_CASE("eigenfunctions of a linear flow align with left eigenvectors") {
    RealMatrix a(2, 2);
    a << -0.3, 0.8, 0.1, -0.9;
    std::mt19937_64 rng(16);
    RealMatrix x = random_matrix(60, 2, rng);
    RealMatrix xdot = (a * x.transpose()).transpose();
    DictionarySpec dict{1, 2, false};  // 1, x1, x2
    KoopmanModel model = fit_edmd_continuous(x, xdot, dict);

    EigenDecomposition left = eig_general(RealMatrix(a.transpose()));
    for (Index i = 0; i < left.values.size(); ++i) {
        Index match = -1;
        for (Index j = 0; j < model.mode_count(); ++j) {
            if (std::abs(model.eigenvalues(j) - left.values(i)) < 1e-8) match = j;
        }
        REQUIRE(match >= 0);
        ComplexVector coeff = model.eigvec_coeffs.col(match);
        CHECK(std::abs(coeff(0)) < 1e-8);  // no constant part
        ComplexVector lin = coeff.segment(1, 2);
        const double align = std::abs(lin.dot(left.vectors.col(i).conjugate())) /
                             (lin.norm() * left.vectors.col(i).norm());
        CHECK(align == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("fitted operator is the Galerkin minimizer") {
    std::mt19937_64 rng(21);
    RealMatrix x = random_matrix(40, 2, rng, 0.5);
    RealMatrix x_next = random_matrix(40, 2, rng, 0.5);  // no closure: generic data
    DictionarySpec dict{2, 2, true};
    KoopmanModel model = fit_edmd_discrete_pairs(x, x_next, dict, 1.0);

    RealMatrix psi_x = eval_dictionary(dict, x);
    RealMatrix psi_y = eval_dictionary(dict, x_next);
    RealMatrix k = pinv(RealMatrix(psi_x.transpose() * psi_x)) *
                   (psi_x.transpose() * psi_y);

    // Model eigenpairs are eigenpairs of K.
    for (Index i = 0; i < model.mode_count(); ++i) {
        ComplexVector v = model.eigvec_coeffs.col(i);
        CHECK((k.cast<Complex>() * v - model.eigenvalues(i) * v).norm() <=
              1e-8 * k.norm());
    }

    // Perturbing any entry does not reduce the residual.
    const double base = (psi_y - psi_x * k).norm();
    for (int trial = 0; trial < 12; ++trial) {
        RealMatrix kp = k;
        const Index i = static_cast<Index>(rng() % k.rows());
        const Index j = static_cast<Index>(rng() % k.cols());
        kp(i, j) += (trial % 2 == 0 ? 1e-4 : -1e-4);
        CHECK((psi_y - psi_x * kp).norm() >= base - 1e-12 * psi_y.norm());
    }
}

TEST_CASE("a dictionary containing the closure gives a machine-level residual") {
    // x+ = 0.9 x with {1, x, x^2}: the span is invariant under the map.
    std::mt19937_64 rng(22);
    RealMatrix x = random_matrix(30, 1, rng);
    RealMatrix x_next = 0.9 * x;
    DictionarySpec dict{2, 1, true};
    RealMatrix psi_x = eval_dictionary(dict, x);
    RealMatrix psi_y = eval_dictionary(dict, x_next);
    RealMatrix k = pinv(RealMatrix(psi_x.transpose() * psi_x)) *
                   (psi_x.transpose() * psi_y);
    CHECK((psi_y - psi_x * k).norm() <= 1e-8 * psi_y.norm());
}

TEST_CASE("complex eigenvalues carry conjugate eigenvectors and modes") {
    const double theta = 0.7;
    RealMatrix d(2, 2);
    d << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    d *= 0.9;
    std::mt19937_64 rng(25);
    RealMatrix traj = iterate_map(d, RealVector{{0.7, -0.4}}, 30);
    DictionarySpec dict{1, 2, false};
    KoopmanModel model = fit_edmd_discrete(traj, dict, 0.5);

    bool found_pair = false;
    for (Index i = 0; i < model.mode_count(); ++i) {
        const Index p = model.conj_partner[static_cast<size_t>(i)];
        if (p == i) continue;
        found_pair = true;
        CHECK(model.eigenvalues(p) == std::conj(model.eigenvalues(i)));
        CHECK((model.eigvec_coeffs.col(p) - model.eigvec_coeffs.col(i).conjugate())
                  .norm() == 0.0);
        CHECK((model.modes.row(p) - model.modes.row(i).conjugate()).norm() <= 1e-10);
    }
    CHECK(found_pair);
}

TEST_CASE("svd_rank projection reduces the operator size") {
    SnapshotSet data = generate_fixed_point_lhs(200, -0.5, 0.5, 31);
    DictionarySpec dict{3, 2, true};  // 16 features
    EdmdOptions opt;
    opt.svd_rank = 9;
    KoopmanModel model = fit_edmd_continuous(data.states, data.derivatives, dict, opt);
    CHECK(model.mode_count() == 9);
    CHECK(model.eigvec_coeffs.rows() == 16);  // coefficients in the full basis
    CHECK(model.diagnostics.rank_used == 9);

    EdmdOptions too_big;
    too_big.svd_rank = 17;
    CHECK_THROWS_AS(
        fit_edmd_continuous(data.states, data.derivatives, dict, too_big), LinalgError);
}

TEST_CASE("rank-deficient normal equations produce a warning, not a failure") {
    // Samples on a line make the 2-D quadratic dictionary degenerate.
    RealMatrix x(40, 2);
    for (Index i = 0; i < 40; ++i) {
        const double t = -0.5 + static_cast<double>(i) / 39.0;
        x(i, 0) = t;
        x(i, 1) = 2.0 * t;
    }
    RealMatrix x_next = 0.9 * x;
    DictionarySpec dict{2, 2, true};
    KoopmanModel model = fit_edmd_discrete_pairs(x, x_next, dict, 1.0);
    CHECK(!model.diagnostics.warnings.empty());
}

}  // TEST_SUITE
