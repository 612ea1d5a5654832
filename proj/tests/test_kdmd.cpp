#include <doctest.h>

#include "koopman/kdmd.hpp"
#include "koopman/pipeline.hpp"
#include "support/test_utils.hpp"

using namespace koopman;
using namespace koopman::testing;

TEST_SUITE("kdmd") {

TEST_CASE("linear-kernel KDMD on a linear map recovers the map spectrum") {
    RealMatrix d(2, 2);
    d << 0.85, 0.3, -0.2, 0.6;
    std::mt19937_64 rng(3);
    RealMatrix x = random_matrix(50, 2, rng);
    RealMatrix x_next = (d * x.transpose()).transpose();
    KoopmanModel model = fit_kdmd_discrete_pairs(x, x_next, KernelSpec::linear(), 2, 0.1);
    EigenDecomposition oracle = eig_general(d);
    CHECK(model.mode_count() == 2);
    CHECK(spectrum_distance(model.eigenvalues, {oracle.values(0), oracle.values(1)}) <
          1e-8);
}

TEST_CASE("two identical snapshots give the unit eigenvalue") {
    RealMatrix traj(2, 2);
    traj << 0.3, -0.1, 0.3, -0.1;
    KoopmanModel model = fit_kdmd_discrete(traj, KernelSpec::gaussian(1.0), 1, 1.0);
    CHECK(model.mode_count() == 1);
    CHECK(std::abs(model.eigenvalues(0) - Complex(1.0, 0.0)) < 1e-12);
}

TEST_CASE("zero velocity gives the zero generator") {
    std::mt19937_64 rng(5);
    RealMatrix x = random_matrix(25, 2, rng);
    RealMatrix xdot = RealMatrix::Zero(25, 2);
    KoopmanModel model = fit_kdmd_continuous(x, xdot, KernelSpec::gaussian(1.0), 10);
    CHECK(model.domain == TimeDomain::continuous);
    CHECK(model.eigenvalues.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("scalar linear flow with the linear kernel recovers the rate exactly") {
    std::mt19937_64 rng(7);
    RealMatrix x = random_matrix(20, 1, rng);
    const double mu = -0.42;
    RealMatrix xdot = mu * x;
    KoopmanModel model = fit_kdmd_continuous(x, xdot, KernelSpec::linear(), 1);
    CHECK(model.mode_count() == 1);
    CHECK(std::abs(model.eigenvalues(0) - Complex(mu, 0.0)) < 1e-12);
}

TEST_CASE("continuous gaussian KDMD on the fixed-point cloud finds the analytic rates") {
    SnapshotSet data = generate_fixed_point_lhs(1600, -0.5, 0.5, 77);
    KoopmanModel model =
        fit_kdmd_continuous(data.states, data.derivatives, KernelSpec::gaussian(2.0), 36);
    CHECK(spectrum_distance(model.eigenvalues,
                            {Complex(-1.0, 0.0), Complex(-0.05, 0.0),
                             Complex(-0.1, 0.0)}) < 1e-3);
}

TEST_CASE("discrete gaussian KDMD on flow-advanced pairs matches after log conversion") {
    const double dt = 0.03754;
    SnapshotSet data = generate_fixed_point_lhs(1600, -0.5, 0.5, 78);
    FixedPointSystem sys;
    RealMatrix x_next = sys.flow(data.states, dt);
    KoopmanModel model =
        fit_kdmd_discrete_pairs(data.states, x_next, KernelSpec::gaussian(2.0), 36, dt);
    ComplexVector mu = continuous_rates(model);
    CHECK(spectrum_distance(mu, {Complex(-1.0, 0.0), Complex(-0.05, 0.0),
                                 Complex(-0.1, 0.0)}) < 2e-3);
}

TEST_CASE("requested rank above the numerical Gram rank is clipped with a warning") {
    std::mt19937_64 rng(9);
    RealMatrix x = random_matrix(30, 2, rng, 0.01);  // tiny spread, wide kernel
    RealMatrix x_next = 0.9 * x;
    KoopmanModel model =
        fit_kdmd_discrete_pairs(x, x_next, KernelSpec::gaussian(50.0), 25, 1.0);
    CHECK(model.diagnostics.rank_used < 25);
    CHECK(!model.diagnostics.warnings.empty());
}

TEST_CASE("eigenfunction evaluation at training points equals the fitted features") {
    std::mt19937_64 rng(11);
    RealMatrix traj = random_matrix(20, 2, rng);
    KernelSpec kernel = KernelSpec::gaussian(1.4);
    KoopmanModel model = fit_kdmd_discrete(traj, kernel, 10, 0.5);
    ComplexMatrix phi = eval_eigenfunctions(model, model.train_x);
    ComplexMatrix expected =
        gram(kernel, model.train_x, model.train_x).cast<Complex>() * model.eigvec_coeffs;
    CHECK((phi - expected).norm() == 0.0);
}

TEST_CASE("conjugate pairing of kernel eigenmodes is exact") {
    const double theta = 0.5;
    RealMatrix d(2, 2);
    d << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    d *= 0.95;
    RealMatrix traj(40, 2);
    RealVector x = RealVector{{0.8, -0.1}};
    for (Index k = 0; k < 40; ++k) {
        traj.row(k) = x.transpose();
        x = d * x;
    }
    KoopmanModel model = fit_kdmd_discrete(traj, KernelSpec::polynomial(2), 5, 1.0);
    bool found = false;
    for (Index i = 0; i < model.mode_count(); ++i) {
        const Index p = model.conj_partner[static_cast<size_t>(i)];
        if (p == i) continue;
        found = true;
        CHECK(model.eigenvalues(p) == std::conj(model.eigenvalues(i)));
        CHECK((model.eigvec_coeffs.col(p) - model.eigvec_coeffs.col(i).conjugate())
                  .norm() == 0.0);
    }
    CHECK(found);
}

}  // TEST_SUITE
