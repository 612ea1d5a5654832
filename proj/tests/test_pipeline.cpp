#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "koopman/edmd.hpp"
#include "koopman/io.hpp"
#include "koopman/kdmd.hpp"
#include "koopman/pipeline.hpp"
#include "support/oracles.hpp"

using namespace koopman;
using namespace koopman::testing;

TEST_SUITE("pipeline") {

TEST_CASE("trajectory generation matches the closed-form flow") {
    SnapshotSet val = generate_fixed_point_trajectory({0.4, 0.4}, 0.03754, 30.0);
    CHECK(val.rows() == 800);
    CHECK(val.dt == doctest::Approx(0.03754));
    CHECK(val.states(0, 0) == doctest::Approx(0.4));
    CHECK(val.states(0, 1) == doctest::Approx(0.4));

    SnapshotSet test = generate_fixed_point_trajectory({-0.3, -0.3}, 0.06677, 40.0);
    CHECK(test.rows() == 600);

    FixedPointSystem sys;
    RealMatrix x0(1, 2);
    x0 << 0.4, 0.4;
    const double t = 37.0 * 0.03754;
    RealMatrix expected = sys.flow(x0, t);
    CHECK(val.states(37, 0) == doctest::Approx(expected(0, 0)).epsilon(1e-12));
    CHECK(val.states(37, 1) == doctest::Approx(expected(0, 1)).epsilon(1e-12));

    // Derivatives are the governing right side.
    RealMatrix rhs = sys.rhs(val.states);
    CHECK((val.derivatives - rhs).norm() == 0.0);
}

TEST_CASE("the slow manifold is invariant under the flow") {
    FixedPointSystem sys;
    const double c = sys.manifold_coeff();
    SnapshotSet traj =
        generate_fixed_point_trajectory({0.3, c * 0.3 * 0.3}, 0.1, 20.0, sys);
    for (Index k = 0; k < traj.rows(); ++k) {
        CHECK(traj.states(k, 1) ==
              doctest::Approx(c * traj.states(k, 0) * traj.states(k, 0)).epsilon(1e-12));
    }
}

TEST_CASE("LHS sampling is seeded, stratified and in-box") {
    SnapshotSet a = generate_fixed_point_lhs(64, -0.5, 0.5, 123);
    SnapshotSet b = generate_fixed_point_lhs(64, -0.5, 0.5, 123);
    SnapshotSet c = generate_fixed_point_lhs(64, -0.5, 0.5, 124);
    CHECK((a.states - b.states).norm() == 0.0);
    CHECK((a.states - c.states).norm() != 0.0);
    CHECK(a.states.minCoeff() >= -0.5);
    CHECK(a.states.maxCoeff() <= 0.5);
    // Exactly one sample per stratum per dimension.
    for (int d = 0; d < 2; ++d) {
        std::vector<int> hits(64, 0);
        for (Index i = 0; i < 64; ++i) {
            const double u = (a.states(i, d) + 0.5) * 64.0;
            ++hits[static_cast<size_t>(std::min(63.0, std::floor(u)))];
        }
        for (int h : hits) CHECK(h == 1);
    }
    CHECK(a.provenance.rng == "mt19937_64");
    CHECK(a.provenance.seed == 123);
}

TEST_CASE("hopf trajectories settle onto the circular limit cycle") {
    HopfSystem sys;
    SnapshotSet traj = generate_hopf_trajectory({0.05, 0.0, 1.0}, 0.2, 120.0, sys);
    const Index last = traj.rows() - 1;
    const double r = std::hypot(traj.states(last, 0), traj.states(last, 1));
    CHECK(r == doctest::Approx(std::sqrt(sys.mu_h)).epsilon(1e-6));
    CHECK(std::abs(traj.states(last, 2)) < 1e-10);
}

TEST_CASE("full-rank POD is lossless and truncation follows Eckart-Young") {
    std::mt19937_64 rng(3);
    SnapshotSet full;
    full.states = random_matrix(30, 6, rng);
    full.dt = 0.1;

    PodReduction lossless = pod_reduce(full, 6);
    RealMatrix lifted = pod_lift(lossless.pod, lossless.coefficients.states);
    CHECK((lifted - full.states).norm() <= 1e-10 * full.states.norm());

    PodReduction r2 = pod_reduce(full, 2);
    RealMatrix approx = pod_lift(r2.pod, r2.coefficients.states);
    const double tail = std::sqrt(r2.pod.singular_values.tail(4).squaredNorm());
    CHECK((approx - full.states).norm() == doctest::Approx(tail).epsilon(1e-10));
    CHECK((r2.pod.basis.transpose() * r2.pod.basis -
           RealMatrix::Identity(2, 2)).norm() < 1e-10);
}

TEST_CASE("energy-targeted POD finds a constructed rank") {
    std::mt19937_64 rng(5);
    RealMatrix left = random_matrix(40, 5, rng);
    RealMatrix right = random_matrix(5, 8, rng);
    SnapshotSet full;
    full.states = left * right;  // exact rank 5 after centering (generic)
    full.dt = 1.0;
    PodReduction red = pod_reduce(full, -1, 0.99);
    CHECK(red.pod.k() == 5);
    CHECK(red.pod.energy_fraction >= 0.99);
}

TEST_CASE("stride split partitions the trajectory and triples dt") {
    SnapshotSet traj;
    traj.states.resize(891, 2);
    for (Index i = 0; i < traj.rows(); ++i) {
        traj.states(i, 0) = static_cast<double>(i);
        traj.states(i, 1) = -static_cast<double>(i);
    }
    traj.dt = 0.1;
    TrainValTest split = stride_split(traj);
    CHECK(split.train.rows() == 297);
    CHECK(split.val.rows() == 297);
    CHECK(split.test.rows() == 297);
    CHECK(split.train.dt == doctest::Approx(0.3));

    // Reassembling the interleave recovers the original order.
    for (Index i = 0; i < traj.rows(); ++i) {
        const SnapshotSet& child = i % 3 == 0 ? split.train : i % 3 == 1 ? split.val
                                                                         : split.test;
        CHECK(child.states(i / 3, 0) == traj.states(i, 0));
    }

    SnapshotSet tiny;
    tiny.states = RealMatrix::Identity(3, 3);
    tiny.dt = 1.0;
    TrainValTest tsplit = stride_split(tiny);
    CHECK(tsplit.train.rows() == 1);
    CHECK(tsplit.val.rows() == 1);
    CHECK(tsplit.test.rows() == 1);
}

TEST_CASE("the analytic model predicts the unseen test trajectory") {
    KoopmanModel model = analytic_fixed_point_model();
    SnapshotSet test = generate_fixed_point_trajectory({-0.3, -0.3}, 0.06677, 40.0);
    double imag = 0.0;
    RealMatrix pred =
        predict(model, test.states.row(0).transpose(), test.rows() - 1, test.dt, &imag);
    CHECK((pred - test.states).cwiseAbs().maxCoeff() < 1e-4);
    CHECK(imag < 1e-10);
}

TEST_CASE("horizon zero reconstructs the initial state") {
    KoopmanModel model = analytic_fixed_point_model();
    RealVector x0{{0.25, -0.4}};
    RealMatrix pred = predict(model, x0, 0, 0.1);
    CHECK(pred.rows() == 1);
    CHECK((pred.row(0).transpose() - x0).norm() < 1e-10);
}

TEST_CASE("a linear-system model matches the matrix-exponential oracle") {
    RealMatrix a(2, 2);
    a << -0.2, 1.0, -1.0, -0.2;
    std::mt19937_64 rng(7);
    RealMatrix x = random_matrix(60, 2, rng);
    RealMatrix xdot = (a * x.transpose()).transpose();
    DictionarySpec dict{1, 2, false};
    KoopmanModel model = fit_edmd_continuous(x, xdot, dict);

    const double dt = 0.3;
    RealVector x0{{0.7, -0.2}};
    double imag = 0.0;
    RealMatrix pred = predict(model, x0, 10, dt, &imag);
    CHECK(imag < 1e-10);
    RealMatrix step = expm_series(RealMatrix(a * dt));
    RealVector xk = x0;
    for (Index k = 0; k <= 10; ++k) {
        CHECK((pred.row(k).transpose() - xk).norm() < 1e-8 * std::max(1.0, xk.norm()));
        xk = step * xk;
    }
}

TEST_CASE("normalization to [-1,1] round-trips") {
    std::mt19937_64 rng(9);
    SnapshotSet raw;
    raw.states = random_matrix(50, 3, rng, 4.0);
    raw.states.col(1).array() += 10.0;
    raw.derivatives = random_matrix(50, 3, rng);
    raw.dt = 0.2;

    SnapshotSet norm = normalize(raw);
    CHECK(norm.normalization.applied);
    CHECK(norm.states.minCoeff() >= -1.0 - 1e-12);
    CHECK(norm.states.maxCoeff() <= 1.0 + 1e-12);
    SnapshotSet back = denormalize(norm);
    CHECK((back.states - raw.states).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((back.derivatives - raw.derivatives).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(normalize(norm), LinalgError);
}

TEST_CASE("snapshot export/ingest round-trips bit for bit") {
    namespace fs = std::filesystem;
    fs::create_directories("pipeline_io_test");
    SnapshotSet raw = generate_fixed_point_lhs(30, -0.5, 0.5, 11);
    raw.dt = 0.05;
    export_snapshots(raw, "pipeline_io_test/sample");
    SnapshotSet loaded = ingest("pipeline_io_test/sample.json");
    CHECK((loaded.states - raw.states).norm() == 0.0);
    CHECK((loaded.derivatives - raw.derivatives).norm() == 0.0);
    CHECK(loaded.dt == raw.dt);
    CHECK(loaded.provenance.system == "fixed_point");
    fs::remove_all("pipeline_io_test");
}

TEST_CASE("ingest names the offending manifest field") {
    namespace fs = std::filesystem;
    fs::create_directories("pipeline_io_test2");
    SnapshotSet raw = generate_fixed_point_lhs(10, -0.5, 0.5, 13);
    export_snapshots(raw, "pipeline_io_test2/sample");

    nlohmann::json manifest;
    {
        std::ifstream in("pipeline_io_test2/sample.json");
        in >> manifest;
    }
    manifest.erase("dt");
    {
        std::ofstream out("pipeline_io_test2/sample.json");
        out << manifest.dump();
    }
    CHECK_THROWS_WITH_AS(ingest("pipeline_io_test2/sample.json"),
                         doctest::Contains("dt"), IoError);

    // Corrupt the binary: the checksum must catch it.
    {
        std::fstream bin("pipeline_io_test2/sample_states.bin",
                         std::ios::in | std::ios::out | std::ios::binary);
        bin.seekp(8);
        const double junk = 1e99;
        bin.write(reinterpret_cast<const char*>(&junk), sizeof junk);
    }
    manifest["dt"] = 0.0;
    {
        std::ofstream out("pipeline_io_test2/sample.json");
        out << manifest.dump();
    }
    CHECK_THROWS_WITH_AS(ingest("pipeline_io_test2/sample.json"),
                         doctest::Contains("checksum"), IoError);
    fs::remove_all("pipeline_io_test2");
}

TEST_CASE("model export/import preserves the spectrum exactly") {
    namespace fs = std::filesystem;
    fs::create_directories("pipeline_io_test3");
    SnapshotSet train = generate_fixed_point_lhs(100, -0.5, 0.5, 17);
    KoopmanModel kdmd =
        fit_kdmd_continuous(train.states, train.derivatives, KernelSpec::gaussian(2.0), 12);
    export_model(kdmd, "pipeline_io_test3/model.json");
    KoopmanModel loaded = import_model("pipeline_io_test3/model.json");
    CHECK(loaded.method == FitMethod::kdmd);
    CHECK(loaded.domain == TimeDomain::continuous);
    CHECK((loaded.eigenvalues - kdmd.eigenvalues).norm() == 0.0);
    CHECK((loaded.eigvec_coeffs - kdmd.eigvec_coeffs).norm() == 0.0);
    CHECK((loaded.modes - kdmd.modes).norm() == 0.0);
    CHECK((loaded.train_x - kdmd.train_x).norm() == 0.0);

    DictionarySpec dict{2, 2, true};
    KoopmanModel edmd = fit_edmd_continuous(train.states, train.derivatives, dict);
    export_model(edmd, "pipeline_io_test3/edmd.json");
    KoopmanModel eloaded = import_model("pipeline_io_test3/edmd.json");
    CHECK((eloaded.eigenvalues - edmd.eigenvalues).norm() == 0.0);
    CHECK(eloaded.dictionary.max_order == 2);
    fs::remove_all("pipeline_io_test3");
}

}  // TEST_SUITE
