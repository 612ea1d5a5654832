#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "koopman/model.hpp"

namespace koopman {

struct Normalization {
    bool applied = false;
    RealVector shift;
    RealVector scale;
};

struct Provenance {
    std::string kind;    // "generated" or "ingested"
    std::string system;  // e.g. "fixed_point", "hopf"
    std::string sampler; // "lhs", "trajectory", ...
    std::uint64_t seed = 0;
    std::string rng = "mt19937_64";
    std::string manifest;  // source path when ingested
};

/// Time-ordered state samples (rows), optionally with state derivatives.
struct SnapshotSet {
    RealMatrix states;
    RealMatrix derivatives;  // 0 x 0 when absent
    double dt = 0.0;
    Normalization normalization;
    Provenance provenance;

    bool has_derivatives() const { return derivatives.size() > 0; }
    Index rows() const { return states.rows(); }
    Index cols() const { return states.cols(); }
};

/// xdot1 = mu x1, xdot2 = lambda (x2 - x1^2); closed-form flow throughout.
struct FixedPointSystem {
    double mu = -0.05;
    double lambda = -1.0;

    double manifold_coeff() const { return lambda / (lambda - 2.0 * mu); }
    RealMatrix flow(const Eigen::Ref<const RealMatrix>& x0, double t) const;
    RealMatrix rhs(const Eigen::Ref<const RealMatrix>& x) const;
};

/// Latin hypercube point cloud in [lo, hi]^2 with exact derivatives.
SnapshotSet generate_fixed_point_lhs(Index m, double lo, double hi,
                                     std::uint64_t seed,
                                     const FixedPointSystem& sys = {});

/// Exact trajectory samples at t = 0, dt, ..., <= t_end (with derivatives).
SnapshotSet generate_fixed_point_trajectory(const Eigen::Vector2d& x0, double dt,
                                            double t_end,
                                            const FixedPointSystem& sys = {});

/// Hopf normal form in (x, y) plus a decaying third state:
/// rdot = mu_h r - r^3, thetadot = omega, zdot = -kappa z (closed form).
struct HopfSystem {
    double mu_h = 0.2;
    double omega = 1.0;
    double kappa = 0.5;

    RealMatrix flow(const Eigen::Ref<const RealMatrix>& x0, double t) const;
};

SnapshotSet generate_hopf_trajectory(const Eigen::Vector3d& x0, double dt,
                                     double t_end, const HopfSystem& sys = {});

struct PodBasis {
    RealVector mean;          // N_full
    RealMatrix basis;         // N_full x K, orthonormal columns
    RealVector singular_values;  // all singular values of the centered data
    double energy_fraction = 0.0;
    Index k() const { return basis.cols(); }
};

struct PodReduction {
    PodBasis pod;
    SnapshotSet coefficients;
};

/// Mean-subtracted SVD; pass k >= 0 for a fixed count or energy in (0,1] to
/// pick the smallest K reaching that squared-singular-value fraction.
PodReduction pod_reduce(const SnapshotSet& full, Index k, double energy = 0.0);

RealMatrix pod_lift(const PodBasis& pod, const Eigen::Ref<const RealMatrix>& coeffs);

struct TrainValTest {
    SnapshotSet train, val, test;
};

/// Index i mod 3 -> {train, val, test}; each child dt is tripled.
TrainValTest stride_split(const SnapshotSet& traj);

/// x(t_m) = Re[ sum_i phi_i(x0) exp(mu_i m dt) b_i ] for m = 0..horizon.
/// The discarded imaginary residual (max modulus) is reported if requested.
RealMatrix predict(const KoopmanModel& model, const Eigen::Ref<const RealVector>& x0,
                   Index horizon, double dt_step, double* imag_residual = nullptr);

/// Shift/scale each component into [-1, 1]; derivatives share the scale.
SnapshotSet normalize(const SnapshotSet& raw);
SnapshotSet denormalize(const SnapshotSet& normalized);

}  // namespace koopman
