#pragma once

#include "qsynapse/evolution.hpp"

#include <cstdint>
#include <vector>

namespace qsynapse {

struct TrajectoryConfig {
    double t_m = 30.0;       // time between projective measurements
    int n_traj = 1;          // ensemble size
    std::uint64_t master_seed = 1;
    double dt = 0.001;       // inner integrator step
    double t_end = 600.0;
    long sample_every = 1000;
    int threads = 1;         // worker threads for ensemble_average
};

struct TrajectoryRecord {
    double t = 0.0;
    double p1 = 0.0;
    double p2 = 0.0;
    double r = 0.0;
    double negativity = 0.0;
    int s_c = 1;    // binary drive in force at this instant
    bool meas = false; // true for the forced post-collapse record
};

struct EnsembleRow {
    double t = 0.0;
    double p1_mean = 0.0;
    double p2_mean = 0.0;
    double r_mean = 0.0;
    double p1_stderr = 0.0;
};

// Measurement outcome rule: 1 if u < p1 else 0. The boundary u == p1
// resolves to 0 so runs are reproducible bit-for-bit.
int sample_outcome(double p1, double u);

// Counter-based uniforms: the k-th variate of a stream is a pure
// function of (seed, k), so trajectories never share state and the
// ensemble is order-insensitive.
std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index);
double uniform_from(std::uint64_t seed, std::uint64_t k);

// One realization of the measurement protocol: s_c starts at 1, each
// window of length t_m evolves (rho, r) jointly with the binary drive,
// then qubit 1 is measured projectively; the sampled outcome sets both
// the collapsed state and the next s_c. Records follow the decimated
// step grid plus a forced flagged record (post-collapse) at each
// measurement instant; a final partial window runs without a closing
// measurement. Identical (inputs, seed) give identical output.
std::vector<TrajectoryRecord> run_trajectory(const CoupledState& initial, const ModelParams& p,
                                             const TrajectoryConfig& cfg, std::uint64_t seed);

// Pointwise average over n_traj trajectories with per-trajectory seeds
// trajectory_seed(master_seed, i). Accumulation runs in fixed chunks of
// trajectory indices merged in index order, so the output bytes do not
// depend on cfg.threads.
std::vector<EnsembleRow> ensemble_average(const CoupledState& initial, const ModelParams& p,
                                          const TrajectoryConfig& cfg);

} // namespace qsynapse
