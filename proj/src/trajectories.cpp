#include "qsynapse/trajectories.hpp"
#include "qsynapse/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace qsynapse {

namespace {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline void check_trace_t(const ComplexMat4& rho, double t) {
    const double tr = rho(0, 0).real() + rho(1, 1).real() + rho(2, 2).real() + rho(3, 3).real();
    if (std::abs(tr - 1.0) > 1e-6) {
        char msg[128];
        std::snprintf(msg, sizeof(msg), "trace drifted to %.12g at t=%.6g", tr, t);
        throw InvariantViolation(msg);
    }
}

} // namespace

int sample_outcome(double p1, double u) { return (u < p1) ? 1 : 0; }

std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) {
    return splitmix64(splitmix64(master_seed) + index);
}

double uniform_from(std::uint64_t seed, std::uint64_t k) {
    const std::uint64_t h = splitmix64(splitmix64(seed) + k);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

namespace {

// Shared driver: walks the window/step structure once and hands each
// record to the sink. The record grid is a pure function of the config,
// so every trajectory of an ensemble lands on identical rows.
template <typename Sink>
void run_trajectory_impl(const CoupledState& initial, const ModelParams& p,
                         const TrajectoryConfig& cfg, std::uint64_t seed, bool with_negativity,
                         Sink&& sink) {
    if (!(cfg.dt > 0.0) || !(cfg.t_m >= cfg.dt)) throw Error("run_trajectory: require t_m >= dt > 0");
    if (cfg.sample_every < 1) throw Error("run_trajectory: sample_every must be >= 1");
    if (!(cfg.t_end > 0.0)) throw Error("run_trajectory: t_end must be positive");

    ComplexMat4 rho = initial.rho.mat;
    double r = initial.r;
    int s_c = 1; // protocol starts from the "fired" drive
    const double t0 = initial.t;

    const long full_per_window = static_cast<long>(std::floor(cfg.t_m / cfg.dt + 1e-9));
    const double window_rem = cfg.t_m - static_cast<double>(full_per_window) * cfg.dt;
    const bool window_has_rem = window_rem > 1e-12 * cfg.t_m;

    const long n_windows = static_cast<long>(std::floor(cfg.t_end / cfg.t_m + 1e-9));
    const double tail = cfg.t_end - static_cast<double>(n_windows) * cfg.t_m;
    const bool has_tail = tail > 1e-12 * cfg.t_end;

    long step_idx = 0;
    std::uint64_t meas_idx = 0;

    auto emit = [&](double t, bool meas_flag) {
        DensityMatrix d{rho};
        TrajectoryRecord rec;
        rec.t = t;
        rec.p1 = population(d, 1);
        rec.p2 = population(d, 2);
        rec.r = r;
        rec.negativity = with_negativity ? negativity(d) : 0.0;
        rec.s_c = s_c;
        rec.meas = meas_flag;
        sink(rec);
    };

    emit(t0, false);

    // Advance one window segment of n_full steps (+ optional fractional
    // step) ending at absolute time t_stop; returns nothing, emits grid
    // records along the way.
    auto advance_segment = [&](long n_full, double frac, double seg_start, double t_stop) {
        for (long k = 1; k <= n_full; ++k) {
            rk4_step_binary_inplace(rho, r, s_c, p, cfg.dt);
            ++step_idx;
            const double t = seg_start + static_cast<double>(k) * cfg.dt;
            check_trace_t(rho, t);
            if (step_idx % cfg.sample_every == 0) emit(t, false);
        }
        if (frac > 0.0) {
            rk4_step_binary_inplace(rho, r, s_c, p, frac);
            ++step_idx;
            check_trace_t(rho, t_stop);
            if (step_idx % cfg.sample_every == 0) emit(t_stop, false);
        }
    };

    for (long w = 0; w < n_windows; ++w) {
        const double seg_start = t0 + static_cast<double>(w) * cfg.t_m;
        const double t_meas = t0 + static_cast<double>(w + 1) * cfg.t_m;
        advance_segment(full_per_window, window_has_rem ? window_rem : 0.0, seg_start, t_meas);

        const double p1 = population(DensityMatrix{rho}, 1);
        const double u = uniform_from(seed, meas_idx);
        ++meas_idx;
        const int outcome = sample_outcome(p1, u);
        rho = collapse_q1(DensityMatrix{rho}, outcome).first.mat;
        s_c = outcome;
        emit(t_meas, true);
    }

    if (has_tail) {
        const double seg_start = t0 + static_cast<double>(n_windows) * cfg.t_m;
        const long tail_full = static_cast<long>(std::floor(tail / cfg.dt + 1e-9));
        const double tail_rem = tail - static_cast<double>(tail_full) * cfg.dt;
        const bool tail_has_rem = tail_rem > 1e-12 * tail;
        advance_segment(tail_full, tail_has_rem ? tail_rem : 0.0, seg_start, t0 + cfg.t_end);
        if (step_idx % cfg.sample_every != 0) emit(t0 + cfg.t_end, false);
    }
}

} // namespace

std::vector<TrajectoryRecord> run_trajectory(const CoupledState& initial, const ModelParams& p,
                                             const TrajectoryConfig& cfg, std::uint64_t seed) {
    std::vector<TrajectoryRecord> out;
    run_trajectory_impl(initial, p, cfg, seed, true,
                        [&](const TrajectoryRecord& rec) { out.push_back(rec); });
    return out;
}

std::vector<EnsembleRow> ensemble_average(const CoupledState& initial, const ModelParams& p,
                                          const TrajectoryConfig& cfg) {
    if (cfg.n_traj < 1) throw Error("ensemble_average: n_traj must be >= 1");

    // Fixed-size chunks of trajectory indices. Each chunk is summed by a
    // single worker in index order and chunks are merged in index order,
    // so the result is bit-identical for any thread count.
    constexpr int kChunk = 32;
    const int n_chunks = (cfg.n_traj + kChunk - 1) / kChunk;

    struct ChunkSums {
        std::vector<double> t, p1, p1sq, p2, r;
        bool filled = false;
    };
    std::vector<ChunkSums> chunks(static_cast<size_t>(n_chunks));

    std::atomic<int> next_chunk{0};
    std::exception_ptr first_error;
    std::mutex err_mutex;

    auto worker = [&]() {
        try {
            for (;;) {
                const int c = next_chunk.fetch_add(1);
                if (c >= n_chunks) return;
                ChunkSums& acc = chunks[static_cast<size_t>(c)];
                const int lo = c * kChunk;
                const int hi = std::min(cfg.n_traj, lo + kChunk);
                for (int i = lo; i < hi; ++i) {
                    size_t row = 0;
                    run_trajectory_impl(
                        initial, p, cfg, trajectory_seed(cfg.master_seed, static_cast<std::uint64_t>(i)),
                        false, [&](const TrajectoryRecord& rec) {
                            if (!acc.filled) {
                                acc.t.push_back(rec.t);
                                acc.p1.push_back(rec.p1);
                                acc.p1sq.push_back(rec.p1 * rec.p1);
                                acc.p2.push_back(rec.p2);
                                acc.r.push_back(rec.r);
                            } else {
                                if (row >= acc.t.size())
                                    throw Error("ensemble_average: trajectory grids disagree");
                                acc.p1[row] += rec.p1;
                                acc.p1sq[row] += rec.p1 * rec.p1;
                                acc.p2[row] += rec.p2;
                                acc.r[row] += rec.r;
                            }
                            ++row;
                        });
                    if (acc.filled && row != acc.t.size())
                        throw Error("ensemble_average: trajectory grids disagree");
                    acc.filled = true;
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };

    const int n_threads = std::max(1, cfg.threads);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    const size_t rows = chunks.front().t.size();
    std::vector<double> sp1(rows, 0.0), sp1sq(rows, 0.0), sp2(rows, 0.0), sr(rows, 0.0);
    for (const ChunkSums& acc : chunks) {
        if (acc.t.size() != rows) throw Error("ensemble_average: trajectory grids disagree");
        for (size_t k = 0; k < rows; ++k) {
            sp1[k] += acc.p1[k];
            sp1sq[k] += acc.p1sq[k];
            sp2[k] += acc.p2[k];
            sr[k] += acc.r[k];
        }
    }

    const double n = static_cast<double>(cfg.n_traj);
    std::vector<EnsembleRow> out(rows);
    for (size_t k = 0; k < rows; ++k) {
        EnsembleRow& row = out[k];
        row.t = chunks.front().t[k];
        row.p1_mean = sp1[k] / n;
        row.p2_mean = sp2[k] / n;
        row.r_mean = sr[k] / n;
        if (cfg.n_traj > 1) {
            const double var = std::max(0.0, (sp1sq[k] - n * row.p1_mean * row.p1_mean) / (n - 1.0));
            row.p1_stderr = std::sqrt(var / n);
        }
    }
    return out;
}

} // namespace qsynapse
