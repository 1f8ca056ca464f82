#include "qsynapse/evolution.hpp"
#include "qsynapse/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace qsynapse {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

inline double pop1_raw(const ComplexMat4& rho) {
    return std::clamp(rho(2, 2).real() + rho(3, 3).real(), 0.0, 1.0);
}

// drho = -i[H(r), rho]; dr supplied by the caller-specific drive.
inline void drho_from(const ComplexMat4& rho, double r, const ModelParams& p, ComplexMat4& drho) {
    const ComplexMat4 h = build_hamiltonian(p, r);
    drho = mat_scale(commutator(h, rho), cplx(0.0, -1.0));
}

inline void axpy(ComplexMat4& y, double a, const ComplexMat4& x) {
    for (size_t k = 0; k < 16; ++k) y.a[k] += a * x.a[k];
}

inline void rehermitize(ComplexMat4& rho) {
    for (int i = 0; i < 4; ++i) {
        rho(i, i) = cplx(rho(i, i).real(), 0.0);
        for (int j = i + 1; j < 4; ++j) {
            const cplx avg = 0.5 * (rho(i, j) + std::conj(rho(j, i)));
            rho(i, j) = avg;
            rho(j, i) = std::conj(avg);
        }
    }
}

// Joint RK4 over (rho, r). Drive: s_c >= 0 selects the binary drive with
// that constant, s_c < 0 selects the mean-field drive read from the
// stage density matrix.
template <int MODE> // 0 = mean-field, 1 = binary
inline void rk4_generic(ComplexMat4& rho, double& r, int s_c, const ModelParams& p, double dt) {
    const SynapseParams& sp = p.synapse;
    auto drive = [&](const ComplexMat4& stage_rho, double stage_r) {
        if constexpr (MODE == 0)
            return r_rhs_meanfield(stage_r, pop1_raw(stage_rho), sp);
        else
            return r_rhs_binary(stage_r, s_c, sp);
    };

    ComplexMat4 k1, k2, k3, k4, stage;
    double kr1, kr2, kr3, kr4;

    drho_from(rho, r, p, k1);
    kr1 = drive(rho, r);

    stage = rho;
    axpy(stage, 0.5 * dt, k1);
    double r2 = r + 0.5 * dt * kr1;
    drho_from(stage, r2, p, k2);
    kr2 = drive(stage, r2);

    stage = rho;
    axpy(stage, 0.5 * dt, k2);
    double r3 = r + 0.5 * dt * kr2;
    drho_from(stage, r3, p, k3);
    kr3 = drive(stage, r3);

    stage = rho;
    axpy(stage, dt, k3);
    double r4 = r + dt * kr3;
    drho_from(stage, r4, p, k4);
    kr4 = drive(stage, r4);

    const double w = dt / 6.0;
    for (size_t k = 0; k < 16; ++k)
        rho.a[k] += w * (k1.a[k] + 2.0 * k2.a[k] + 2.0 * k3.a[k] + k4.a[k]);
    r += w * (kr1 + 2.0 * kr2 + 2.0 * kr3 + kr4);

    rehermitize(rho);
}

inline void check_trace(const ComplexMat4& rho, double t) {
    const double tr = rho(0, 0).real() + rho(1, 1).real() + rho(2, 2).real() + rho(3, 3).real();
    if (std::abs(tr - 1.0) > 1e-6) {
        char msg[128];
        std::snprintf(msg, sizeof(msg), "trace drifted to %.12g at t=%.6g", tr, t);
        throw InvariantViolation(msg);
    }
}

inline TimeSeriesRecord make_record(double t, const ComplexMat4& rho, double r) {
    DensityMatrix d{rho};
    TimeSeriesRecord rec;
    rec.t = t;
    rec.p1 = population(d, 1);
    rec.p2 = population(d, 2);
    rec.r = r;
    rec.negativity = negativity(d);
    return rec;
}

} // namespace

ComplexMat4 build_hamiltonian(const ModelParams& p, double r) {
    ComplexMat4 h;
    h(0, 0) = -p.eps1 - p.eps2;
    h(1, 1) = -p.eps1 + p.eps2;
    h(2, 2) = p.eps1 - p.eps2;
    h(3, 3) = p.eps1 + p.eps2;
    const double c = 0.5 * p.omega * r;
    h(1, 2) = c;
    h(2, 1) = c;
    return h;
}

std::pair<ComplexMat4, double> rhs_coupled(const CoupledState& s, const ModelParams& p) {
    ComplexMat4 drho;
    drho_from(s.rho.mat, s.r, p, drho);
    const double dr = r_rhs_meanfield(s.r, population(s.rho, 1), p.synapse);
    return {drho, dr};
}

void rk4_step_meanfield_inplace(ComplexMat4& rho, double& r, const ModelParams& p, double dt) {
    rk4_generic<0>(rho, r, 0, p, dt);
}

void rk4_step_binary_inplace(ComplexMat4& rho, double& r, int s_c, const ModelParams& p, double dt) {
    rk4_generic<1>(rho, r, s_c, p, dt);
}

CoupledState rk4_step(const CoupledState& s, const ModelParams& p, double dt) {
    CoupledState out = s;
    rk4_step_meanfield_inplace(out.rho.mat, out.r, p, dt);
    out.t = s.t + dt;
    check_trace(out.rho.mat, out.t);
    return out;
}

std::vector<TimeSeriesRecord> evolve(const CoupledState& initial, const ModelParams& p,
                                     const IntegratorConfig& cfg) {
    if (!(cfg.dt > 0.0) || cfg.t_end < cfg.dt)
        throw Error("evolve: require dt > 0 and t_end >= dt");
    if (cfg.sample_every < 1) throw Error("evolve: sample_every must be >= 1");

    // Full steps of dt, plus one shorter closing step when dt does not
    // divide t_end.
    const long nfull = static_cast<long>(std::floor(cfg.t_end / cfg.dt + 1e-9));
    const double rem = cfg.t_end - static_cast<double>(nfull) * cfg.dt;
    const long nsteps = nfull + (rem > 1e-12 * cfg.t_end ? 1 : 0);

    ComplexMat4 rho = initial.rho.mat;
    double r = initial.r;

    std::vector<TimeSeriesRecord> out;
    out.reserve(static_cast<size_t>(nsteps / cfg.sample_every) + 3);
    out.push_back(make_record(initial.t, rho, r));

    for (long k = 1; k <= nsteps; ++k) {
        const double step = (k <= nfull) ? cfg.dt : rem;
        const double t = initial.t + ((k <= nfull) ? static_cast<double>(k) * cfg.dt : cfg.t_end);
        rk4_step_meanfield_inplace(rho, r, p, step);
        check_trace(rho, t);
        if (k % cfg.sample_every == 0 || k == nsteps) out.push_back(make_record(t, rho, r));
    }
    return out;
}

std::vector<RminRow> r_min_sweep(std::vector<double> omega_values, std::vector<double> tau_values,
                                 const ModelParams& p_base, const IntegratorConfig& cfg,
                                 double transient_override) {
    std::sort(omega_values.begin(), omega_values.end());
    std::sort(tau_values.begin(), tau_values.end());
    omega_values.erase(std::unique(omega_values.begin(), omega_values.end()), omega_values.end());
    tau_values.erase(std::unique(tau_values.begin(), tau_values.end()), tau_values.end());

    if (omega_values.empty() || omega_values.front() != 0.0)
        throw Error("r_min_sweep: omega list must include 0 (defines the r0 reference)");

    std::vector<RminRow> rows;
    for (double tau : tau_values) {
        if (!(tau > 0.0)) throw Error("r_min_sweep: tau must be positive");
        double r0_ref = 0.0;
        for (double omega : omega_values) {
            ModelParams p = p_base;
            p.omega = omega;
            p.synapse.tau = tau;

            const double discard = (transient_override >= 0.0)
                                       ? transient_override
                                       : 5.0 * tau + (omega > 0.0 ? kTwoPi / omega : 0.0);
            if (cfg.t_end <= discard)
                throw Error("r_min_sweep: t_end must exceed the transient discard window");

            ComplexMat4 rho = basis_state({1, 0}).mat;
            double r = 1.0;
            double rmin = r;
            bool seen = false;
            const long nsteps = static_cast<long>(std::llround(cfg.t_end / cfg.dt));
            for (long k = 1; k <= nsteps; ++k) {
                rk4_step_meanfield_inplace(rho, r, p, cfg.dt);
                const double t = static_cast<double>(k) * cfg.dt;
                if (t >= discard) {
                    if (!seen || r < rmin) rmin = r;
                    seen = true;
                }
            }
            check_trace(rho, cfg.t_end);

            if (omega == 0.0) r0_ref = rmin;
            rows.push_back({tau, omega, rmin, rmin / r0_ref});
        }
    }
    return rows;
}

} // namespace qsynapse
