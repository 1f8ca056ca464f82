#include "qsynapse/synapse.hpp"
#include "qsynapse/errors.hpp"

#include <cmath>

namespace qsynapse {

double r_rhs_meanfield(double r, double pop, const SynapseParams& p) {
    return (1.0 - r) / p.tau - p.U * r * pop;
}

double r_rhs_binary(double r, int s_c, const SynapseParams& p) {
    return (1.0 - r) / p.tau - p.U * r * static_cast<double>(s_c);
}

double r_stationary(const SynapseParams& p, double f) {
    return 1.0 / (1.0 + p.tau * p.U * f);
}

namespace {

// Closed-form recovery over a gap dt: r(t0+dt) = 1 - (1-r(t0)) e^{-dt/tau}.
inline double recover(double r, double dt, double tau) {
    return 1.0 - (1.0 - r) * std::exp(-dt / tau);
}

} // namespace

std::vector<std::array<double, 2>> simulate_classical_spikes(
    const SynapseParams& p, const std::vector<double>& spike_times, double r0,
    double t_end, double dt) {
    if (!(r0 > 0.0 && r0 <= 1.0)) throw Error("simulate_classical_spikes: r0 must be in (0,1]");
    if (!(dt > 0.0) || !(t_end >= 0.0)) throw Error("simulate_classical_spikes: bad grid");
    for (size_t i = 1; i < spike_times.size(); ++i)
        if (spike_times[i] < spike_times[i - 1])
            throw Error("simulate_classical_spikes: spike times must be ascending");

    std::vector<std::array<double, 2>> out;
    const long nsteps = static_cast<long>(std::ceil(t_end / dt - 1e-12));
    out.reserve(static_cast<size_t>(nsteps) + 1);

    double r = r0;
    double t = 0.0;
    size_t spike = 0;
    // Spikes at exactly t=0 fire before the first sample.
    while (spike < spike_times.size() && spike_times[spike] <= 0.0) {
        r *= (1.0 - p.U);
        ++spike;
    }
    out.push_back({0.0, r});

    for (long k = 1; k <= nsteps; ++k) {
        const double tk = std::min(static_cast<double>(k) * dt, t_end);
        // Apply every spike in (t, tk]: recover to the spike, jump, go on.
        while (spike < spike_times.size() && spike_times[spike] <= tk) {
            r = recover(r, spike_times[spike] - t, p.tau);
            r *= (1.0 - p.U);
            t = spike_times[spike];
            ++spike;
        }
        r = recover(r, tk - t, p.tau);
        t = tk;
        out.push_back({tk, r});
    }
    return out;
}

} // namespace qsynapse
