#pragma once

#include <array>
#include <vector>

namespace qsynapse {

// Short-term depression constants: U is the release probability, tau the
// resource recovery time (natural units).
struct SynapseParams {
    double U = 0.5;
    double tau = 10.0;
};

// dr/dt = (1-r)/tau - U*r*pop, the mean-field form driven by a qubit
// population in [0,1].
double r_rhs_meanfield(double r, double pop, const SynapseParams& p);

// dr/dt = (1-r)/tau - U*r*s_c, the measurement-driven form with the
// binary drive s_c in {0,1}. Same formula with pop replaced by s_c.
double r_rhs_binary(double r, int s_c, const SynapseParams& p);

// Stationary resource level under a drive of strength f: 1/(1 + tau*U*f).
double r_stationary(const SynapseParams& p, double f);

// Classical spike-driven depression: exponential recovery toward 1 with
// time constant tau, integrated in closed form between spikes, and an
// instantaneous jump r <- r*(1-U) at each spike (the jump consumes the
// pre-spike left limit). Returns (t, r) sampled on the dt grid from 0 to
// t_end inclusive; samples that coincide with a spike hold the post-jump
// value.
std::vector<std::array<double, 2>> simulate_classical_spikes(
    const SynapseParams& p, const std::vector<double>& spike_times, double r0,
    double t_end, double dt);

} // namespace qsynapse
