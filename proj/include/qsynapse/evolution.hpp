#pragma once

#include "qsynapse/quantum_state.hpp"
#include "qsynapse/synapse.hpp"

#include <utility>
#include <vector>

namespace qsynapse {

// Hamiltonian and synapse constants (hbar = 1 throughout).
struct ModelParams {
    double eps1 = 0.0;
    double eps2 = 0.0;
    double omega = 0.05;
    SynapseParams synapse;
};

struct IntegratorConfig {
    double dt = 0.001;
    double t_end = 1000.0;
    long sample_every = 1000; // integrator steps per output record
};

struct CoupledState {
    DensityMatrix rho;
    double r = 1.0;
    double t = 0.0;
};

struct TimeSeriesRecord {
    double t = 0.0;
    double p1 = 0.0;
    double p2 = 0.0;
    double r = 0.0;
    double negativity = 0.0;
};

// eps1*sz_1 + eps2*sz_2 + (omega/2)*r*(s1+ s2- + s1- s2+): diagonal
// (-e1-e2, -e1+e2, e1-e2, e1+e2) plus the coupling between |01> and |10>.
ComplexMat4 build_hamiltonian(const ModelParams& p, double r);

// Right-hand side of the coupled system: drho = -i[H(r), rho] and
// dr = (1-r)/tau - U*r*<s1+ s1->, the population read from the same rho
// that enters the commutator (fully coupled integration stages).
std::pair<ComplexMat4, double> rhs_coupled(const CoupledState& s, const ModelParams& p);

// One classical RK4 step of the joint vector (rho, r); the result is
// re-Hermitized. Throws InvariantViolation if |trace-1| exceeds 1e-6.
CoupledState rk4_step(const CoupledState& s, const ModelParams& p, double dt);

// Integration kernels shared with the measurement-protocol module.
// Advance (rho, r) in place by one RK4 step; mean-field drive reads the
// stage population, binary drive uses the constant s_c.
void rk4_step_meanfield_inplace(ComplexMat4& rho, double& r, const ModelParams& p, double dt);
void rk4_step_binary_inplace(ComplexMat4& rho, double& r, int s_c, const ModelParams& p, double dt);

// Repeated rk4_step from the initial state to cfg.t_end, recording every
// cfg.sample_every steps plus t=0 and the final step; negativity is
// evaluated per record only. Throws InvariantViolation (with the failure
// time) if the trace drifts.
std::vector<TimeSeriesRecord> evolve(const CoupledState& initial, const ModelParams& p,
                                     const IntegratorConfig& cfg);

struct RminRow {
    double tau = 0.0;
    double omega = 0.0;
    double r_min = 0.0;
    double ratio = 0.0; // r_min / r_min(omega=0) within the same tau row
};

// For each (tau, omega) cell: evolve from |10><10| with r(0)=1, record
// the minimum r(t) reached after discarding an initial transient window,
// and normalize each tau row by its omega=0 minimum. The default discard
// is 5*tau + one bare oscillation period 2*pi/omega (5*tau when omega=0);
// pass transient_override >= 0 to replace it. Rows are emitted sorted by
// (tau, omega) regardless of input order.
std::vector<RminRow> r_min_sweep(std::vector<double> omega_values, std::vector<double> tau_values,
                                 const ModelParams& p_base, const IntegratorConfig& cfg,
                                 double transient_override = -1.0);

} // namespace qsynapse
