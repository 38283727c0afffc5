#ifndef BOGOFLOW_BOGOLIUBOV_HPP
#define BOGOFLOW_BOGOLIUBOV_HPP

#include <utility>
#include <vector>

#include "bogoflow/grid.hpp"
#include "bogoflow/hartree.hpp"
#include "bogoflow/kernels.hpp"

namespace bogoflow {

/// The pair (gamma, sigma) of the symplectic flow at one time slice.
/// gamma is stored as a full matrix including the discrete-delta part.
struct BogoliubovState {
    KernelMatrix gamma;
    KernelMatrix sigma;
    double s_anchor = 0;
    double t_current = 0;
};

/// gamma = (1/w) I, sigma = 0 at t = s.
BogoliubovState init_theta(const GridSpec& grid, double s);

/// Largest operator-norm violation among the three symplectic block relations.
double symplectic_defect(const BogoliubovState& state);

/// One Strang step of the coupled (gamma, sigma) system driven by the Hartree
/// trajectory: half free phases, midpoint rule on the bounded part frozen at
/// t + dt/2, half free phases.
BogoliubovState flow_step(const BogoliubovState& state, double t, double dt,
                          const HartreeTrajectory& traj, const Potential& v);

struct FlowSample {
    double t = 0;
    double sigma_hs = 0, sigma_linf_l2 = 0, sigma_grad_hs = 0, sigma_lap_hs = 0;
    double eta_hs = 0, gamma_op = 0, defect = 0, M_value = 0;
};

struct FlowDiagnostics {
    std::vector<FlowSample> samples;
    void write_csv(const std::string& path) const;
};

struct FlowOptions {
    int sample_every = 100;       // steps between diagnostic samples
    int defect_every_samples = 1; // defect is the costly diagnostic
    std::vector<double> snapshot_times; // states captured for free_comparison
};

struct FlowResult {
    BogoliubovState state;
    FlowDiagnostics diagnostics;
    std::vector<BogoliubovState> snapshots;
};

FlowResult evolve_theta(double s, double T, double dt, const HartreeTrajectory& traj,
                        const Potential& v, const FlowOptions& opts);

/// eta = gamma(t;s) minus the exact free propagator kernel over t - s.
KernelMatrix eta_of(const BogoliubovState& state);

/// Coefficient-space kernel of exp(i tau Lap) (circulant, built spectrally).
Mat free_propagator_coeff(const GridSpec& grid, double tau);

struct FreeComparisonPoint {
    double t = 0;
    double r_total = 0, r_sigma_hs = 0, r_gamma_op = 0;
};

/// Residual series ||Theta(t;s) - free flow of Theta(t0;s)|| for t in [t0, T].
std::vector<FreeComparisonPoint> free_comparison(const BogoliubovState& state_at_t0, double T,
                                                 double dt, const HartreeTrajectory& traj,
                                                 const Potential& v, int sample_every);

/// Dense RK4 reference integrator for the same linear system (no splitting), n <= 64.
BogoliubovState matrix_ode_oracle(const GridSpec& grid, double s, double T,
                                  const HartreeTrajectory& traj, const Potential& v,
                                  double dt_ref);

} // namespace bogoflow

#endif
