#ifndef BOGOFLOW_HARTREE_HPP
#define BOGOFLOW_HARTREE_HPP

#include <vector>

#include "bogoflow/grid.hpp"

namespace bogoflow {

/// Nonnegative, even, radially decreasing C^2 interaction potential with compact support.
struct Potential {
    Field values;
    double coupling = 0.0;       // g >= 0
    double support_radius = 0.0; // R
};

/// v(x) = g (1 - |x|^2/R^2)^3 for |x| <= R, zero outside.
Potential build_bump_potential(const GridSpec& grid, double g, double R);

struct HartreeSample {
    double t = 0;
    double mass = 0, energy = 0, linf = 0, h1 = 0, h2 = 0;
};

struct HartreeTrajectory {
    GridSpec grid;
    std::vector<double> sample_times;
    std::vector<Vec> states;          // condensate values at the sample times
    std::vector<HartreeSample> diagnostics;

    /// Linear interpolation of the condensate between stored samples.
    Vec interpolate(double t) const;
    void write_csv(const std::string& path) const; // t,mass,energy,linf,h1,h2
};

/// One Strang split step of i d/dt phi = -Lap phi + (v*|phi|^2) phi.
Field hartree_step(const Field& phi, double t, double dt, const Potential& v);

/// Evolve and sample every `sample_every` steps (diagnostics and stored states).
HartreeTrajectory hartree_evolve(const Field& phi0, const Potential& v, double T, double dt,
                                 int sample_every);

struct ConservedQuantities {
    double mass = 0, energy = 0;
};
ConservedQuantities conserved_quantities(const Field& phi, const Potential& v);

/// L2-normalized centred Gaussian exp(-|x|^2/(2 a^2)).
Field gaussian_data(const GridSpec& grid, double width);

} // namespace bogoflow

#endif
