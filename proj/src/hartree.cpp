#include "bogoflow/hartree.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "bogoflow/fft_engine.hpp"

namespace bogoflow {

Potential build_bump_potential(const GridSpec& grid, double g, double R) {
    if (g < 0) throw std::invalid_argument("build_bump_potential: coupling must be >= 0");
    if (!(R > 0) || R >= grid.box_length / 4)
        throw std::invalid_argument("build_bump_potential: radius must satisfy 0 < R < L/4");

    Potential v{make_field(grid), g, R};
    const int n = grid.points_per_axis;
    const std::size_t total = grid.size();
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat, stride = total;
        double r2 = 0;
        for (int d = 0; d < grid.dimension; ++d) {
            stride /= n;
            const double x = grid.coord(static_cast<int>(rem / stride));
            rem %= stride;
            r2 += x * x;
        }
        const double u = 1.0 - r2 / (R * R);
        if (u > 0) v.values.values[static_cast<Eigen::Index>(flat)] = g * u * u * u;
    }
    return v;
}

Field gaussian_data(const GridSpec& grid, double width) {
    Field f = make_field(grid);
    const int n = grid.points_per_axis;
    const std::size_t total = grid.size();
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat, stride = total;
        double r2 = 0;
        for (int d = 0; d < grid.dimension; ++d) {
            stride /= n;
            const double x = grid.coord(static_cast<int>(rem / stride));
            rem %= stride;
            r2 += x * x;
        }
        f.values[static_cast<Eigen::Index>(flat)] = std::exp(-r2 / (2 * width * width));
    }
    f.values /= field_l2(f);
    return f;
}

namespace {

Vec half_kinetic_symbol(const GridSpec& grid, double dt) {
    Vec sym(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i)
        sym[static_cast<Eigen::Index>(i)] = std::exp(cxd(0, -0.5 * dt * grid.k2(i)));
    return sym;
}

void apply_symbol_inplace(const GridSpec& grid, Vec& f, const Vec& sym) {
    detail::fft_nd(grid.dimension, grid.points_per_axis, f.data(), -1);
    f.array() *= sym.array();
    detail::fft_nd(grid.dimension, grid.points_per_axis, f.data(), +1);
    f *= 1.0 / static_cast<double>(grid.size());
}

RVec mean_field(const GridSpec& grid, const Vec& conv_sym, const Vec& phi) {
    Vec rho = phi.array().abs2().cast<cxd>();
    detail::fft_nd(grid.dimension, grid.points_per_axis, rho.data(), -1);
    rho.array() *= conv_sym.array();
    detail::fft_nd(grid.dimension, grid.points_per_axis, rho.data(), +1);
    rho *= 1.0 / static_cast<double>(grid.size());
    return rho.real();
}

} // namespace

Field hartree_step(const Field& phi, double /*t*/, double dt, const Potential& v) {
    if (!(dt > 0)) throw std::invalid_argument("hartree_step: dt must be positive");
    const GridSpec& g = phi.grid;
    Vec kin = half_kinetic_symbol(g, dt);
    Vec conv_sym = detail::convolution_symbol(g, v.values.values);

    Field out = phi;
    apply_symbol_inplace(g, out.values, kin);
    RVec V = mean_field(g, conv_sym, out.values);
    for (Eigen::Index i = 0; i < out.values.size(); ++i)
        out.values[i] *= std::exp(cxd(0, -dt * V[i]));
    apply_symbol_inplace(g, out.values, kin);
    return out;
}

ConservedQuantities conserved_quantities(const Field& phi, const Potential& v) {
    const GridSpec& g = phi.grid;
    const double w = g.quadrature_weight;
    ConservedQuantities out;
    out.mass = w * phi.values.squaredNorm();

    Vec hat = phi.values;
    detail::fft_nd(g.dimension, g.points_per_axis, hat.data(), -1);
    double kin = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
        kin += g.k2(i) * std::norm(hat[static_cast<Eigen::Index>(i)]);
    kin *= w / static_cast<double>(g.size());

    Field rho = make_field(g);
    rho.values = phi.values.array().abs2().cast<cxd>();
    Field vr = convolve(v.values, rho);
    double inter = 0;
    for (Eigen::Index i = 0; i < rho.values.size(); ++i)
        inter += rho.values[i].real() * vr.values[i].real();
    out.energy = kin + 0.5 * w * inter;
    return out;
}

Vec HartreeTrajectory::interpolate(double t) const {
    if (sample_times.empty()) throw std::runtime_error("trajectory is empty");
    if (t <= sample_times.front()) return states.front();
    if (t >= sample_times.back()) {
        if (t > sample_times.back() + 1e-9)
            throw std::runtime_error("trajectory does not cover requested time");
        return states.back();
    }
    auto it = std::upper_bound(sample_times.begin(), sample_times.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - sample_times.begin()) - 1;
    const double t0 = sample_times[j], t1 = sample_times[j + 1];
    const double a = (t - t0) / (t1 - t0);
    return (1.0 - a) * states[j] + a * states[j + 1];
}

void HartreeTrajectory::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "t,mass,energy,linf,h1,h2\n";
    out.precision(15);
    for (const auto& d : diagnostics)
        out << d.t << ',' << d.mass << ',' << d.energy << ',' << d.linf << ','
            << d.h1 << ',' << d.h2 << '\n';
}

HartreeTrajectory hartree_evolve(const Field& phi0, const Potential& v, double T, double dt,
                                 int sample_every) {
    if (!(T > 0)) throw std::invalid_argument("hartree_evolve: T must be positive");
    if (!(dt > 0) || dt > 1e-2 + 1e-15)
        throw std::invalid_argument("hartree_evolve: dt must be in (0, 1e-2]");
    if (sample_every < 1) throw std::invalid_argument("hartree_evolve: sample_every must be >= 1");

    const GridSpec& g = phi0.grid;
    Vec kin = half_kinetic_symbol(g, dt);
    Vec full_kin(kin.size());
    full_kin.array() = kin.array() * kin.array();
    Vec conv_sym = detail::convolution_symbol(g, v.values.values);
    const int nsteps = static_cast<int>(std::llround(T / dt));

    HartreeTrajectory traj;
    traj.grid = g;
    Field phi = phi0;

    auto sample = [&](double t) {
        traj.sample_times.push_back(t);
        traj.states.push_back(phi.values);
        auto nn = field_norms(phi);
        auto cq = conserved_quantities(phi, v);
        traj.diagnostics.push_back({t, cq.mass, cq.energy, nn.linf, nn.h1, nn.h2});
        if (nn.linf > 1e6 || nn.h2 > 1e6)
            throw std::runtime_error("hartree_evolve: instability detected at t=" + std::to_string(t) +
                                     " (norm exceeded 1e6)");
    };

    sample(0.0);
    // Strang steps with the two adjacent half-kicks merged between samples.
    apply_symbol_inplace(g, phi.values, kin);
    for (int i = 0; i < nsteps; ++i) {
        RVec V = mean_field(g, conv_sym, phi.values);
        for (Eigen::Index j = 0; j < phi.values.size(); ++j)
            phi.values[j] *= std::exp(cxd(0, -dt * V[j]));
        const bool at_sample = ((i + 1) % sample_every == 0) || (i + 1 == nsteps);
        if (at_sample) {
            apply_symbol_inplace(g, phi.values, kin);
            sample((i + 1) * dt);
            if (i + 1 < nsteps) apply_symbol_inplace(g, phi.values, kin);
        } else {
            apply_symbol_inplace(g, phi.values, full_kin);
        }
    }
    return traj;
}

} // namespace bogoflow
