#include "bogoflow/grid.hpp"

#include <cmath>
#include <stdexcept>

#include "bogoflow/fft_engine.hpp"

namespace bogoflow {

namespace {
bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}

std::size_t GridSpec::size() const {
    std::size_t s = 1;
    for (int d = 0; d < dimension; ++d) s *= static_cast<std::size_t>(points_per_axis);
    return s;
}

std::array<double, 3> GridSpec::kvec(std::size_t flat) const {
    std::array<double, 3> k{0.0, 0.0, 0.0};
    const int n = points_per_axis;
    for (int d = dimension - 1; d >= 0; --d) {
        k[d] = wavenumbers[flat % n];
        flat /= n;
    }
    return k;
}

double GridSpec::k2(std::size_t flat) const {
    auto k = kvec(flat);
    return k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
}

GridSpec make_grid(int dimension, int points_per_axis, double box_length) {
    if (dimension < 1 || dimension > 3)
        throw std::invalid_argument("make_grid: dimension must be 1, 2 or 3");
    if (!is_power_of_two(points_per_axis) || points_per_axis < 8 || points_per_axis > 8192)
        throw std::invalid_argument("make_grid: points_per_axis must be a power of two in [8, 8192]");
    if (!(box_length > 0.0))
        throw std::invalid_argument("make_grid: box_length must be positive");

    GridSpec g;
    g.dimension = dimension;
    g.points_per_axis = points_per_axis;
    g.box_length = box_length;
    g.spacing = box_length / points_per_axis;
    g.quadrature_weight = std::pow(g.spacing, dimension);
    g.wavenumbers.resize(points_per_axis);
    const double dk = 2.0 * M_PI / box_length;
    const int n = points_per_axis;
    for (int m = 0; m < n; ++m)
        g.wavenumbers[m] = dk * (m < n / 2 ? m : m - n);
    return g;
}

Field make_field(const GridSpec& grid) {
    Field f{grid, Vec::Zero(static_cast<Eigen::Index>(grid.size()))};
    return f;
}

Field fourier_transform(const Field& f, FftDirection dir) {
    Field out = f;
    const int sign = (dir == FftDirection::forward) ? -1 : +1;
    detail::fft_nd(f.grid.dimension, f.grid.points_per_axis, out.values.data(), sign);
    out.values *= 1.0 / std::sqrt(static_cast<double>(f.grid.size()));
    return out;
}

Field apply_multiplier(const Field& f, const Vec& symbol_values) {
    if (symbol_values.size() != f.values.size())
        throw std::invalid_argument("apply_multiplier: symbol length mismatch");
    Field out = f;
    detail::fft_nd(f.grid.dimension, f.grid.points_per_axis, out.values.data(), -1);
    out.values.array() *= symbol_values.array();
    detail::fft_nd(f.grid.dimension, f.grid.points_per_axis, out.values.data(), +1);
    out.values *= 1.0 / static_cast<double>(f.grid.size());
    return out;
}

Field apply_multiplier(const Field& f, const std::function<cxd(const std::array<double, 3>&)>& symbol) {
    Vec sym(f.values.size());
    for (std::size_t i = 0; i < f.grid.size(); ++i)
        sym[static_cast<Eigen::Index>(i)] = symbol(f.grid.kvec(i));
    return apply_multiplier(f, sym);
}

double field_l2(const Field& f) {
    return std::sqrt(f.grid.quadrature_weight * f.values.squaredNorm());
}

FieldNorms field_norms(const Field& f) {
    FieldNorms out;
    const double w = f.grid.quadrature_weight;
    out.l2 = std::sqrt(w * f.values.squaredNorm());
    out.linf = f.values.cwiseAbs().maxCoeff();
    Vec hat = f.values;
    detail::fft_nd(f.grid.dimension, f.grid.points_per_axis, hat.data(), -1);
    hat *= 1.0 / std::sqrt(static_cast<double>(f.grid.size()));
    double s1 = 0, s2 = 0;
    for (std::size_t i = 0; i < f.grid.size(); ++i) {
        const double m = 1.0 + f.grid.k2(i);
        const double a2 = std::norm(hat[static_cast<Eigen::Index>(i)]);
        s1 += m * a2;
        s2 += m * m * a2;
    }
    out.h1 = std::sqrt(w * s1);
    out.h2 = std::sqrt(w * s2);
    return out;
}

namespace detail {

Vec convolution_symbol(const GridSpec& grid, const Vec& v) {
    // Reindex v from the centred grid to offsets: vt[flat(m)] = v(x = m*h per axis, wrapped),
    // i.e. a half-box cyclic shift along every axis. Then s = w * DFT(vt).
    const int n = grid.points_per_axis;
    const std::size_t total = grid.size();
    Vec vt(v.size());
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat, shifted = 0;
        std::size_t stride = total;
        for (int d = 0; d < grid.dimension; ++d) {
            stride /= n;
            const std::size_t idx = rem / stride;
            rem %= stride;
            shifted += ((idx + n / 2) % n) * stride;
        }
        vt[static_cast<Eigen::Index>(flat)] = v[static_cast<Eigen::Index>(shifted)];
    }
    fft_nd(grid.dimension, n, vt.data(), -1);
    return grid.quadrature_weight * vt;
}

} // namespace detail

Field convolve(const Field& v, const Field& f) {
    if (!(v.grid == f.grid))
        throw std::invalid_argument("convolve: grid mismatch");
    Vec sym = detail::convolution_symbol(v.grid, v.values);
    Field out = f;
    detail::fft_nd(f.grid.dimension, f.grid.points_per_axis, out.values.data(), -1);
    out.values.array() *= sym.array();
    detail::fft_nd(f.grid.dimension, f.grid.points_per_axis, out.values.data(), +1);
    out.values *= 1.0 / static_cast<double>(f.grid.size());
    return out;
}

} // namespace bogoflow
