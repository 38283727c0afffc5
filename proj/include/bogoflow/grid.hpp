#ifndef BOGOFLOW_GRID_HPP
#define BOGOFLOW_GRID_HPP

#include <array>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace bogoflow {

using cxd = std::complex<double>;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Mat = Eigen::MatrixXcd;

/// Periodic uniform grid on [-L/2, L/2)^d with FFT-ordered wavenumbers.
struct GridSpec {
    int dimension = 1;            // d in {1,2,3}
    int points_per_axis = 0;      // n, power of two
    double box_length = 0.0;      // L
    double spacing = 0.0;         // h = L/n
    double quadrature_weight = 0; // w = h^d
    std::vector<double> wavenumbers; // per axis, FFT order: 0..n/2-1, -n/2..-1 (times 2pi/L)

    std::size_t size() const;     // n^d
    double coord(int i) const { return -0.5 * box_length + spacing * i; }
    /// k-vector of the flattened index (row-major, last axis fastest), padded to 3 entries
    std::array<double, 3> kvec(std::size_t flat) const;
    double k2(std::size_t flat) const;

    bool operator==(const GridSpec& o) const {
        return dimension == o.dimension && points_per_axis == o.points_per_axis &&
               box_length == o.box_length;
    }
};

GridSpec make_grid(int dimension, int points_per_axis, double box_length);

/// Complex-valued one-body function on the grid, flattened row-major.
struct Field {
    GridSpec grid;
    Vec values;
};

Field make_field(const GridSpec& grid);

enum class FftDirection { forward, inverse };

/// Unitary d-dimensional FFT (inverse(forward(f)) == f, Parseval exact).
Field fourier_transform(const Field& f, FftDirection dir);

/// inverse-FFT(symbol(k) . FFT(f)); symbol receives the signed k-vector.
Field apply_multiplier(const Field& f, const std::function<cxd(const std::array<double, 3>&)>& symbol);
/// Same with the symbol already evaluated on the flattened k-grid.
Field apply_multiplier(const Field& f, const Vec& symbol_values);

struct FieldNorms {
    double l2 = 0, linf = 0, h1 = 0, h2 = 0;
};
FieldNorms field_norms(const Field& f);

double field_l2(const Field& f);

/// Periodic convolution scaled by the quadrature weight: approximates (v*f)(x) = int v(x-y) f(y) dy.
Field convolve(const Field& v, const Field& f);

namespace detail {
/// Symbol s(k) such that convolve(v, f) = IFFT(s . FFT(f)); v sampled on the centred grid.
Vec convolution_symbol(const GridSpec& grid, const Vec& v);
} // namespace detail

} // namespace bogoflow

#endif
