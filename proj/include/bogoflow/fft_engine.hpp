#ifndef BOGOFLOW_FFT_ENGINE_HPP
#define BOGOFLOW_FFT_ENGINE_HPP

#include <complex>
#include <cstddef>

namespace bogoflow::detail {

// Plain (non-unitary) transforms; callers apply their own 1/N scaling.
// Plans are cached per shape behind a mutex; execution does not mutate shared state.

/// d-dimensional c2c transform of a row-major array with extents n per axis.
void fft_nd(int dimension, int n, std::complex<double>* data, int sign); // sign: -1 forward, +1 backward

/// Batch of ncols length-n transforms over contiguous columns (stride 1, dist n), in place.
void fft_columns(int n, int ncols, std::complex<double>* data, int sign);

} // namespace bogoflow::detail

#endif
