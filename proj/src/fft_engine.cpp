#include "bogoflow/fft_engine.hpp"

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

#include <fftw3.h>

namespace bogoflow::detail {

namespace {

std::mutex plan_mutex;

// Plans are created with FFTW_UNALIGNED so they can be executed on any buffer
// via the new-array interface.
using PlanKey = std::tuple<int, int, int, int>; // (dimension|0 for columns, n, ncols, sign)
std::map<PlanKey, fftw_plan> plan_cache;

fftw_plan get_nd_plan(int dimension, int n, int sign) {
    PlanKey key{dimension, n, 0, sign};
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto it = plan_cache.find(key);
    if (it != plan_cache.end()) return it->second;

    std::size_t total = 1;
    for (int d = 0; d < dimension; ++d) total *= static_cast<std::size_t>(n);
    std::vector<fftw_complex> scratch(total);
    std::vector<int> dims(dimension, n);
    fftw_plan p = fftw_plan_dft(dimension, dims.data(), scratch.data(), scratch.data(),
                                sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p) throw std::runtime_error("fftw plan creation failed");
    plan_cache.emplace(key, p);
    return p;
}

fftw_plan get_columns_plan(int n, int ncols, int sign) {
    PlanKey key{0, n, ncols, sign};
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto it = plan_cache.find(key);
    if (it != plan_cache.end()) return it->second;

    std::vector<fftw_complex> scratch(static_cast<std::size_t>(n) * ncols);
    int dims[1] = {n};
    fftw_plan p = fftw_plan_many_dft(1, dims, ncols,
                                     scratch.data(), nullptr, 1, n,
                                     scratch.data(), nullptr, 1, n,
                                     sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p) throw std::runtime_error("fftw plan creation failed");
    plan_cache.emplace(key, p);
    return p;
}

} // namespace

void fft_nd(int dimension, int n, std::complex<double>* data, int sign) {
    fftw_plan p = get_nd_plan(dimension, n, sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
}

void fft_columns(int n, int ncols, std::complex<double>* data, int sign) {
    fftw_plan p = get_columns_plan(n, ncols, sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
}

} // namespace bogoflow::detail
