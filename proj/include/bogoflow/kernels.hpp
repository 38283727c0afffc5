#ifndef BOGOFLOW_KERNELS_HPP
#define BOGOFLOW_KERNELS_HPP

#include <string>

#include "bogoflow/grid.hpp"
#include "bogoflow/hartree.hpp"

namespace bogoflow {

/// Two-point kernel A(x;y) on a d=1 grid, entry (i,j) = A(x_i; x_j).
/// The operator action is (Af)(x_i) = w * sum_j A(x_i;x_j) f(x_j).
struct KernelMatrix {
    GridSpec grid;
    Mat entries;
    bool has_delta = false; // set when the kernel carries a discrete-delta part
};

KernelMatrix zero_kernel(const GridSpec& grid);
KernelMatrix delta_kernel(const GridSpec& grid); // (1/w) I, flagged has_delta

/// K1(x;y) = v(x-y) phi(x) conj(phi(y));  K2(x;y) = v(x-y) phi(x) phi(y).
KernelMatrix build_k1(const Field& phi, const Field& v);
KernelMatrix build_k2(const Field& phi, const Field& v);

enum class ProjectionSide { qKq, qbarKq };

/// q = 1 - |phi><phi| applied on both sides (qbar uses conj(phi) on the left).
KernelMatrix project_orthogonal(const KernelMatrix& K, const Field& phi, ProjectionSide side);

struct OpNormResult {
    double value = 0;
    bool converged = true;
    int iterations = 0;
    double residual = 0; // relative change of the last iterate
};

/// Largest singular value of the weighted matrix w*A by seeded power iteration on A^H A.
OpNormResult op_norm_result(const KernelMatrix& K, double rel_tol = 1e-8, int max_iter = 10000,
                            unsigned seed = 20240901u);
double op_norm(const KernelMatrix& K);

double hs_norm(const KernelMatrix& K);      // w * Frobenius
double linf_l2_norm(const KernelMatrix& K); // max_i sqrt(w sum_j |A(i,j)|^2)

struct KernelDerivativeNorms {
    double grad_hs = 0, lap_hs = 0;
};
/// HS norms of the first-argument spectral gradient/Laplacian; rejects delta-carrying kernels.
KernelDerivativeNorms kernel_derivative_norms(const KernelMatrix& K);

struct KernelNormReport {
    double op_norm = 0, hs_norm = 0, linf_l2_norm = 0, grad_hs_norm = 0, lap_hs_norm = 0;
    double time_label = 0;
};
KernelNormReport kernel_norm_report(const KernelMatrix& K, double time_label);

/// One inequality of the kernel-bound certificate.
struct BoundCheck {
    std::string name;
    double lhs = 0, rhs = 0;
    bool pass = false;
};

struct KernelBoundCertificate {
    std::vector<BoundCheck> checks;
    bool all_pass = true;
};

/// Certified bounds for a projected kernel: op <= |v|_L1 |phi|_inf^2, hs <= |v|_L2 |phi|_inf |phi|_L2,
/// the product-rule bounds for grad/lap HS norms, and op <= hs. Slack 1e-6 relative.
KernelBoundCertificate verify_kernel_bounds(const KernelMatrix& Kt, const Field& v, const Field& phi);

} // namespace bogoflow

#endif
