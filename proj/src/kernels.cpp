#include "bogoflow/kernels.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "bogoflow/fft_engine.hpp"

namespace bogoflow {

namespace {

void require_1d(const GridSpec& g, const char* who) {
    if (g.dimension != 1) throw std::invalid_argument(std::string(who) + ": pair kernels are d=1 only");
}

// v evaluated at x_i - x_j via the centred-sample lookup (wraps through the zero tail).
inline Eigen::Index diff_index(int i, int j, int n) {
    return static_cast<Eigen::Index>(((i - j + n / 2) % n + n) % n);
}

} // namespace

KernelMatrix zero_kernel(const GridSpec& grid) {
    require_1d(grid, "zero_kernel");
    return {grid, Mat::Zero(grid.points_per_axis, grid.points_per_axis), false};
}

KernelMatrix delta_kernel(const GridSpec& grid) {
    require_1d(grid, "delta_kernel");
    KernelMatrix K{grid, Mat::Zero(grid.points_per_axis, grid.points_per_axis), true};
    K.entries.diagonal().setConstant(1.0 / grid.quadrature_weight);
    return K;
}

namespace {
KernelMatrix build_k_impl(const Field& phi, const Field& v, bool conjugate_second) {
    if (!(phi.grid == v.grid)) throw std::invalid_argument("build_k: grid mismatch");
    require_1d(phi.grid, "build_k");
    const int n = phi.grid.points_per_axis;
    KernelMatrix K{phi.grid, Mat(n, n), false};
    for (int j = 0; j < n; ++j) {
        const cxd pj = conjugate_second ? std::conj(phi.values[j]) : phi.values[j];
        for (int i = 0; i < n; ++i)
            K.entries(i, j) = v.values[diff_index(i, j, n)].real() * phi.values[i] * pj;
    }
    return K;
}
} // namespace

KernelMatrix build_k1(const Field& phi, const Field& v) { return build_k_impl(phi, v, true); }
KernelMatrix build_k2(const Field& phi, const Field& v) { return build_k_impl(phi, v, false); }

KernelMatrix project_orthogonal(const KernelMatrix& K, const Field& phi, ProjectionSide side) {
    require_1d(K.grid, "project_orthogonal");
    const double w = K.grid.quadrature_weight;
    const double nrm = std::sqrt(w * phi.values.squaredNorm());
    if (std::abs(nrm - 1.0) > 1e-8)
        throw std::invalid_argument("project_orthogonal: phi must be L2-normalized");

    KernelMatrix out{K.grid, K.entries, false};
    const Vec& p = phi.values;
    // right q: A - w (A phi) conj(phi)^T
    out.entries.noalias() -= w * (out.entries * p) * p.adjoint();
    if (side == ProjectionSide::qKq) {
        // left q: A - w phi (phi^H A)
        out.entries.noalias() -= w * p * (p.adjoint() * out.entries);
    } else {
        // left qbar: A - w conj(phi) (phi^T A)
        out.entries.noalias() -= w * p.conjugate() * (p.transpose() * out.entries);
    }
    return out;
}

OpNormResult op_norm_result(const KernelMatrix& K, double rel_tol, int max_iter, unsigned seed) {
    const double w = K.grid.quadrature_weight;
    const Eigen::Index n = K.entries.rows();
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist;
    Vec x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = cxd(dist(rng), dist(rng));
    x.normalize();

    OpNormResult res;
    double lam = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        Vec y = K.entries * x;
        const double lam_new = w * y.norm(); // ||wA x|| with unit x
        Vec z = K.entries.adjoint() * y;
        const double nz = z.norm();
        res.iterations = it;
        if (nz == 0.0) { res.value = 0.0; return res; }
        x = z / nz;
        res.residual = std::abs(lam_new - lam) / std::max(lam_new, 1e-300);
        lam = lam_new;
        if (res.residual <= rel_tol) { res.value = lam; return res; }
    }
    res.value = lam;
    res.converged = false;
    return res;
}

double op_norm(const KernelMatrix& K) { return op_norm_result(K).value; }

double hs_norm(const KernelMatrix& K) {
    return K.grid.quadrature_weight * K.entries.norm();
}

double linf_l2_norm(const KernelMatrix& K) {
    const double w = K.grid.quadrature_weight;
    double best = 0;
    for (Eigen::Index i = 0; i < K.entries.rows(); ++i)
        best = std::max(best, K.entries.row(i).squaredNorm());
    return std::sqrt(w * best);
}

KernelDerivativeNorms kernel_derivative_norms(const KernelMatrix& K) {
    if (K.has_delta)
        throw std::invalid_argument("kernel_derivative_norms: kernel carries a discrete delta part");
    const GridSpec& g = K.grid;
    const int n = g.points_per_axis;
    Mat hat = K.entries;
    detail::fft_columns(n, n, hat.data(), -1);
    hat *= 1.0 / static_cast<double>(n); // unitary-squared round trip folded into one factor

    double sg = 0, sl = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double k2 = g.wavenumbers[static_cast<std::size_t>(i)] * g.wavenumbers[static_cast<std::size_t>(i)];
        const double row2 = hat.row(i).squaredNorm() * static_cast<double>(n);
        sg += k2 * row2;
        sl += k2 * k2 * row2;
    }
    const double w = g.quadrature_weight;
    return {w * std::sqrt(sg), w * std::sqrt(sl)};
}

KernelNormReport kernel_norm_report(const KernelMatrix& K, double time_label) {
    KernelNormReport r;
    r.op_norm = op_norm(K);
    r.hs_norm = hs_norm(K);
    r.linf_l2_norm = linf_l2_norm(K);
    if (!K.has_delta) {
        auto d = kernel_derivative_norms(K);
        r.grad_hs_norm = d.grad_hs;
        r.lap_hs_norm = d.lap_hs;
    }
    r.time_label = time_label;
    return r;
}

KernelBoundCertificate verify_kernel_bounds(const KernelMatrix& Kt, const Field& v, const Field& phi) {
    const double slack = 1e-6;
    auto vn = field_norms(v);
    auto pn = field_norms(phi);
    // gradient/Laplacian L2 norms of v and phi via spectral multipliers
    auto deriv_l2 = [](const Field& f) {
        Field g1 = apply_multiplier(f, [](const std::array<double, 3>& k) {
            return cxd(0, k[0]);
        });
        Field g2 = apply_multiplier(f, [](const std::array<double, 3>& k) {
            return cxd(-(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]), 0);
        });
        return std::pair<double, double>{field_l2(g1), field_l2(g2)};
    };
    auto [dv, lv] = deriv_l2(v);
    auto [dp, lp] = deriv_l2(phi);
    const double v_l1 = v.grid.quadrature_weight * v.values.cwiseAbs().sum();

    KernelBoundCertificate cert;
    auto add = [&](const std::string& name, double lhs, double rhs) {
        BoundCheck c{name, lhs, rhs, lhs <= rhs * (1.0 + slack)};
        cert.all_pass = cert.all_pass && c.pass;
        cert.checks.push_back(std::move(c));
    };

    const double op = op_norm(Kt);
    const double hs = hs_norm(Kt);
    auto dn = kernel_derivative_norms(Kt);

    add("op<=|v|_1*|phi|_inf^2", op, v_l1 * pn.linf * pn.linf);
    add("hs<=|v|_2*|phi|_inf*|phi|_2", hs, vn.l2 * pn.linf * pn.l2);
    add("grad_hs<=|phi|_inf*(|grad_phi|_2*|v|_2+|grad_v|_2*|phi|_2)",
        dn.grad_hs, pn.linf * (dp * vn.l2 + dv * pn.l2));
    add("lap_hs<=|phi|_inf*(|lap_v|_2*|phi|_2+|grad_v|_2*|grad_phi|_2+|v|_2*|lap_phi|_2)",
        dn.lap_hs, pn.linf * (lv * pn.l2 + dv * dp + vn.l2 * lp));
    add("op<=hs", op, hs);
    return cert;
}

} // namespace bogoflow
