#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/SVD>

#include "bogoflow/kernels.hpp"

using namespace bogoflow;

namespace {

Field random_normalized(const GridSpec& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist;
    Field f = make_field(g);
    for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values[i] = cxd(dist(rng), dist(rng));
    f.values /= field_l2(f);
    return f;
}

KernelMatrix random_kernel(const GridSpec& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist;
    KernelMatrix K = zero_kernel(g);
    for (Eigen::Index j = 0; j < K.entries.cols(); ++j)
        for (Eigen::Index i = 0; i < K.entries.rows(); ++i)
            K.entries(i, j) = cxd(dist(rng), dist(rng));
    return K;
}

double svd_op_norm(const KernelMatrix& K) {
    Mat weighted = K.grid.quadrature_weight * K.entries;
    Eigen::JacobiSVD<Mat> svd(weighted);
    return svd.singularValues()[0];
}

} // namespace

TEST_CASE("kernel construction: zero phi, delta potential, direct-sum HS oracle") {
    auto g = make_grid(1, 64, 16.0);
    Field zero = make_field(g);
    Field v = make_field(g);
    v.values[32] = 1.0; // bump at origin
    CHECK(hs_norm(build_k2(zero, v)) == 0.0);

    // v = discrete delta: K2 diagonal with entries phi(x)^2 / w
    Field phi = random_normalized(g, 1);
    Field delta = make_field(g);
    delta.values[32] = 1.0 / g.quadrature_weight;
    KernelMatrix K2 = build_k2(phi, delta);
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j) {
            const cxd expect = (i == j) ? phi.values[i] * phi.values[i] / g.quadrature_weight : cxd(0, 0);
            CHECK(std::abs(K2.entries(i, j) - expect) < 1e-12 / g.quadrature_weight);
        }

    // hs norm against the direct double sum of v^2 |phi(x)|^2 |phi(y)|^2
    auto g256 = make_grid(1, 256, 64.0);
    Field phig = make_field(g256);
    for (int i = 0; i < 256; ++i) {
        const double x = g256.coord(i);
        phig.values[i] = std::exp(-x * x / 2);
    }
    phig.values /= field_l2(phig);
    Field vb = make_field(g256);
    for (int i = 0; i < 256; ++i) {
        const double x = g256.coord(i);
        vb.values[i] = std::abs(x) < 1.0 ? std::pow(1 - x * x, 3) : 0.0;
    }
    KernelMatrix K = build_k2(phig, vb);
    double direct = 0;
    const int n = 256;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int dij = ((i - j + n / 2) % n + n) % n;
            direct += std::norm(vb.values[dij]) * std::norm(phig.values[i]) * std::norm(phig.values[j]);
        }
    direct = g256.quadrature_weight * std::sqrt(direct);
    CHECK(std::abs(hs_norm(K) - direct) < 1e-10);

    // K2 symmetric; K1 self-adjoint for real even v
    KernelMatrix K1 = build_k1(phig, vb);
    CHECK((K.entries - K.entries.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((K1.entries - K1.entries.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("projection: annihilates phi, rank-one cases, contraction, idempotent") {
    auto g = make_grid(1, 64, 16.0);
    Field phi = random_normalized(g, 2);

    // K = |phi><phi| maps to zero under qKq
    KernelMatrix K = zero_kernel(g);
    K.entries = phi.values * phi.values.adjoint();
    KernelMatrix Kt = project_orthogonal(K, phi, ProjectionSide::qKq);
    CHECK(hs_norm(Kt) < 1e-12);

    // kernel built from a field orthogonal to phi is untouched
    Field psi = random_normalized(g, 3);
    psi.values -= g.quadrature_weight * (phi.values.adjoint() * psi.values)(0, 0) * phi.values;
    psi.values /= std::sqrt(g.quadrature_weight) * psi.values.norm();
    KernelMatrix Ko = zero_kernel(g);
    Ko.entries = psi.values * psi.values.adjoint();
    KernelMatrix Kot = project_orthogonal(Ko, phi, ProjectionSide::qKq);
    CHECK((Kot.entries - Ko.entries).cwiseAbs().maxCoeff() < 1e-10);

    // the phi-column condition: w sum_j Kt(x_i, x_j) phi(x_j) = 0
    KernelMatrix R = random_kernel(g, 4);
    for (auto side : {ProjectionSide::qKq, ProjectionSide::qbarKq}) {
        KernelMatrix Rt = project_orthogonal(R, phi, side);
        Vec col = g.quadrature_weight * (Rt.entries * phi.values);
        CHECK(col.cwiseAbs().maxCoeff() < 1e-10);
        // idempotent
        KernelMatrix Rtt = project_orthogonal(Rt, phi, side);
        CHECK((Rtt.entries - Rt.entries).cwiseAbs().maxCoeff() < 1e-12);
    }

    // contraction in operator norm on random instances
    for (unsigned seed : {5u, 6u, 7u}) {
        KernelMatrix A = random_kernel(g, seed);
        KernelMatrix At = project_orthogonal(A, phi, ProjectionSide::qKq);
        CHECK(op_norm(At) <= op_norm(A) * (1 + 1e-8));
    }

    Field unnorm = phi;
    unnorm.values *= 2.0;
    CHECK_THROWS(project_orthogonal(K, unnorm, ProjectionSide::qKq));
}

TEST_CASE("op_norm: identity kernel, rank-one, SVD oracle, convergence report") {
    auto g = make_grid(1, 16, 8.0);
    CHECK(op_norm(delta_kernel(g)) == doctest::Approx(1.0).epsilon(1e-8));

    Field f = random_normalized(g, 8);
    Field h = random_normalized(g, 9);
    KernelMatrix R1 = zero_kernel(g);
    R1.entries = f.values * h.values.adjoint();
    CHECK(op_norm(R1) == doctest::Approx(1.0).epsilon(1e-7)); // |f|_2 |h|_2 = 1

    for (unsigned seed : {10u, 11u, 12u}) {
        KernelMatrix R = random_kernel(g, seed);
        CHECK(op_norm(R) == doctest::Approx(svd_op_norm(R)).epsilon(1e-7));
    }

    auto res = op_norm_result(random_kernel(g, 13), 1e-8, 3);
    CHECK(!res.converged);
    CHECK(res.iterations == 3);
    CHECK(res.residual > 0);
}

TEST_CASE("hs and linf-l2 norms: zero, rank-one, inequality properties") {
    auto g = make_grid(1, 64, 16.0);
    CHECK(hs_norm(zero_kernel(g)) == 0.0);
    CHECK(linf_l2_norm(zero_kernel(g)) == 0.0);

    Field f = make_field(g), h = make_field(g);
    std::mt19937 rng(14);
    std::normal_distribution<double> dist;
    for (int i = 0; i < 64; ++i) {
        f.values[i] = cxd(dist(rng), dist(rng));
        h.values[i] = cxd(dist(rng), dist(rng));
    }
    KernelMatrix R1 = zero_kernel(g);
    R1.entries = f.values * h.values.adjoint();
    auto nf = field_norms(f);
    auto nh = field_norms(h);
    CHECK(hs_norm(R1) == doctest::Approx(nf.l2 * nh.l2).epsilon(1e-12));
    CHECK(linf_l2_norm(R1) == doctest::Approx(nf.linf * nh.l2).epsilon(1e-12));

    for (unsigned seed : {15u, 16u, 17u}) {
        KernelMatrix R = random_kernel(g, seed);
        CHECK(linf_l2_norm(R) <= hs_norm(R) / std::sqrt(g.quadrature_weight) + 1e-12);
        CHECK(op_norm(R) <= hs_norm(R) * (1 + 1e-8));
    }
}

TEST_CASE("kernel derivative norms: constant in x, separable eigenfunction, product-rule oracle") {
    auto g = make_grid(1, 64, 16.0);
    KernelMatrix C = zero_kernel(g);
    for (int j = 0; j < 64; ++j) C.entries.col(j).setConstant(cxd(0.3, 0.1 * j));
    auto dc = kernel_derivative_norms(C);
    CHECK(dc.grad_hs < 1e-10);
    CHECK(dc.lap_hs < 1e-10);

    // e^{i k0 x} g(y): grad_hs = |k0| hs
    const double k0 = g.wavenumbers[5];
    KernelMatrix Sarr = zero_kernel(g);
    std::mt19937 rng(18);
    std::normal_distribution<double> dist;
    for (int j = 0; j < 64; ++j) {
        const cxd gy(dist(rng), dist(rng));
        for (int i = 0; i < 64; ++i)
            Sarr.entries(i, j) = std::exp(cxd(0, k0 * g.coord(i))) * gy;
    }
    auto ds = kernel_derivative_norms(Sarr);
    CHECK(ds.grad_hs == doctest::Approx(std::abs(k0) * hs_norm(Sarr)).epsilon(1e-10));
    CHECK(ds.lap_hs == doctest::Approx(k0 * k0 * hs_norm(Sarr)).epsilon(1e-10));

    // K2 from a Gaussian: compare against the analytic product rule summed directly
    auto g128 = make_grid(1, 128, 32.0);
    Field phi = make_field(g128);
    Field dphi = make_field(g128);
    for (int i = 0; i < 128; ++i) {
        const double x = g128.coord(i);
        phi.values[i] = std::exp(-x * x / 2);
        dphi.values[i] = -x * std::exp(-x * x / 2);
    }
    Field v = make_field(g128);
    Field dv = make_field(g128);
    for (int i = 0; i < 128; ++i) {
        const double x = g128.coord(i);
        if (std::abs(x) < 1.0) {
            v.values[i] = std::pow(1 - x * x, 3);
            dv.values[i] = -6.0 * x * std::pow(1 - x * x, 2);
        }
    }
    KernelMatrix K2 = build_k2(phi, v);
    // d/dx K2(x;y) = v'(x-y) phi(x) phi(y) + v(x-y) phi'(x) phi(y)
    const int n = 128;
    double direct = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int dij = ((i - j + n / 2) % n + n) % n;
            const cxd val = dv.values[dij] * phi.values[i] * phi.values[j] +
                            v.values[dij] * dphi.values[i] * phi.values[j];
            direct += std::norm(val);
        }
    direct = g128.quadrature_weight * std::sqrt(direct);
    auto dk = kernel_derivative_norms(K2);
    CHECK(std::abs(dk.grad_hs - direct) < 1e-8);

    CHECK_THROWS(kernel_derivative_norms(delta_kernel(g)));
}

TEST_CASE("verify_kernel_bounds: zero phi passes, Gaussian/bump passes") {
    auto g = make_grid(1, 512, 128.0);
    Field phi = make_field(g);
    for (int i = 0; i < 512; ++i) {
        const double x = g.coord(i);
        phi.values[i] = std::exp(-x * x / 2);
    }
    phi.values /= field_l2(phi);
    Field v = make_field(g);
    for (int i = 0; i < 512; ++i) {
        const double x = g.coord(i);
        v.values[i] = std::abs(x) < 1.0 ? 0.1 * std::pow(1 - x * x, 3) : 0.0;
    }

    Field zero = make_field(g);
    KernelMatrix Kz = build_k2(zero, v);
    KernelMatrix Kzt = project_orthogonal(Kz, phi, ProjectionSide::qbarKq);
    auto certz = verify_kernel_bounds(Kzt, v, zero);
    CHECK(certz.all_pass);

    for (auto side : {ProjectionSide::qKq, ProjectionSide::qbarKq}) {
        KernelMatrix K = (side == ProjectionSide::qKq) ? build_k1(phi, v) : build_k2(phi, v);
        KernelMatrix Kt = project_orthogonal(K, phi, side);
        auto cert = verify_kernel_bounds(Kt, v, phi);
        CHECK(cert.all_pass);
        CHECK(cert.checks.size() == 5);
        for (const auto& c : cert.checks) CHECK(c.lhs <= c.rhs * (1 + 1e-6));
    }
}
