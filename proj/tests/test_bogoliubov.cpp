#include <doctest.h>

#include <cmath>

#include "bogoflow/bogoliubov.hpp"

using namespace bogoflow;

namespace {

struct SmallRig {
    GridSpec grid;
    Potential v;
    Field phi0;
    HartreeTrajectory traj;
};

SmallRig make_rig(int n, double L, double g, double T, double dt) {
    SmallRig rig;
    rig.grid = make_grid(1, n, L);
    rig.v = build_bump_potential(rig.grid, g, 1.0);
    rig.phi0 = gaussian_data(rig.grid, 1.0);
    rig.traj = hartree_evolve(rig.phi0, rig.v, T, dt, 1);
    return rig;
}

} // namespace

TEST_CASE("init_theta: delta gamma, zero sigma, zero defect") {
    auto g = make_grid(1, 32, 16.0);
    auto st = init_theta(g, 0.0);
    CHECK(symplectic_defect(st) < 1e-12);
    CHECK(hs_norm(st.sigma) == 0.0);
    CHECK(linf_l2_norm(st.sigma) == 0.0);

    // gamma acts as the identity
    Vec f(32);
    for (int i = 0; i < 32; ++i) f[i] = cxd(std::sin(0.3 * i), std::cos(0.11 * i));
    Vec out = g.quadrature_weight * (st.gamma.entries * f);
    CHECK((out - f).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("flow_step with zero coefficients: free propagator, sigma stays zero") {
    SmallRig rig = make_rig(64, 32.0, 0.0, 1.0, 5e-3);
    auto st = init_theta(rig.grid, 0.0);
    for (int i = 0; i < 100; ++i)
        st = flow_step(st, i * 5e-3, 5e-3, rig.traj, rig.v);
    CHECK(hs_norm(st.sigma) < 1e-12);
    CHECK(symplectic_defect(st) < 1e-11);
    // gamma equals the exact free kernel
    Mat U0 = free_propagator_coeff(rig.grid, 0.5);
    CHECK((rig.grid.quadrature_weight * st.gamma.entries - U0).cwiseAbs().maxCoeff() < 1e-10);
    // eta vanishes along free flow
    CHECK(hs_norm(eta_of(st)) < 1e-10);
}

TEST_CASE("first-order consistency: |sigma|_HS = dt |K2t(0)|_HS (1 + O(dt))") {
    SmallRig rig = make_rig(64, 32.0, 0.2, 0.05, 1e-3);
    Field phin{rig.grid, rig.phi0.values};
    KernelMatrix K2t =
        project_orthogonal(build_k2(rig.phi0, rig.v.values), phin, ProjectionSide::qbarKq);
    const double k2hs = hs_norm(K2t);

    double prev_err = 1e9;
    for (double dt : {4e-3, 2e-3, 1e-3}) {
        auto st = init_theta(rig.grid, 0.0);
        st = flow_step(st, 0.0, dt, rig.traj, rig.v);
        const double ratio = hs_norm(st.sigma) / (dt * k2hs);
        CHECK(std::abs(ratio - 1.0) < 10 * dt); // O(dt) deviation
        CHECK(std::abs(ratio - 1.0) < prev_err);
        prev_err = std::abs(ratio - 1.0);
    }
}

TEST_CASE("dt-halving: observable error ratio near 4") {
    SmallRig rig = make_rig(64, 32.0, 0.3, 1.0, 5e-4);
    auto run = [&](double dt) {
        auto st = init_theta(rig.grid, 0.0);
        const int nsteps = static_cast<int>(std::llround(1.0 / dt));
        for (int i = 0; i < nsteps; ++i) st = flow_step(st, i * dt, dt, rig.traj, rig.v);
        return hs_norm(st.sigma);
    };
    const double o1 = run(4e-3), o2 = run(2e-3), o3 = run(1e-3);
    const double ratio = std::abs(o1 - o2) / std::abs(o2 - o3);
    CHECK(ratio > 3.6);
    CHECK(ratio < 4.4);
}

TEST_CASE("evolve_theta merged stepping matches repeated flow_step") {
    SmallRig rig = make_rig(32, 16.0, 0.2, 0.5, 5e-3);
    FlowOptions opts;
    opts.sample_every = 20;
    auto res = evolve_theta(0.0, 0.5, 5e-3, rig.traj, rig.v, opts);

    auto st = init_theta(rig.grid, 0.0);
    for (int i = 0; i < 100; ++i) st = flow_step(st, i * 5e-3, 5e-3, rig.traj, rig.v);
    CHECK((res.state.sigma.entries - st.sigma.entries).cwiseAbs().maxCoeff() < 1e-11);
    CHECK((res.state.gamma.entries - st.gamma.entries).cwiseAbs().maxCoeff() < 1e-11);
    CHECK(res.diagnostics.samples.size() == 6); // t = 0, .1, .2, .3, .4, .5
}

TEST_CASE("zero-coefficient evolve_theta: sigma identically zero, M well-defined") {
    SmallRig rig = make_rig(32, 16.0, 0.0, 1.0, 5e-3);
    FlowOptions opts;
    opts.sample_every = 50;
    auto res = evolve_theta(0.0, 1.0, 5e-3, rig.traj, rig.v, opts);
    for (const auto& s : res.diagnostics.samples) {
        CHECK(s.sigma_hs < 1e-12);
        CHECK(s.eta_hs < 1e-10);
        CHECK(s.defect < 1e-11);
        CHECK(s.M_value == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("eta grid stability: final eta_hs moves < 5% when n doubles") {
    auto run_eta = [&](int n) {
        SmallRig rig = make_rig(n, 32.0, 0.3, 2.0, 5e-3);
        FlowOptions opts;
        opts.sample_every = 400;
        auto res = evolve_theta(0.0, 2.0, 5e-3, rig.traj, rig.v, opts);
        return res.diagnostics.samples.back().eta_hs;
    };
    const double e1 = run_eta(64), e2 = run_eta(128);
    CHECK(std::abs(e1 - e2) / e2 < 0.05);
}

TEST_CASE("free_comparison: zero coefficients give zero residual; r(t0) = 0") {
    SmallRig rig = make_rig(32, 16.0, 0.0, 1.0, 5e-3);
    FlowOptions opts;
    opts.sample_every = 100;
    opts.snapshot_times = {0.5};
    auto res = evolve_theta(0.0, 1.0, 5e-3, rig.traj, rig.v, opts);
    REQUIRE(res.snapshots.size() == 1);
    auto series = free_comparison(res.snapshots[0], 1.0, 5e-3, rig.traj, rig.v, 20);
    CHECK(series.front().r_total < 1e-12); // r(t0) = 0 by construction
    for (const auto& p : series) CHECK(p.r_total < 1e-10);
}

TEST_CASE("matrix_ode_oracle: free flow exact, defect small, split-step agreement") {
    SmallRig rigf = make_rig(32, 16.0, 0.0, 0.5, 2e-3);
    auto oracle_free = matrix_ode_oracle(rigf.grid, 0.0, 0.5, rigf.traj, rigf.v, 1e-4);
    Mat U0 = free_propagator_coeff(rigf.grid, 0.5);
    CHECK((rigf.grid.quadrature_weight * oracle_free.gamma.entries - U0).cwiseAbs().maxCoeff() < 1e-10);

    SmallRig rig = make_rig(32, 24.0, 0.3, 0.5, 2e-3);
    auto oracle = matrix_ode_oracle(rig.grid, 0.0, 0.5, rig.traj, rig.v, 1e-4);
    CHECK(symplectic_defect(oracle) <= 1e-8);

    auto st = init_theta(rig.grid, 0.0);
    for (int i = 0; i < 250; ++i) st = flow_step(st, i * 2e-3, 2e-3, rig.traj, rig.v);
    const double num = hs_norm(KernelMatrix{rig.grid, st.gamma.entries - oracle.gamma.entries, false}) +
                       hs_norm(KernelMatrix{rig.grid, st.sigma.entries - oracle.sigma.entries, false});
    const double den = hs_norm(oracle.gamma) + hs_norm(oracle.sigma);
    CHECK(num / den <= 1e-5);

    CHECK_THROWS(matrix_ode_oracle(make_grid(1, 128, 16.0), 0, 1, rig.traj, rig.v, 1e-4));
}

TEST_CASE("symplectic defect stays small over a moderate run") {
    SmallRig rig = make_rig(64, 32.0, 0.2, 4.0, 2e-3);
    FlowOptions opts;
    opts.sample_every = 250;
    auto res = evolve_theta(0.0, 4.0, 2e-3, rig.traj, rig.v, opts);
    for (const auto& s : res.diagnostics.samples) CHECK(s.defect <= 1e-6);
}
