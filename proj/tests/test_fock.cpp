#include <doctest.h>

#include <cmath>
#include <random>

#include "bogoflow/fock.hpp"

using namespace bogoflow;

namespace {

QuadraticGenerator tuned_generator(int modes, unsigned seed, double h_scale, double k_scale) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist;
    Mat A(modes, modes), B(modes, modes);
    for (int i = 0; i < modes; ++i)
        for (int j = 0; j < modes; ++j) {
            A(i, j) = cxd(dist(rng), dist(rng));
            B(i, j) = cxd(dist(rng), dist(rng));
        }
    return {h_scale * (A + A.adjoint()), k_scale * (B + B.transpose())};
}

} // namespace

TEST_CASE("enumerate_basis: counts, determinism, dimension guard") {
    auto b1 = enumerate_basis(1, 3);
    CHECK(b1.dimension() == 4);

    auto b2 = enumerate_basis(2, 2);
    CHECK(b2.dimension() == 6);
    // graded lexicographic order
    CHECK(b2.states[0] == std::vector<int>{0, 0});
    CHECK(b2.states[1] == std::vector<int>{0, 1});
    CHECK(b2.states[2] == std::vector<int>{1, 0});
    CHECK(b2.states[3] == std::vector<int>{0, 2});
    CHECK(b2.states[4] == std::vector<int>{1, 1});
    CHECK(b2.states[5] == std::vector<int>{2, 0});

    auto b3 = enumerate_basis(3, 10);
    CHECK(b3.dimension() == 286);

    auto again = enumerate_basis(3, 10);
    CHECK(again.states == b3.states);

    CHECK_THROWS(enumerate_basis(5, 10));
    CHECK_THROWS(enumerate_basis(2, 40));
}

TEST_CASE("generator matrix: number operator, pairing element, hermiticity") {
    auto basis = enumerate_basis(2, 6);
    QuadraticGenerator gen{Mat::Zero(2, 2), Mat::Zero(2, 2)};
    gen.h(0, 0) = 1.5;
    gen.h(1, 1) = 0.5;
    SpMat H = build_generator_matrix(gen, basis);
    Mat Hd = Mat(H);
    for (std::size_t i = 0; i < basis.dimension(); ++i) {
        const auto& occ = basis.states[i];
        CHECK(Hd(static_cast<int>(i), static_cast<int>(i)).real() ==
              doctest::Approx(1.5 * occ[0] + 0.5 * occ[1]));
    }
    CHECK((Hd - Hd.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    Mat offdiag = Hd;
    offdiag.diagonal().setZero();
    CHECK(offdiag.cwiseAbs().maxCoeff() < 1e-14);

    // single mode, h = 0, k = kappa: <2| gen |0> = kappa sqrt(2)/2
    auto b1 = enumerate_basis(1, 4);
    const double kappa = 0.7;
    QuadraticGenerator sq{Mat::Zero(1, 1), Mat::Zero(1, 1)};
    sq.k(0, 0) = kappa;
    Mat Hsq = Mat(build_generator_matrix(sq, b1));
    const auto i0 = static_cast<int>(b1.find({0}));
    const auto i2 = static_cast<int>(b1.find({2}));
    CHECK(Hsq(i2, i0).real() == doctest::Approx(kappa * std::sqrt(2.0) / 2.0));
    CHECK((Hsq - Hsq.adjoint()).cwiseAbs().maxCoeff() < 1e-14);

    // hermiticity for a generic generator
    auto gen2 = tuned_generator(2, 99, 0.3, 0.2);
    Mat H2 = Mat(build_generator_matrix(gen2, basis));
    CHECK((H2 - H2.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("evolve_fock: vacuum fixed by pure number generator, perturbative <N>") {
    auto basis = enumerate_basis(2, 8);
    QuadraticGenerator gen{Mat::Zero(2, 2), Mat::Zero(2, 2)};
    gen.h(0, 0) = 1.0;
    gen.h(1, 1) = 2.0;
    auto [st, leak] = evolve_fock(vacuum_state(basis), [&](double) { return gen; }, 1.0, 1e-3);
    CHECK(std::abs(st.amplitudes[0]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(leak.leakage) < 1e-12);

    // h = 0, small constant k: <N> = |k|_F^2 t^2 to 5%
    auto gen2 = tuned_generator(2, 5, 0.0, 0.04);
    gen2.h.setZero();
    const double t = 0.1;
    auto [st2, leak2] = evolve_fock(vacuum_state(basis), [&](double) { return gen2; }, t, 1e-4);
    auto moments = number_moments(st2, 1);
    const double n_mean = moments[0] - 1.0;
    const double predicted = gen2.k.squaredNorm() * t * t;
    CHECK(std::abs(n_mean - predicted) <= 0.05 * predicted);
    CHECK(leak2.accepted);
}

TEST_CASE("two_point_functions and moments: vacuum and single excitations") {
    auto basis = enumerate_basis(2, 4);
    auto vac = vacuum_state(basis);
    auto tp = two_point_functions(vac);
    CHECK(tp.G.cwiseAbs().maxCoeff() == 0.0);
    CHECK(tp.P.cwiseAbs().maxCoeff() == 0.0);
    auto mom = number_moments(vac, 3);
    CHECK(mom[0] == doctest::Approx(1.0));
    CHECK(mom[2] == doctest::Approx(1.0));

    FockState one{basis, Vec::Zero(static_cast<Eigen::Index>(basis.dimension()))};
    one.amplitudes[static_cast<Eigen::Index>(basis.find({1, 0}))] = 1.0;
    auto tp1 = two_point_functions(one);
    CHECK(tp1.G(0, 0).real() == doctest::Approx(1.0));
    CHECK(std::abs(tp1.G(1, 1)) < 1e-14);
    CHECK(tp1.P.cwiseAbs().maxCoeff() < 1e-14);

    FockState two{basis, Vec::Zero(static_cast<Eigen::Index>(basis.dimension()))};
    two.amplitudes[static_cast<Eigen::Index>(basis.find({2, 0}))] = 1.0;
    auto mom2 = number_moments(two, 2);
    CHECK(mom2[1] == doctest::Approx(9.0)); // <(N+1)^2> = 9 for |2>
}

TEST_CASE("evolved vacuum matches the mode symplectic flow") {
    const auto gen = tuned_generator(2, 777, 0.25, 0.06);
    auto gen_of_t = [&](double) { return gen; };
    const double T = 1.5, dt = 5e-4;

    auto mode = mode_symplectic_flow(gen_of_t, T, dt);
    // symplectic relation for the mode flow itself
    Mat rel = mode.gamma.adjoint() * mode.gamma - mode.sigma.adjoint() * mode.sigma - Mat::Identity(2, 2);
    CHECK(rel.cwiseAbs().maxCoeff() < 1e-10);

    auto pred = quasi_free_predictions(mode);
    auto basis = enumerate_basis(2, 16);
    auto [st, leak] = evolve_fock(vacuum_state(basis), gen_of_t, T, dt);
    CHECK(std::abs(leak.leakage) < 1e-9);

    auto tp = two_point_functions(st);
    const double scale = pred.G.cwiseAbs().maxCoeff();
    CHECK((tp.G - pred.G).cwiseAbs().maxCoeff() / scale < 1e-4);
    CHECK((tp.P - pred.P).cwiseAbs().maxCoeff() / pred.P.cwiseAbs().maxCoeff() < 1e-4);

    // <N> = Frobenius^2 of the sigma block
    auto mom = number_moments(st, 1);
    CHECK(std::abs((mom[0] - 1.0) - mode.sigma.squaredNorm()) < 1e-4 * mode.sigma.squaredNorm());
}

TEST_CASE("wick quartic: vacuum trivial, evolved residual small, cutoff-monotone") {
    const auto gen = tuned_generator(2, 777, 0.25, 0.06);
    auto gen_of_t = [&](double) { return gen; };
    const double T = 1.5, dt = 5e-4;
    Eigen::MatrixXd w = Eigen::MatrixXd::Ones(2, 2);

    auto mode = mode_symplectic_flow(gen_of_t, T, dt);
    auto vac_basis = enumerate_basis(2, 8);
    auto wick0 = check_wick_quartic(vacuum_state(vac_basis), w, Mat::Identity(2, 2), Mat::Zero(2, 2));
    CHECK(wick0.lhs == doctest::Approx(0.0));
    CHECK(wick0.rhs == doctest::Approx(0.0));

    double prev = 1e9;
    for (int cutoff : {12, 16, 20}) {
        auto basis = enumerate_basis(2, cutoff);
        auto [st, leak] = evolve_fock(vacuum_state(basis), gen_of_t, T, dt);
        auto wick = check_wick_quartic(st, w, mode.gamma, mode.sigma);
        CHECK(wick.residual < prev);
        prev = wick.residual;
        if (cutoff >= 16) CHECK(wick.residual <= 1e-4);
    }
}

TEST_CASE("moment growth stays under an exponential envelope in |k|_F") {
    const auto gen = tuned_generator(2, 31, 0.25, 0.08);
    auto gen_of_t = [&](double) { return gen; };
    auto basis = enumerate_basis(2, 16);
    const double kF = gen.k.norm();
    for (double t : {0.3, 0.6, 0.9, 1.2}) {
        auto [st, leak] = evolve_fock(vacuum_state(basis), gen_of_t, t, 5e-4);
        auto mom = number_moments(st, 3);
        for (int k = 1; k <= 3; ++k) {
            const double c = std::log(mom[static_cast<std::size_t>(k - 1)]) / (k * kF * t);
            CHECK(c < 6.0);
        }
    }
}

TEST_CASE("galerkin generator produces a valid (h, k) pair") {
    auto g = make_grid(1, 128, 32.0);
    auto v = build_bump_potential(g, 0.2, 1.0);
    Field phi = gaussian_data(g, 1.0);
    auto gen = galerkin_generator(phi, v, 3);
    CHECK((gen.h - gen.h.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((gen.k - gen.k.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    // kinetic diagonal carries the mode energies k_m^2 (plus small mean-field shifts)
    CHECK(gen.h(0, 0).real() < gen.h(1, 1).real() + 1e-12);
    CHECK(gen.k.norm() > 0);
}
