#include "bogoflow/fock.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bogoflow/kernels.hpp"

namespace bogoflow {

namespace {
std::uint64_t encode(const std::vector<int>& occ, int base) {
    std::uint64_t key = 0;
    for (int v : occ) key = key * static_cast<std::uint64_t>(base) + static_cast<std::uint64_t>(v);
    return key;
}

double binomial(int n, int k) {
    double r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}
} // namespace

std::uint64_t FockBasis::key(const std::vector<int>& occ) const { return encode(occ, n_max + 1); }

std::ptrdiff_t FockBasis::find(const std::vector<int>& occ) const {
    int total = 0;
    for (int v : occ) {
        if (v < 0) return -1;
        total += v;
    }
    if (total > n_max) return -1;
    auto it = index.find(key(occ));
    return it == index.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

FockBasis enumerate_basis(int modes, int n_max) {
    if (modes < 1 || modes > 4) throw std::invalid_argument("enumerate_basis: modes must be in [1,4]");
    if (n_max < 1 || n_max > 20) throw std::invalid_argument("enumerate_basis: n_max must be in [1,20]");
    const double D = binomial(n_max + modes, modes);
    if (D > 200000.0) throw std::invalid_argument("enumerate_basis: dimension exceeds 200000");

    FockBasis basis;
    basis.modes = modes;
    basis.n_max = n_max;
    std::vector<int> occ(modes, 0);
    std::function<void(int, int)> rec = [&](int slot, int remaining) {
        if (slot == modes - 1) {
            occ[slot] = remaining;
            basis.states.push_back(occ);
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            occ[slot] = v;
            rec(slot + 1, remaining - v);
        }
    };
    for (int total = 0; total <= n_max; ++total) rec(0, total);
    basis.index.reserve(basis.states.size());
    for (std::size_t i = 0; i < basis.states.size(); ++i)
        basis.index.emplace(basis.key(basis.states[i]), i);
    return basis;
}

FockState vacuum_state(const FockBasis& basis) {
    FockState st{basis, Vec::Zero(static_cast<Eigen::Index>(basis.dimension()))};
    st.amplitudes[0] = 1.0;
    return st;
}

QuadraticGenerator validate_generator(const QuadraticGenerator& gen) {
    if (gen.h.rows() != gen.h.cols() || gen.k.rows() != gen.k.cols() || gen.h.rows() != gen.k.rows())
        throw std::invalid_argument("generator: h and k must be square of equal size");
    if ((gen.h - gen.h.adjoint()).norm() > 1e-12 * std::max(1.0, gen.h.norm()))
        throw std::invalid_argument("generator: h must be self-adjoint");
    if ((gen.k - gen.k.transpose()).norm() > 1e-12 * std::max(1.0, gen.k.norm()))
        throw std::invalid_argument("generator: k must be symmetric");
    return gen;
}

SpMat build_generator_matrix(const QuadraticGenerator& gen, const FockBasis& basis) {
    const int M = basis.modes;
    if (gen.h.rows() != M) throw std::invalid_argument("build_generator_matrix: mode count mismatch");
    const std::size_t D = basis.dimension();
    std::vector<Eigen::Triplet<cxd>> trip;
    trip.reserve(D * static_cast<std::size_t>(3 * M * M));

    std::vector<int> nb;
    for (std::size_t col = 0; col < D; ++col) {
        const auto& b = basis.states[col];
        for (int i = 0; i < M; ++i) {
            for (int j = 0; j < M; ++j) {
                // h_ij a*_i a_j
                if (b[j] >= 1) {
                    nb = b;
                    double amp = std::sqrt(static_cast<double>(nb[j]));
                    nb[j] -= 1;
                    nb[i] += 1;
                    amp *= std::sqrt(static_cast<double>(nb[i]));
                    const auto row = basis.find(nb);
                    if (row >= 0 && gen.h(i, j) != cxd(0, 0))
                        trip.emplace_back(static_cast<int>(row), static_cast<int>(col), gen.h(i, j) * amp);
                }
                if (gen.k(i, j) != cxd(0, 0)) {
                    // (1/2) k_ij a*_i a*_j
                    nb = b;
                    double amp = 1.0;
                    nb[j] += 1; amp *= std::sqrt(static_cast<double>(nb[j]));
                    nb[i] += 1; amp *= std::sqrt(static_cast<double>(nb[i]));
                    auto row = basis.find(nb); // outside the cutoff: dropped (leakage channel)
                    if (row >= 0)
                        trip.emplace_back(static_cast<int>(row), static_cast<int>(col), 0.5 * gen.k(i, j) * amp);
                    // (1/2) conj(k_ij) a_i a_j
                    nb = b;
                    if (nb[j] >= 1) {
                        double amp2 = std::sqrt(static_cast<double>(nb[j]));
                        nb[j] -= 1;
                        if (nb[i] >= 1) {
                            amp2 *= std::sqrt(static_cast<double>(nb[i]));
                            nb[i] -= 1;
                            row = basis.find(nb);
                            if (row >= 0)
                                trip.emplace_back(static_cast<int>(row), static_cast<int>(col),
                                                  0.5 * std::conj(gen.k(i, j)) * amp2);
                        }
                    }
                }
            }
        }
    }
    SpMat H(static_cast<int>(D), static_cast<int>(D));
    H.setFromTriplets(trip.begin(), trip.end());
    return H;
}

std::pair<FockState, LeakageReport> evolve_fock(const FockState& initial,
                                                const std::function<QuadraticGenerator(double)>& gen_of_t,
                                                double T, double dt) {
    if (!(T > 0) || !(dt > 0)) throw std::invalid_argument("evolve_fock: T and dt must be positive");
    const int nsteps = static_cast<int>(std::llround(T / dt));
    FockState st = initial;
    const double norm0 = st.amplitudes.norm();

    // Rebuild the sparse generator only when the (h, k) pair changes.
    SpMat H = build_generator_matrix(validate_generator(gen_of_t(0.0)), st.basis);
    Mat last_h = gen_of_t(0.0).h, last_k = gen_of_t(0.0).k;
    auto gen_at = [&](double t) -> const SpMat& {
        QuadraticGenerator gnow = gen_of_t(t);
        if ((gnow.h - last_h).norm() > 0 || (gnow.k - last_k).norm() > 0) {
            H = build_generator_matrix(validate_generator(gnow), st.basis);
            last_h = gnow.h;
            last_k = gnow.k;
        }
        return H;
    };

    Vec k1, k2, k3, k4;
    for (int i = 0; i < nsteps; ++i) {
        const double t = i * dt;
        const cxd mi(0, -1);
        k1 = mi * (gen_at(t) * st.amplitudes);
        k2 = mi * (gen_at(t + 0.5 * dt) * (st.amplitudes + 0.5 * dt * k1));
        k3 = mi * (gen_at(t + 0.5 * dt) * (st.amplitudes + 0.5 * dt * k2));
        k4 = mi * (gen_at(t + dt) * (st.amplitudes + dt * k3));
        st.amplitudes += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }

    LeakageReport rep;
    const double normT = st.amplitudes.norm();
    rep.leakage = 1.0 - normT * normT;
    rep.drift_per_unit_time = std::abs(normT - norm0) / T;
    rep.accepted = rep.drift_per_unit_time <= 1e-9 && std::abs(rep.leakage) <= 1e-6;
    return {st, rep};
}

Vec annihilate(const FockState& state, int mode) {
    const auto& basis = state.basis;
    Vec out = Vec::Zero(state.amplitudes.size());
    std::vector<int> nb;
    for (std::size_t i = 0; i < basis.dimension(); ++i) {
        const auto& b = basis.states[i];
        if (b[mode] >= 1) {
            nb = b;
            const double amp = std::sqrt(static_cast<double>(nb[mode]));
            nb[mode] -= 1;
            const auto j = basis.find(nb);
            out[static_cast<Eigen::Index>(j)] += amp * state.amplitudes[static_cast<Eigen::Index>(i)];
        }
    }
    return out;
}

TwoPointFunctions two_point_functions(const FockState& state) {
    const int M = state.basis.modes;
    TwoPointFunctions tp{Mat::Zero(M, M), Mat::Zero(M, M)};
    std::vector<Vec> a(M);
    for (int i = 0; i < M; ++i) a[i] = annihilate(state, i);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) {
            tp.G(i, j) = a[j].dot(a[i]); // <a*_j a_i>
            FockState tmp{state.basis, a[j]};
            tp.P(i, j) = state.amplitudes.dot(annihilate(tmp, i)); // <a_i a_j>
        }
    return tp;
}

std::vector<double> number_moments(const FockState& state, int kmax) {
    std::vector<double> out;
    for (int k = 1; k <= kmax; ++k) {
        double s = 0;
        for (std::size_t i = 0; i < state.basis.dimension(); ++i) {
            int total = 0;
            for (int v : state.basis.states[i]) total += v;
            s += std::pow(total + 1.0, k) * std::norm(state.amplitudes[static_cast<Eigen::Index>(i)]);
        }
        out.push_back(s);
    }
    return out;
}

WickCheck check_wick_quartic(const FockState& state, const Eigen::MatrixXd& weights,
                             const Mat& gamma_block, const Mat& sigma_block) {
    const int M = state.basis.modes;
    if (weights.rows() != M || weights.cols() != M)
        throw std::invalid_argument("check_wick_quartic: weights must be M x M");
    if ((weights.array() < 0).any())
        throw std::invalid_argument("check_wick_quartic: weights must be nonnegative");

    WickCheck out;
    std::vector<Vec> a(M);
    for (int i = 0; i < M; ++i) a[i] = annihilate(state, i);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) {
            FockState tmp{state.basis, a[i]};
            out.lhs += weights(i, j) * annihilate(tmp, j).squaredNorm(); // <a*_j a*_i a_j a_i>
        }

    const Mat ss = sigma_block * sigma_block.adjoint();
    const Mat gs = gamma_block * sigma_block.adjoint();
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j)
            out.rhs += weights(i, j) *
                       (std::norm(ss(i, j)) + ss(i, i).real() * ss(j, j).real() + std::norm(gs(i, j)));
    out.residual = std::abs(out.lhs - out.rhs) / (std::abs(out.lhs) + 1e-15);
    return out;
}

ModeFlowResult mode_symplectic_flow(const std::function<QuadraticGenerator(double)>& gen_of_t,
                                    double T, double dt) {
    QuadraticGenerator g0 = validate_generator(gen_of_t(0.0));
    const int M = static_cast<int>(g0.h.rows());
    Mat G = Mat::Identity(M, M), S = Mat::Zero(M, M);
    const int nsteps = static_cast<int>(std::llround(T / dt));
    auto rhs = [&](const Mat& Gx, const Mat& Sx, double t, Mat& og, Mat& os) {
        QuadraticGenerator gen = gen_of_t(t);
        og = cxd(0, -1) * (gen.h * Gx + gen.k * Sx);
        os = cxd(0, -1) * (-gen.k.conjugate() * Gx - gen.h.conjugate() * Sx);
    };
    Mat k1g(M, M), k1s(M, M), k2g(M, M), k2s(M, M), k3g(M, M), k3s(M, M), k4g(M, M), k4s(M, M);
    for (int i = 0; i < nsteps; ++i) {
        const double t = i * dt;
        rhs(G, S, t, k1g, k1s);
        rhs(G + 0.5 * dt * k1g, S + 0.5 * dt * k1s, t + 0.5 * dt, k2g, k2s);
        rhs(G + 0.5 * dt * k2g, S + 0.5 * dt * k2s, t + 0.5 * dt, k3g, k3s);
        rhs(G + dt * k3g, S + dt * k3s, t + dt, k4g, k4s);
        G += dt / 6.0 * (k1g + 2 * k2g + 2 * k3g + k4g);
        S += dt / 6.0 * (k1s + 2 * k2s + 2 * k3s + k4s);
    }
    return {G, S};
}

TwoPointFunctions quasi_free_predictions(const ModeFlowResult& flow) {
    TwoPointFunctions tp;
    tp.G = (flow.sigma * flow.sigma.adjoint()).transpose();
    tp.P = flow.gamma * flow.sigma.adjoint();
    return tp;
}

QuadraticGenerator galerkin_generator(const Field& phi, const Potential& v, int modes) {
    const GridSpec& g = phi.grid;
    if (g.dimension != 1) throw std::invalid_argument("galerkin_generator: d = 1 only");
    const int n = g.points_per_axis;
    const double w = g.quadrature_weight;

    // M lowest-|k| plane waves, ties broken toward positive k.
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double ka = std::abs(g.wavenumbers[a]), kb = std::abs(g.wavenumbers[b]);
        if (ka != kb) return ka < kb;
        return g.wavenumbers[a] > g.wavenumbers[b];
    });
    std::vector<Vec> e(modes);
    for (int m = 0; m < modes; ++m) {
        Vec em(n);
        const double k = g.wavenumbers[order[static_cast<std::size_t>(m)]];
        for (int i = 0; i < n; ++i)
            em[i] = std::exp(cxd(0, k * g.coord(i))) / std::sqrt(g.box_length);
        e[m] = em;
    }

    Field phin{g, phi.values / std::sqrt(w * phi.values.squaredNorm())};
    KernelMatrix K1t = project_orthogonal(build_k1(phi, v.values), phin, ProjectionSide::qKq);
    KernelMatrix K2t = project_orthogonal(build_k2(phi, v.values), phin, ProjectionSide::qbarKq);
    Field rho = make_field(g);
    rho.values = phi.values.array().abs2().cast<cxd>();
    Field V = convolve(v.values, rho);

    QuadraticGenerator gen{Mat(modes, modes), Mat(modes, modes)};
    for (int a = 0; a < modes; ++a) {
        for (int b = 0; b < modes; ++b) {
            const double kb = g.wavenumbers[order[static_cast<std::size_t>(b)]];
            // <e_a, (-Lap + V + K1t) e_b>
            cxd hab = (a == b) ? cxd(kb * kb, 0) : cxd(0, 0);
            cxd vab(0, 0);
            for (int i = 0; i < n; ++i)
                vab += std::conj(e[a][i]) * V.values[i].real() * e[b][i];
            vab *= w;
            const cxd k1ab = w * w * (e[a].adjoint() * K1t.entries * e[b])(0, 0);
            gen.h(a, b) = hab + vab + k1ab;
            // k_ab = int int conj(e_a)(x) conj(e_b)(y) K2t(x;y) dx dy
            gen.k(a, b) = w * w * (e[a].conjugate().transpose() * K2t.entries * e[b].conjugate())(0, 0);
        }
    }
    // clean tiny asymmetry from quadrature rounding
    gen.h = 0.5 * (gen.h + gen.h.adjoint()).eval();
    gen.k = 0.5 * (gen.k + gen.k.transpose()).eval();
    return gen;
}

} // namespace bogoflow
