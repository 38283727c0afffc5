#include "bogoflow/bogoliubov.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <random>
#include <stdexcept>

#include "bogoflow/fft_engine.hpp"

namespace bogoflow {

namespace {

// The flow works on coefficient matrices C = w * kernel, where operator
// composition is the plain matrix product and HS norms are Frobenius norms.

Mat to_coeff(const KernelMatrix& K) { return K.grid.quadrature_weight * K.entries; }

KernelMatrix from_coeff(const GridSpec& g, const Mat& C, bool has_delta) {
    return {g, C / g.quadrature_weight, has_delta};
}

double op2norm(const Mat& M, int iters = 120, double tol = 1e-9, unsigned seed = 7u) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist;
    Vec x(M.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = cxd(dist(rng), dist(rng));
    x.normalize();
    double lam = 0;
    for (int it = 0; it < iters; ++it) {
        Vec y = M * x;
        const double lam_new = y.norm();
        Vec z = M.adjoint() * y;
        const double nz = z.norm();
        if (nz == 0) return 0.0;
        x = z / nz;
        if (std::abs(lam_new - lam) <= tol * std::max(lam_new, 1e-300)) return lam_new;
        lam = lam_new;
    }
    return lam;
}

// 2-norm of an implicitly given operator, by power iteration on A^H A.
template <class MatVec, class AdjMatVec>
double op2norm_implicit(Eigen::Index n, MatVec&& av, AdjMatVec&& ahv, int iters = 50,
                        double tol = 1e-4, unsigned seed = 11u) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist;
    Vec x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = cxd(dist(rng), dist(rng));
    x.normalize();
    double lam = 0;
    for (int it = 0; it < iters; ++it) {
        Vec y = av(x);
        const double lam_new = y.norm();
        Vec z = ahv(y);
        const double nz = z.norm();
        if (nz == 0) return 0.0;
        x = z / nz;
        if (std::abs(lam_new - lam) <= tol * std::max(lam_new, 1e-300)) return lam_new;
        lam = lam_new;
    }
    return lam;
}

double defect_of(const Mat& G, const Mat& S) {
    const Eigen::Index n = G.rows();
    // D1 = G^H G - S^H S - I (self-adjoint), D2 = G^H conj(S) - S^H conj(G), D3 = D2^H.
    auto d1 = [&](const Vec& v) -> Vec {
        return G.adjoint() * (G * v) - S.adjoint() * (S * v) - v;
    };
    auto d2 = [&](const Vec& v) -> Vec {
        return G.adjoint() * (S * v.conjugate()).conjugate() -
               S.adjoint() * (G * v.conjugate()).conjugate();
    };
    auto d3 = [&](const Vec& v) -> Vec {
        return S.transpose() * (G * v) - G.transpose() * (S * v);
    };
    const double n1 = op2norm_implicit(n, d1, d1);
    const double n2 = op2norm_implicit(n, d2, d3); // ||D2|| = ||D3||
    return std::max(n1, n2);
}

class ThetaStepper {
public:
    ThetaStepper(const GridSpec& grid, const Potential& v, double dt)
        : grid_(grid), n_(grid.points_per_axis), w_(grid.quadrature_weight), dt_(dt) {
        if (grid.dimension != 1)
            throw std::invalid_argument("bogoliubov flow: d = 1 only");
        conv_sym_ = detail::convolution_symbol(grid, v.values.values);
        conv_sym_scaled_ = conv_sym_ / static_cast<double>(n_);
        kick_half_g_.resize(n_); kick_half_s_.resize(n_);
        kick_full_g_.resize(n_); kick_full_s_.resize(n_);
        const double inv_n = 1.0 / n_;
        for (int i = 0; i < n_; ++i) {
            const double k2 = grid.wavenumbers[i] * grid.wavenumbers[i];
            kick_half_g_[i] = std::exp(cxd(0, -0.5 * dt * k2)) * inv_n;
            kick_half_s_[i] = std::exp(cxd(0, +0.5 * dt * k2)) * inv_n;
            kick_full_g_[i] = std::exp(cxd(0, -dt * k2)) * inv_n;
            kick_full_s_[i] = std::exp(cxd(0, +dt * k2)) * inv_n;
        }
        G_ = Mat::Identity(n_, n_);
        S_ = Mat::Zero(n_, n_);
        B1_.resize(n_, n_); B2_.resize(n_, n_);
        Gh_.resize(n_, n_); Sh_.resize(n_, n_);
        T1_.resize(n_, n_); T2_.resize(n_, n_);
    }

    Mat& G() { return G_; }
    Mat& S() { return S_; }
    const Mat& G() const { return G_; }
    const Mat& S() const { return S_; }

    void half_kick() { kick(kick_half_g_, kick_half_s_); }
    void full_kick() { kick(kick_full_g_, kick_full_s_); }

    void set_phi_mid(const Vec& phim) {
        phim_ = phim;
        phin_ = phim / std::sqrt(w_ * phim.squaredNorm());
        Vec rho = phim.array().abs2().cast<cxd>();
        conv_vec_inplace(rho);
        Vc_ = rho.real().cast<cxd>(); // the mean-field multiplier is exactly real
        Vec t = phim_.conjugate().array() * phin_.array();
        conv_vec_inplace(t);
        pv1_ = phim_.array() * t.array();
        t = phim_.array() * phin_.array();
        conv_vec_inplace(t);
        pv2_ = phim_.array() * t.array();
        alpha1_ = (w_ * phin_.dot(pv1_)).real(); // phin^H pv1, real for even real v
        alpha2_ = w_ * phin_.conjugate().dot(pv2_); // phin^T pv2
    }

    /// One full bounded substep (explicit midpoint, coefficients already frozen).
    void bounded_step() {
        apply_B(G_, S_, B1_, B2_);
        Gh_ = G_ - cxd(0, 0.5 * dt_) * B1_;
        Sh_ = S_ - cxd(0, 0.5 * dt_) * B2_;
        apply_B(Gh_, Sh_, B1_, B2_);
        G_ -= cxd(0, dt_) * B1_;
        S_ -= cxd(0, dt_) * B2_;
    }

private:
    void kick(const Vec& kg, const Vec& ks) {
        detail::fft_columns(n_, n_, G_.data(), -1);
        G_.array().colwise() *= kg.array();
        detail::fft_columns(n_, n_, G_.data(), +1);
        detail::fft_columns(n_, n_, S_.data(), -1);
        S_.array().colwise() *= ks.array();
        detail::fft_columns(n_, n_, S_.data(), +1);
    }

    void conv_vec_inplace(Vec& f) const {
        detail::fft_nd(1, n_, f.data(), -1);
        f.array() *= conv_sym_scaled_.array();
        detail::fft_nd(1, n_, f.data(), +1);
    }

    void conv_cols_inplace(Mat& A) const {
        detail::fft_columns(n_, n_, A.data(), -1);
        A.array().colwise() *= conv_sym_scaled_.array();
        detail::fft_columns(n_, n_, A.data(), +1);
    }

    // (O1, O2) = bounded generator applied to (X, Y):
    //   O1 =  V X + Kt1 X + Kt2 Y
    //   O2 = -conj(Kt2) X - V Y - conj(Kt1) Y
    void apply_B(const Mat& X, const Mat& Y, Mat& O1, Mat& O2) {
        T1_ = X.array().colwise() * phim_.conjugate().array();
        conv_cols_inplace(T1_); // C(conj(phi) . X)
        T2_ = Y.array().colwise() * phim_.array();
        conv_cols_inplace(T2_); // C(phi . Y)

        Eigen::Matrix<cxd, 4, Eigen::Dynamic> R1(4, n_), R2(4, n_);
        R1.row(0) = phin_.adjoint() * X;  // r1
        R1.row(1) = phin_.adjoint() * Y;  // r2
        R1.row(2) = pv1_.adjoint() * X;   // s1
        R1.row(3) = pv2_.transpose() * Y; // s2
        R2.row(0) = phin_.transpose() * X; // r3
        R2.row(1) = phin_.transpose() * Y; // r4
        R2.row(2) = pv2_.adjoint() * X;    // s3
        R2.row(3) = pv1_.transpose() * Y;  // s4

        Eigen::Matrix<cxd, Eigen::Dynamic, 4> U1(n_, 4), U2(n_, 4);
        const double w2 = w_ * w_;
        U1.col(0) = -w_ * pv1_ + w2 * alpha1_ * phin_;
        U1.col(1) = -w_ * pv2_ + w2 * alpha2_ * phin_.conjugate();
        U1.col(2) = -w_ * phin_;
        U1.col(3) = -w_ * phin_.conjugate();
        U2.col(0) = w_ * pv2_.conjugate() - w2 * std::conj(alpha2_) * phin_;
        U2.col(1) = w_ * pv1_.conjugate() - w2 * alpha1_ * phin_.conjugate();
        U2.col(2) = w_ * phin_;
        U2.col(3) = w_ * phin_.conjugate();

        O1.array() = X.array().colwise() * Vc_.array();
        O1.array() += T1_.array().colwise() * phim_.array();
        O1.array() += T2_.array().colwise() * phim_.array();
        O1.noalias() += U1 * R1;

        O2.array() = -(Y.array().colwise() * Vc_.array());
        O2.array() -= T1_.array().colwise() * phim_.conjugate().array();
        O2.array() -= T2_.array().colwise() * phim_.conjugate().array();
        O2.noalias() += U2 * R2;
    }

    GridSpec grid_;
    int n_;
    double w_, dt_;
    Vec conv_sym_, conv_sym_scaled_;
    Vec kick_half_g_, kick_half_s_, kick_full_g_, kick_full_s_;
    Vec phim_, phin_, pv1_, pv2_, Vc_;
    double alpha1_ = 0;
    cxd alpha2_{0, 0};
    Mat G_, S_, B1_, B2_, Gh_, Sh_, T1_, T2_;
};

struct SigmaNorms {
    double hs = 0, linf_l2 = 0, grad_hs = 0, lap_hs = 0;
};

SigmaNorms sigma_norms(const GridSpec& g, const Mat& S) {
    SigmaNorms out;
    out.hs = S.norm();
    double best = 0;
    for (Eigen::Index i = 0; i < S.rows(); ++i)
        best = std::max(best, S.row(i).squaredNorm());
    out.linf_l2 = std::sqrt(best / g.quadrature_weight);
    Mat hat = S;
    const int n = g.points_per_axis;
    detail::fft_columns(n, n, hat.data(), -1);
    double sg = 0, sl = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double k2 = g.wavenumbers[static_cast<std::size_t>(i)] * g.wavenumbers[static_cast<std::size_t>(i)];
        const double row2 = hat.row(i).squaredNorm() / n;
        sg += k2 * row2;
        sl += k2 * k2 * row2;
    }
    out.grad_hs = std::sqrt(sg);
    out.lap_hs = std::sqrt(sl);
    return out;
}

} // namespace

Mat free_propagator_coeff(const GridSpec& grid, double tau) {
    const int n = grid.points_per_axis;
    Vec c(n);
    for (int i = 0; i < n; ++i)
        c[i] = std::exp(cxd(0, -tau * grid.wavenumbers[i] * grid.wavenumbers[i]));
    detail::fft_nd(1, n, c.data(), +1);
    c /= static_cast<double>(n);
    Mat U(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            U(i, j) = c[((i - j) % n + n) % n];
    return U;
}

BogoliubovState init_theta(const GridSpec& grid, double s) {
    if (grid.dimension != 1) throw std::invalid_argument("init_theta: d = 1 only");
    BogoliubovState st;
    st.gamma = delta_kernel(grid);
    st.sigma = zero_kernel(grid);
    st.s_anchor = s;
    st.t_current = s;
    return st;
}

double symplectic_defect(const BogoliubovState& state) {
    return defect_of(to_coeff(state.gamma), to_coeff(state.sigma));
}

BogoliubovState flow_step(const BogoliubovState& state, double t, double dt,
                          const HartreeTrajectory& traj, const Potential& v) {
    if (!(dt > 0) || dt > 1e-2 + 1e-15)
        throw std::invalid_argument("flow_step: dt must be in (0, 1e-2]");
    ThetaStepper stepper(state.gamma.grid, v, dt);
    stepper.G() = to_coeff(state.gamma);
    stepper.S() = to_coeff(state.sigma);
    stepper.set_phi_mid(traj.interpolate(t + 0.5 * dt));
    stepper.half_kick();
    stepper.bounded_step();
    stepper.half_kick();
    BogoliubovState out;
    out.gamma = from_coeff(state.gamma.grid, stepper.G(), true);
    out.sigma = from_coeff(state.gamma.grid, stepper.S(), false);
    out.s_anchor = state.s_anchor;
    out.t_current = t + dt;
    return out;
}

void FlowDiagnostics::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "t,sigma_hs,sigma_linf_l2,sigma_grad_hs,sigma_lap_hs,eta_hs,gamma_op,defect,M_value\n";
    out.precision(15);
    for (const auto& s : samples)
        out << s.t << ',' << s.sigma_hs << ',' << s.sigma_linf_l2 << ',' << s.sigma_grad_hs << ','
            << s.sigma_lap_hs << ',' << s.eta_hs << ',' << s.gamma_op << ',' << s.defect << ','
            << s.M_value << '\n';
}

FlowResult evolve_theta(double s, double T, double dt, const HartreeTrajectory& traj,
                        const Potential& v, const FlowOptions& opts) {
    if (!(T > s)) throw std::invalid_argument("evolve_theta: T must exceed s");
    const GridSpec& g = traj.grid;
    if (g.points_per_axis > 2048) throw std::invalid_argument("evolve_theta: n <= 2048");

    ThetaStepper stepper(g, v, dt);
    const int nsteps = static_cast<int>(std::llround((T - s) / dt));

    FlowResult res;
    res.diagnostics.samples.reserve(static_cast<std::size_t>(nsteps / opts.sample_every + 2));
    std::deque<std::pair<double, double>> window; // (t, sigma_hs+grad+lap+eta+1)
    int sample_count = 0;
    double last_defect = 0.0;

    auto sample = [&](double t) {
        FlowSample fs;
        fs.t = t;
        auto sn = sigma_norms(g, stepper.S());
        fs.sigma_hs = sn.hs;
        fs.sigma_linf_l2 = sn.linf_l2;
        fs.sigma_grad_hs = sn.grad_hs;
        fs.sigma_lap_hs = sn.lap_hs;
        fs.eta_hs = (stepper.G() - free_propagator_coeff(g, t - s)).norm();
        fs.gamma_op = op2norm(stepper.G());
        if (sample_count % opts.defect_every_samples == 0)
            last_defect = defect_of(stepper.G(), stepper.S());
        fs.defect = last_defect;
        const double base = fs.sigma_hs + fs.sigma_grad_hs + fs.sigma_lap_hs + fs.eta_hs + 1.0;
        window.emplace_back(t, base);
        const double t0 = std::max(s, t - 1.0);
        while (!window.empty() && window.front().first < t0 - 1e-12) window.pop_front();
        double m = 0;
        for (const auto& [tt, b] : window) m = std::max(m, b);
        fs.M_value = m;
        if (fs.sigma_hs > 1e6 || fs.gamma_op > 1e6)
            throw std::runtime_error("evolve_theta: instability detected at t=" + std::to_string(t));
        res.diagnostics.samples.push_back(fs);
        ++sample_count;
    };

    sample(s);
    auto maybe_snapshot = [&](double t) {
        for (double ts : opts.snapshot_times) {
            if (std::abs(t - ts) < 0.25 * dt) {
                BogoliubovState snap;
                snap.gamma = from_coeff(g, stepper.G(), true);
                snap.sigma = from_coeff(g, stepper.S(), false);
                snap.s_anchor = s;
                snap.t_current = t;
                res.snapshots.push_back(std::move(snap));
            }
        }
    };

    // merged Strang: half kick, then [bounded, full kick]*, closing half kicks at samples
    stepper.half_kick();
    for (int i = 0; i < nsteps; ++i) {
        const double t = s + i * dt;
        stepper.set_phi_mid(traj.interpolate(t + 0.5 * dt));
        stepper.bounded_step();
        const double tn = s + (i + 1) * dt;
        const bool at_sample = ((i + 1) % opts.sample_every == 0) || (i + 1 == nsteps);
        bool want_snap = false;
        for (double ts : opts.snapshot_times)
            if (std::abs(tn - ts) < 0.25 * dt) want_snap = true;
        if (at_sample || want_snap) {
            stepper.half_kick();
            if (at_sample) sample(tn);
            maybe_snapshot(tn);
            if (i + 1 < nsteps) stepper.half_kick();
        } else if (i + 1 < nsteps) {
            stepper.full_kick();
        } else {
            stepper.half_kick();
        }
    }

    res.state.gamma = from_coeff(g, stepper.G(), true);
    res.state.sigma = from_coeff(g, stepper.S(), false);
    res.state.s_anchor = s;
    res.state.t_current = T;
    return res;
}

KernelMatrix eta_of(const BogoliubovState& state) {
    const GridSpec& g = state.gamma.grid;
    Mat E = to_coeff(state.gamma) - free_propagator_coeff(g, state.t_current - state.s_anchor);
    return from_coeff(g, E, false);
}

std::vector<FreeComparisonPoint> free_comparison(const BogoliubovState& state_at_t0, double T,
                                                 double dt, const HartreeTrajectory& traj,
                                                 const Potential& v, int sample_every) {
    const GridSpec& g = state_at_t0.gamma.grid;
    const double t0 = state_at_t0.t_current;
    if (t0 < state_at_t0.s_anchor) throw std::invalid_argument("free_comparison: t0 >= s required");
    const int n = g.points_per_axis;

    ThetaStepper stepper(g, v, dt);
    stepper.G() = to_coeff(state_at_t0.gamma);
    stepper.S() = to_coeff(state_at_t0.sigma);
    const Mat G0 = stepper.G(), S0 = stepper.S();
    const int nsteps = static_cast<int>(std::llround((T - t0) / dt));

    std::vector<FreeComparisonPoint> series;
    auto record = [&](double t) {
        const double tau = t - t0;
        Vec pg(n), ps(n);
        for (int i = 0; i < n; ++i) {
            const double k2 = g.wavenumbers[i] * g.wavenumbers[i];
            pg[i] = std::exp(cxd(0, -tau * k2));
            ps[i] = std::exp(cxd(0, +tau * k2));
        }
        Mat Gf = G0, Sf = S0;
        detail::fft_columns(n, n, Gf.data(), -1);
        Gf.array().colwise() *= (pg / double(n)).array();
        detail::fft_columns(n, n, Gf.data(), +1);
        detail::fft_columns(n, n, Sf.data(), -1);
        Sf.array().colwise() *= (ps / double(n)).array();
        detail::fft_columns(n, n, Sf.data(), +1);
        FreeComparisonPoint p;
        p.t = t;
        p.r_sigma_hs = (stepper.S() - Sf).norm();
        p.r_gamma_op = op2norm(stepper.G() - Gf);
        p.r_total = p.r_sigma_hs + p.r_gamma_op;
        series.push_back(p);
    };

    record(t0);
    stepper.half_kick();
    for (int i = 0; i < nsteps; ++i) {
        const double t = t0 + i * dt;
        stepper.set_phi_mid(traj.interpolate(t + 0.5 * dt));
        stepper.bounded_step();
        const bool at_sample = ((i + 1) % sample_every == 0) || (i + 1 == nsteps);
        if (at_sample) {
            stepper.half_kick();
            record(t0 + (i + 1) * dt);
            if (i + 1 < nsteps) stepper.half_kick();
        } else if (i + 1 < nsteps) {
            stepper.full_kick();
        } else {
            stepper.half_kick();
        }
    }
    return series;
}

BogoliubovState matrix_ode_oracle(const GridSpec& grid, double s, double T,
                                  const HartreeTrajectory& traj, const Potential& v,
                                  double dt_ref) {
    if (grid.points_per_axis > 64)
        throw std::invalid_argument("matrix_ode_oracle: n <= 64");
    const int n = grid.points_per_axis;
    const double w = grid.quadrature_weight;

    // Dense Laplacian from the plain DFT sum (independent of the FFT engine).
    Mat lap = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            cxd acc(0, 0);
            for (int m = 0; m < n; ++m) {
                const double k = grid.wavenumbers[m];
                acc += -k * k * std::exp(cxd(0, k * (grid.coord(i) - grid.coord(j))));
            }
            lap(i, j) = acc / static_cast<double>(n);
        }

    Vec conv_sym = detail::convolution_symbol(grid, v.values.values);
    auto blocks = [&](const Vec& phi, Mat& H, Mat& K) {
        Field phif{grid, phi};
        Field phin{grid, phi / std::sqrt(w * phi.squaredNorm())};
        Vec rho = phi.array().abs2().cast<cxd>();
        detail::fft_nd(1, n, rho.data(), -1);
        rho.array() *= conv_sym.array();
        detail::fft_nd(1, n, rho.data(), +1);
        rho /= static_cast<double>(n);
        KernelMatrix K1t = project_orthogonal(build_k1(phif, v.values), phin, ProjectionSide::qKq);
        KernelMatrix K2t = project_orthogonal(build_k2(phif, v.values), phin, ProjectionSide::qbarKq);
        H = -lap + w * K1t.entries;
        H.diagonal() += rho.real().cast<cxd>();
        K = w * K2t.entries;
    };

    Mat G = Mat::Identity(n, n), S = Mat::Zero(n, n);
    Mat H(n, n), K(n, n);
    const int nsteps = static_cast<int>(std::llround((T - s) / dt_ref));
    Mat k1g(n, n), k1s(n, n), k2g(n, n), k2s(n, n), k3g(n, n), k3s(n, n), k4g(n, n), k4s(n, n);
    for (int i = 0; i < nsteps; ++i) {
        const double t = s + i * dt_ref;
        auto rhs = [&](const Mat& Gx, const Mat& Sx, double tt, Mat& og, Mat& os) {
            blocks(traj.interpolate(tt), H, K);
            og = cxd(0, -1) * (H * Gx + K * Sx);
            os = cxd(0, -1) * (-K.conjugate() * Gx - H.conjugate() * Sx);
        };
        rhs(G, S, t, k1g, k1s);
        rhs(G + 0.5 * dt_ref * k1g, S + 0.5 * dt_ref * k1s, t + 0.5 * dt_ref, k2g, k2s);
        rhs(G + 0.5 * dt_ref * k2g, S + 0.5 * dt_ref * k2s, t + 0.5 * dt_ref, k3g, k3s);
        rhs(G + dt_ref * k3g, S + dt_ref * k3s, t + dt_ref, k4g, k4s);
        G += dt_ref / 6.0 * (k1g + 2 * k2g + 2 * k3g + k4g);
        S += dt_ref / 6.0 * (k1s + 2 * k2s + 2 * k3s + k4s);
    }

    BogoliubovState out;
    out.gamma = from_coeff(grid, G, true);
    out.sigma = from_coeff(grid, S, false);
    out.s_anchor = s;
    out.t_current = T;
    return out;
}

} // namespace bogoflow
