#include "bogoflow/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "bogoflow/bogoliubov.hpp"
#include "bogoflow/fock.hpp"
#include "bogoflow/hartree.hpp"
#include "bogoflow/kernels.hpp"

namespace fs = std::filesystem;

namespace bogoflow {

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& y,
                   double window_lo, double window_hi, const std::string& series_name) {
    if (t.size() != y.size()) throw std::invalid_argument("fit_decay: series size mismatch");
    if (!(window_lo < window_hi)) throw std::invalid_argument("fit_decay: empty window");
    std::vector<double> X, Y;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < window_lo - 1e-12 || t[i] > window_hi + 1e-12) continue;
        if (!(y[i] > 0)) throw std::invalid_argument("fit_decay: nonpositive value inside the window");
        X.push_back(std::log1p(t[i]));
        Y.push_back(std::log(y[i]));
    }
    if (X.size() < 10) throw std::invalid_argument("fit_decay: fewer than 10 points in the window");

    const double n = static_cast<double>(X.size());
    const double mx = std::accumulate(X.begin(), X.end(), 0.0) / n;
    const double my = std::accumulate(Y.begin(), Y.end(), 0.0) / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        sxx += (X[i] - mx) * (X[i] - mx);
        sxy += (X[i] - mx) * (Y[i] - my);
        syy += (Y[i] - my) * (Y[i] - my);
    }
    const double slope = sxy / sxx;
    DecayFit fit;
    fit.exponent = -slope;
    fit.prefactor = std::exp(my - slope * mx);
    fit.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    fit.window_lo = window_lo;
    fit.window_hi = window_hi;
    fit.series_name = series_name;
    fit.advisory = fit.r_squared < 0.95;
    return fit;
}

CertificateResult bound_certificate(CertificateKind kind, const std::vector<double>& times,
                                    const std::vector<double>& k_op,
                                    const std::vector<double>& k_hs,
                                    const std::vector<double>& flow_series, double slack) {
    const std::size_t n = times.size();
    if (k_op.size() != n || k_hs.size() != n || flow_series.size() != n)
        throw std::invalid_argument("bound_certificate: misaligned series");

    // cumulative trapezoid of op(K) from the start
    std::vector<double> cum(n, 0.0);
    for (std::size_t i = 1; i < n; ++i)
        cum[i] = cum[i - 1] + 0.5 * (k_op[i] + k_op[i - 1]) * (times[i] - times[i - 1]);

    CertificateResult res;
    res.kind = kind;
    res.min_margin = std::numeric_limits<double>::infinity();
    const std::vector<double>& src = (kind == CertificateKind::gamma_op) ? k_op : k_hs;
    for (std::size_t j = 0; j < n; ++j) {
        double integral = 0;
        for (std::size_t i = 1; i <= j; ++i) {
            const double f1 = src[i - 1] * std::exp(cum[j] - cum[i - 1]);
            const double f2 = src[i] * std::exp(cum[j] - cum[i]);
            integral += 0.5 * (f1 + f2) * (times[i] - times[i - 1]);
        }
        const double rhs = (kind == CertificateKind::gamma_op) ? 1.0 + 2.0 * integral : 2.0 * integral;
        const double lhs = (kind == CertificateKind::gamma_op) ? flow_series[j] * flow_series[j]
                                                               : flow_series[j];
        const double margin = (rhs * (1.0 + slack) - lhs) / std::max(rhs, 1e-12);
        if (margin < res.min_margin) res.min_margin = margin;
        if (lhs > rhs * (1.0 + slack) + 1e-12 && res.pass) {
            res.pass = false;
            res.first_violation = j;
        }
    }
    return res;
}

std::pair<std::vector<double>, std::vector<double>> pairing_kernel_norm_series(
    const HartreeTrajectory& traj, const Potential& v, const std::vector<double>& times) {
    std::vector<double> op_series, hs_series;
    const GridSpec& g = traj.grid;
    for (double t : times) {
        Vec phiv = traj.interpolate(t);
        Field phi{g, phiv};
        Field phin{g, phiv / std::sqrt(g.quadrature_weight * phiv.squaredNorm())};
        KernelMatrix K2t = project_orthogonal(build_k2(phi, v.values), phin, ProjectionSide::qbarKq);
        op_series.push_back(op_norm(K2t));
        hs_series.push_back(hs_norm(K2t));
    }
    return {op_series, hs_series};
}

double wrap_time(const Field& initial) {
    Field hat = fourier_transform(initial, FftDirection::forward);
    const std::size_t total = initial.grid.size();
    std::vector<std::pair<double, double>> mass(total); // (|k|, |hat|^2)
    for (std::size_t i = 0; i < total; ++i)
        mass[i] = {std::sqrt(initial.grid.k2(i)), std::norm(hat.values[static_cast<Eigen::Index>(i)])};
    std::stable_sort(mass.begin(), mass.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    double totmass = 0;
    for (const auto& m : mass) totmass += m.second;
    double acc = 0, k95 = mass.back().first;
    for (const auto& m : mass) {
        acc += m.second;
        if (acc >= 0.95 * totmass) { k95 = m.first; break; }
    }
    if (k95 <= 0) k95 = mass.back().first;
    return initial.grid.box_length / (4.0 * k95);
}

namespace {

struct OutputTracker {
    fs::path dir;
    std::vector<fs::path> files;

    explicit OutputTracker(const std::string& out_dir) : dir(out_dir) {
        fs::create_directories(dir);
    }
    std::string path(const std::string& name) {
        fs::path p = dir / name;
        files.push_back(p);
        return p.string();
    }
    void cleanup() {
        for (const auto& f : files) {
            std::error_code ec;
            fs::remove(f, ec);
        }
    }
};

struct SetupBundle {
    GridSpec grid;
    Potential v;
    Field phi0;
    double t_wrap = 0;
};

SetupBundle make_setup(const ExperimentConfig& cfg) {
    SetupBundle s;
    s.grid = make_grid(cfg.dimension, cfg.points, cfg.box_length);
    s.v = build_bump_potential(s.grid, cfg.coupling, cfg.radius);
    s.phi0 = gaussian_data(s.grid, cfg.width);
    s.t_wrap = wrap_time(s.phi0);
    return s;
}

std::pair<double, double> fit_window(const ExperimentConfig& cfg, double t_wrap, double T) {
    double lo = cfg.window_lo > 0 ? cfg.window_lo : std::max(5.0, 2.0 * cfg.transient);
    double hi = cfg.window_hi > 0 ? cfg.window_hi : 0.9 * t_wrap;
    hi = std::min(hi, T);
    return {lo, hi};
}

/// Periodized free-Gaussian closed form matching gaussian_data(grid, a) at t = 0.
Field closed_form_free_gaussian(const GridSpec& grid, double a, double t) {
    Field raw = make_field(grid);
    for (int i = 0; i < grid.points_per_axis; ++i) {
        const double x = grid.coord(i);
        raw.values[i] = std::exp(-x * x / (2 * a * a));
    }
    const double norm_const = 1.0 / field_l2(raw);

    Field out = make_field(grid);
    const cxd z(a * a, 2.0 * t);
    const cxd pref = norm_const * std::sqrt(cxd(a * a, 0) / z);
    const double L = grid.box_length;
    for (int i = 0; i < grid.points_per_axis; ++i) {
        cxd acc(0, 0);
        for (int m = -4; m <= 4; ++m) {
            const double x = grid.coord(i) + m * L;
            acc += std::exp(-x * x / (2.0 * z));
        }
        out.values[i] = pref * acc;
    }
    return out;
}

struct KernelSeries {
    std::vector<double> t;
    std::vector<KernelNormReport> k1, k2;
};

KernelSeries kernel_series_along(const HartreeTrajectory& traj, const Potential& v,
                                 const std::vector<double>& times) {
    KernelSeries ser;
    const GridSpec& g = traj.grid;
    for (double t : times) {
        Vec phiv = traj.interpolate(t);
        Field phi{g, phiv};
        Field phin{g, phiv / std::sqrt(g.quadrature_weight * phiv.squaredNorm())};
        KernelMatrix K1t = project_orthogonal(build_k1(phi, v.values), phin, ProjectionSide::qKq);
        KernelMatrix K2t = project_orthogonal(build_k2(phi, v.values), phin, ProjectionSide::qbarKq);
        ser.t.push_back(t);
        ser.k1.push_back(kernel_norm_report(K1t, t));
        ser.k2.push_back(kernel_norm_report(K2t, t));
    }
    return ser;
}

void write_kernel_csv(const std::string& path, const std::vector<double>& t,
                      const std::vector<KernelNormReport>& reports) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "t,op,hs,linf_l2,grad_hs,lap_hs\n";
    out.precision(15);
    for (std::size_t i = 0; i < t.size(); ++i)
        out << t[i] << ',' << reports[i].op_norm << ',' << reports[i].hs_norm << ','
            << reports[i].linf_l2_norm << ',' << reports[i].grad_hs_norm << ','
            << reports[i].lap_hs_norm << '\n';
}

HartreeTrajectory run_hartree(const ExperimentConfig& cfg, const SetupBundle& s, int store_stride) {
    return hartree_evolve(s.phi0, s.v, cfg.t_final, cfg.dt, store_stride);
}

void kv_line(std::vector<std::string>& lines, std::map<std::string, double>& vals,
             const std::string& key, double value) {
    vals[key] = value;
    std::ostringstream os;
    os.precision(15);
    os << key << " = " << value;
    lines.push_back(os.str());
}

// ---------------------------------------------------------------- experiments

void exp_hartree_decay(const ExperimentConfig& cfg, const SetupBundle& s, OutputTracker& out,
                       ExperimentResult& res) {
    HartreeTrajectory traj = run_hartree(cfg, s, cfg.sample_stride);
    traj.write_csv(out.path("hartree_diagnostics.csv"));

    std::vector<double> ts, linf;
    double mass0 = traj.diagnostics.front().mass;
    double e0 = traj.diagnostics.front().energy;
    double mass_drift = 0, energy_drift = 0;
    for (const auto& d : traj.diagnostics) {
        ts.push_back(d.t);
        linf.push_back(d.linf);
        mass_drift = std::max(mass_drift, std::abs(d.mass - mass0));
        energy_drift = std::max(energy_drift, std::abs(d.energy - e0) / std::max(std::abs(e0), 1e-300));
    }
    auto [lo, hi] = fit_window(cfg, s.t_wrap, cfg.t_final);
    DecayFit fit = fit_decay(ts, linf, lo, hi, "hartree_linf");

    kv_line(res.lines, res.values, "t_wrap", s.t_wrap);
    kv_line(res.lines, res.values, "fit_exponent", fit.exponent);
    kv_line(res.lines, res.values, "fit_r2", fit.r_squared);
    kv_line(res.lines, res.values, "fit_window_lo", lo);
    kv_line(res.lines, res.values, "fit_window_hi", hi);
    kv_line(res.lines, res.values, "fit_advisory", fit.advisory ? 1 : 0);
    kv_line(res.lines, res.values, "mass_drift", mass_drift);
    kv_line(res.lines, res.values, "energy_rel_drift", energy_drift);

    double h1_0 = traj.diagnostics.front().h1, h2_0 = traj.diagnostics.front().h2;
    double h1_max = 0, h2_max = 0;
    for (const auto& d : traj.diagnostics)
        if (d.t >= cfg.transient) {
            h1_max = std::max(h1_max, d.h1);
            h2_max = std::max(h2_max, d.h2);
        }
    kv_line(res.lines, res.values, "h1_max_over_initial", h1_max / h1_0);
    kv_line(res.lines, res.values, "h2_max_over_initial", h2_max / h2_0);

    if (cfg.coupling == 0.0) {
        double max_err = 0;
        for (std::size_t i = 0; i < traj.sample_times.size(); ++i) {
            Field exact = closed_form_free_gaussian(s.grid, cfg.width, traj.sample_times[i]);
            max_err = std::max(max_err, (traj.states[i] - exact.values).cwiseAbs().maxCoeff());
        }
        kv_line(res.lines, res.values, "max_closed_form_error", max_err);
    }
}

void exp_kernel_decay(const ExperimentConfig& cfg, const SetupBundle& s, OutputTracker& out,
                      ExperimentResult& res) {
    HartreeTrajectory traj = run_hartree(cfg, s, cfg.sample_stride);
    KernelSeries ser = kernel_series_along(traj, s.v, traj.sample_times);
    write_kernel_csv(out.path("kernel1_norms.csv"), ser.t, ser.k1);
    write_kernel_csv(out.path("kernel2_norms.csv"), ser.t, ser.k2);

    // Lemma-type certificates at every sample
    int failed = 0;
    const GridSpec& g = traj.grid;
    for (std::size_t i = 0; i < traj.sample_times.size(); ++i) {
        Vec phiv = traj.states[i];
        Field phi{g, phiv};
        Field phin{g, phiv / std::sqrt(g.quadrature_weight * phiv.squaredNorm())};
        for (auto side : {ProjectionSide::qKq, ProjectionSide::qbarKq}) {
            KernelMatrix K = (side == ProjectionSide::qKq) ? build_k1(phi, s.v.values)
                                                           : build_k2(phi, s.v.values);
            KernelMatrix Kt = project_orthogonal(K, phin, side);
            auto cert = verify_kernel_bounds(Kt, s.v.values, phin);
            if (!cert.all_pass) ++failed;
        }
    }
    res.certificates_pass = failed == 0;

    auto [lo, hi] = fit_window(cfg, s.t_wrap, cfg.t_final);
    std::vector<double> hs2, op2;
    for (const auto& r : ser.k2) {
        hs2.push_back(r.hs_norm);
        op2.push_back(r.op_norm);
    }
    DecayFit fhs = fit_decay(ser.t, hs2, lo, hi, "k2_hs");
    DecayFit fop = fit_decay(ser.t, op2, lo, hi, "k2_op");

    kv_line(res.lines, res.values, "t_wrap", s.t_wrap);
    kv_line(res.lines, res.values, "certificates_failed_samples", failed);
    kv_line(res.lines, res.values, "certificates_pass", failed == 0 ? 1 : 0);
    kv_line(res.lines, res.values, "k2_hs_exponent", fhs.exponent);
    kv_line(res.lines, res.values, "k2_hs_r2", fhs.r_squared);
    kv_line(res.lines, res.values, "k2_op_exponent", fop.exponent);
    kv_line(res.lines, res.values, "k2_op_r2", fop.r_squared);
    kv_line(res.lines, res.values, "fit_window_lo", lo);
    kv_line(res.lines, res.values, "fit_window_hi", hi);
}

FlowResult run_flow(const ExperimentConfig& cfg, const SetupBundle& s, const HartreeTrajectory& traj,
                    const std::vector<double>& snapshots) {
    FlowOptions opts;
    opts.sample_every = cfg.sample_stride;
    opts.defect_every_samples = 1;
    opts.snapshot_times = snapshots;
    return evolve_theta(cfg.s_anchor, cfg.t_final, cfg.dt, traj, s.v, opts);
}

void flow_summary(const ExperimentConfig& cfg, const SetupBundle& s, const FlowDiagnostics& diag,
                  ExperimentResult& res) {
    std::vector<double> ts, l2i, hs, eta, grad, lap;
    double defect_max = 0, gamma_op_max = 0, m_final = 0;
    for (const auto& d : diag.samples) {
        ts.push_back(d.t);
        l2i.push_back(d.sigma_linf_l2);
        hs.push_back(d.sigma_hs);
        eta.push_back(d.eta_hs);
        grad.push_back(d.sigma_grad_hs);
        lap.push_back(d.sigma_lap_hs);
        defect_max = std::max(defect_max, d.defect);
        gamma_op_max = std::max(gamma_op_max, d.gamma_op);
        m_final = d.M_value;
    }
    auto [lo, hi] = fit_window(cfg, s.t_wrap, cfg.t_final);
    DecayFit fit = fit_decay(ts, l2i, lo, hi, "sigma_linf_l2");
    kv_line(res.lines, res.values, "sigma_linf_l2_exponent", fit.exponent);
    kv_line(res.lines, res.values, "sigma_linf_l2_r2", fit.r_squared);
    kv_line(res.lines, res.values, "fit_window_lo", lo);
    kv_line(res.lines, res.values, "fit_window_hi", hi);
    kv_line(res.lines, res.values, "defect_max", defect_max);
    kv_line(res.lines, res.values, "gamma_op_max", gamma_op_max);
    kv_line(res.lines, res.values, "M_value_final", m_final);
    kv_line(res.lines, res.values, "t_wrap", s.t_wrap);

    auto plateau = [&](const std::vector<double>& series, const std::string& name) {
        double at10 = 0, mx = 0;
        bool seen = false;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (ts[i] >= 10.0) {
                if (!seen) { at10 = series[i]; seen = true; }
                mx = std::max(mx, series[i]);
            }
        }
        kv_line(res.lines, res.values, name + "_plateau_ratio", seen && at10 > 0 ? mx / at10 : 0.0);
    };
    plateau(hs, "sigma_hs");
    plateau(eta, "eta_hs");
    plateau(grad, "sigma_grad_hs");
    plateau(lap, "sigma_lap_hs");
}

void exp_sigma_dispersion(const ExperimentConfig& cfg, const SetupBundle& s, OutputTracker& out,
                          ExperimentResult& res) {
    HartreeTrajectory traj = run_hartree(cfg, s, cfg.hartree_store_stride);
    FlowResult flow = run_flow(cfg, s, traj, {});
    flow.diagnostics.write_csv(out.path("flow_diagnostics.csv"));
    flow_summary(cfg, s, flow.diagnostics, res);
}

void exp_eta_bound(const ExperimentConfig& cfg, const SetupBundle& s, OutputTracker& out,
                   ExperimentResult& res) {
    HartreeTrajectory traj = run_hartree(cfg, s, cfg.hartree_store_stride);
    FlowResult flow = run_flow(cfg, s, traj, {});
    flow.diagnostics.write_csv(out.path("flow_diagnostics.csv"));
    flow_summary(cfg, s, flow.diagnostics, res);

    // grid-stability: repeat on a finer grid, same physical parameters
    ExperimentConfig cfg2 = cfg;
    cfg2.points = cfg.grid_doubling_points > 0 ? cfg.grid_doubling_points : 2 * cfg.points;
    SetupBundle s2 = make_setup(cfg2);
    HartreeTrajectory traj2 = run_hartree(cfg2, s2, cfg2.hartree_store_stride);
    FlowResult flow2 = run_flow(cfg2, s2, traj2, {});
    const double eta_n = flow.diagnostics.samples.back().eta_hs;
    const double eta_2n = flow2.diagnostics.samples.back().eta_hs;
    kv_line(res.lines, res.values, "eta_hs_final_n", eta_n);
    kv_line(res.lines, res.values, "eta_hs_final_2n", eta_2n);
    kv_line(res.lines, res.values, "eta_grid_rel_change",
            std::abs(eta_n - eta_2n) / std::max(eta_2n, 1e-300));
}

void exp_free_comparison(const ExperimentConfig& cfg, const SetupBundle& s, OutputTracker& out,
                         ExperimentResult& res) {
    if (cfg.t0_list.empty())
        throw std::invalid_argument("config field `time.t0_list`: free_comparison needs at least one t0");
    HartreeTrajectory traj = run_hartree(cfg, s, cfg.hartree_store_stride);
    FlowResult flow = run_flow(cfg, s, traj, cfg.t0_list);
    flow.diagnostics.write_csv(out.path("flow_diagnostics.csv"));
    flow_summary(cfg, s, flow.diagnostics, res);

    std::vector<double> finals;
    for (const auto& snap : flow.snapshots) {
        auto series = free_comparison(snap, cfg.t_final, cfg.dt, traj, s.v, cfg.sample_stride);
        std::ostringstream name;
        name << "residuals_t0_" << snap.t_current << ".csv";
        std::ofstream f(out.path(name.str()));
        f << "t,r_total,r_sigma_hs,r_gamma_op\n";
        f.precision(15);
        for (const auto& p : series)
            f << p.t << ',' << p.r_total << ',' << p.r_sigma_hs << ',' << p.r_gamma_op << '\n';
        finals.push_back(series.back().r_total);
        std::ostringstream key;
        key << "residual_T_t0_" << snap.t_current;
        kv_line(res.lines, res.values, key.str(), series.back().r_total);
    }
    if (finals.size() >= 2)
        kv_line(res.lines, res.values, "residual_last_over_first", finals.back() / finals.front());
}

QuadraticGenerator synthetic_generator(int modes, unsigned seed, double h_scale, double k_scale) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist;
    Mat A(modes, modes), B(modes, modes);
    for (int i = 0; i < modes; ++i)
        for (int j = 0; j < modes; ++j) {
            A(i, j) = cxd(dist(rng), dist(rng));
            B(i, j) = cxd(dist(rng), dist(rng));
        }
    QuadraticGenerator gen;
    gen.h = h_scale * (A + A.adjoint());
    gen.k = k_scale * (B + B.transpose());
    return gen;
}

void exp_fock_oracle(const ExperimentConfig& cfg, const SetupBundle& s, OutputTracker& out,
                     ExperimentResult& res) {
    QuadraticGenerator gen;
    if (cfg.fock_source == "synthetic") {
        gen = synthetic_generator(cfg.fock_modes, cfg.seed, cfg.fock_h_scale, cfg.fock_k_scale);
    } else {
        gen = galerkin_generator(s.phi0, s.v, cfg.fock_modes);
    }
    validate_generator(gen);
    auto gen_of_t = [&](double) { return gen; };

    ModeFlowResult mode = mode_symplectic_flow(gen_of_t, cfg.fock_t_final, cfg.fock_dt);
    TwoPointFunctions pred = quasi_free_predictions(mode);
    const double n_pred = mode.sigma.squaredNorm();
    Eigen::MatrixXd weights = Eigen::MatrixXd::Ones(cfg.fock_modes, cfg.fock_modes);

    std::vector<int> cutoffs = cfg.fock_cutoff_list;
    if (cutoffs.empty())
        cutoffs = {std::max(1, cfg.fock_n_max - 4), cfg.fock_n_max, std::min(20, cfg.fock_n_max + 4)};

    std::vector<double> wick_residuals;
    for (int cutoff : cutoffs) {
        FockBasis basis = enumerate_basis(cfg.fock_modes, cutoff);
        auto [state, leak] = evolve_fock(vacuum_state(basis), gen_of_t, cfg.fock_t_final, cfg.fock_dt);
        auto tp = two_point_functions(state);
        auto moments = number_moments(state, 3);
        WickCheck wick = check_wick_quartic(state, weights, mode.gamma, mode.sigma);
        const double errG = (tp.G - pred.G).cwiseAbs().maxCoeff() /
                            std::max(pred.G.cwiseAbs().maxCoeff(), 1e-300);
        const double errP = (tp.P - pred.P).cwiseAbs().maxCoeff() /
                            std::max(pred.P.cwiseAbs().maxCoeff(), 1e-300);
        const double n_mean = moments[0] - 1.0; // <N> = <(N+1)^1> - 1
        const std::string tag = "cutoff_" + std::to_string(cutoff) + "_";
        kv_line(res.lines, res.values, tag + "leakage", leak.leakage);
        kv_line(res.lines, res.values, tag + "two_point_err_G", errG);
        kv_line(res.lines, res.values, tag + "two_point_err_P", errP);
        kv_line(res.lines, res.values, tag + "number_vs_sigma_err",
                std::abs(n_mean - n_pred) / std::max(n_pred, 1e-300));
        kv_line(res.lines, res.values, tag + "wick_residual", wick.residual);
        wick_residuals.push_back(wick.residual);

        // time series at this cutoff
        std::ostringstream name;
        name << "fock_cutoff_" << cutoff << ".csv";
        std::ofstream f(out.path(name.str()));
        f << "t,leakage,N1,N2,N3,wick_lhs,wick_rhs,residual\n";
        f.precision(15);
        const int slices = 8;
        for (int sidx = 1; sidx <= slices; ++sidx) {
            const double tt = cfg.fock_t_final * sidx / slices;
            auto [st_t, leak_t] = evolve_fock(vacuum_state(basis), gen_of_t, tt, cfg.fock_dt);
            ModeFlowResult mt = mode_symplectic_flow(gen_of_t, tt, cfg.fock_dt);
            auto mom = number_moments(st_t, 3);
            WickCheck wt = check_wick_quartic(st_t, weights, mt.gamma, mt.sigma);
            f << tt << ',' << leak_t.leakage << ',' << mom[0] << ',' << mom[1] << ',' << mom[2]
              << ',' << wt.lhs << ',' << wt.rhs << ',' << wt.residual << '\n';
        }
    }
    bool monotone = true;
    for (std::size_t i = 1; i < wick_residuals.size(); ++i)
        if (wick_residuals[i] > wick_residuals[i - 1]) monotone = false;
    kv_line(res.lines, res.values, "wick_residual_monotone", monotone ? 1 : 0);
    kv_line(res.lines, res.values, "n_pred_sigma_frob2", n_pred);

    // Gronwall-shaped moment envelopes: c_k = sup_t log<(N+1)^k>(t) / (k |k|_F t)
    FockBasis basis = enumerate_basis(cfg.fock_modes, cfg.fock_n_max);
    const double kF = gen.k.norm();
    const int slices = 12;
    double cmax = 0;
    for (int sidx = 1; sidx <= slices; ++sidx) {
        const double tt = cfg.fock_t_final * sidx / slices;
        auto [st_t, leak_t] = evolve_fock(vacuum_state(basis), gen_of_t, tt, cfg.fock_dt);
        auto mom = number_moments(st_t, 3);
        for (int k = 1; k <= 3; ++k)
            cmax = std::max(cmax, std::log(mom[static_cast<std::size_t>(k - 1)]) / (k * kF * tt));
    }
    kv_line(res.lines, res.values, "moment_envelope_constant", cmax);
}

void exp_certificates(const ExperimentConfig& cfg, const SetupBundle& s, OutputTracker& out,
                      ExperimentResult& res) {
    HartreeTrajectory traj = run_hartree(cfg, s, cfg.hartree_store_stride);
    FlowResult flow = run_flow(cfg, s, traj, {});
    flow.diagnostics.write_csv(out.path("flow_diagnostics.csv"));
    flow_summary(cfg, s, flow.diagnostics, res);

    std::vector<double> ts, gop, shs;
    for (const auto& d : flow.diagnostics.samples) {
        ts.push_back(d.t);
        gop.push_back(d.gamma_op);
        shs.push_back(d.sigma_hs);
    }
    auto [kop, khs] = pairing_kernel_norm_series(traj, s.v, ts);
    {
        std::ofstream f(out.path("kernel2_norms.csv"));
        f << "t,op,hs\n";
        f.precision(15);
        for (std::size_t i = 0; i < ts.size(); ++i)
            f << ts[i] << ',' << kop[i] << ',' << khs[i] << '\n';
    }

    auto cg = bound_certificate(CertificateKind::gamma_op, ts, kop, khs, gop);
    auto cs = bound_certificate(CertificateKind::sigma_hs, ts, kop, khs, shs);
    res.certificates_pass = cg.pass && cs.pass;
    kv_line(res.lines, res.values, "gamma_op_certificate_pass", cg.pass ? 1 : 0);
    kv_line(res.lines, res.values, "gamma_op_certificate_margin", cg.min_margin);
    kv_line(res.lines, res.values, "sigma_hs_certificate_pass", cs.pass ? 1 : 0);
    kv_line(res.lines, res.values, "sigma_hs_certificate_margin", cs.min_margin);
}

void write_summaries(OutputTracker& out, const ExperimentConfig& cfg, ExperimentResult& res) {
    {
        std::ofstream f(out.path("summary.kv"));
        f.precision(15);
        f << "kind = " << to_string(cfg.kind) << "\n";
        f << "seed = " << cfg.seed << "\n";
        for (const auto& [k, v] : res.values) f << k << " = " << v << "\n";
        f << "certificates_pass = " << (res.certificates_pass ? 1 : 0) << "\n";
    }
    {
        std::ofstream f(out.path("summary.txt"));
        f << "experiment: " << to_string(cfg.kind) << "\n";
        for (const auto& line : res.lines) f << line << "\n";
        f << "certificates: " << (res.certificates_pass ? "pass" : "FAIL") << "\n";
    }
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    OutputTracker out(out_dir);
    ExperimentResult res;
    res.out_dir = out_dir;
    try {
        SetupBundle s = make_setup(cfg);
        switch (cfg.kind) {
            case ExperimentKind::hartree_decay: exp_hartree_decay(cfg, s, out, res); break;
            case ExperimentKind::kernel_decay: exp_kernel_decay(cfg, s, out, res); break;
            case ExperimentKind::sigma_dispersion: exp_sigma_dispersion(cfg, s, out, res); break;
            case ExperimentKind::eta_bound: exp_eta_bound(cfg, s, out, res); break;
            case ExperimentKind::free_comparison: exp_free_comparison(cfg, s, out, res); break;
            case ExperimentKind::fock_oracle: exp_fock_oracle(cfg, s, out, res); break;
            case ExperimentKind::certificates: exp_certificates(cfg, s, out, res); break;
        }
        write_summaries(out, cfg, res);
    } catch (...) {
        out.cleanup();
        throw;
    }
    return res;
}

ExperimentResult run_fit_file(const ExperimentConfig& cfg, const std::string& out_dir) {
    if (cfg.fit_input.empty())
        throw std::invalid_argument("config field `fit.input`: required for the fit subcommand");
    if (cfg.fit_y_column.empty())
        throw std::invalid_argument("config field `fit.y_column`: required for the fit subcommand");

    std::ifstream in(cfg.fit_input);
    if (!in) throw std::invalid_argument("fit: cannot open input '" + cfg.fit_input + "'");
    std::string header;
    if (!std::getline(in, header)) throw std::invalid_argument("fit: empty input");
    std::vector<std::string> cols;
    {
        std::stringstream ss(header);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
    }
    auto col_of = [&](const std::string& name) {
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == name) return i;
        throw std::invalid_argument("fit: no column named '" + name + "'");
    };
    const std::size_t tc = col_of(cfg.fit_t_column), yc = col_of(cfg.fit_y_column);
    std::vector<double> ts, ys;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        ts.push_back(row.at(tc));
        ys.push_back(row.at(yc));
    }
    double lo = cfg.window_lo > 0 ? cfg.window_lo : std::max(5.0, 2.0 * cfg.transient);
    double hi = cfg.window_hi > 0 ? cfg.window_hi : ts.back();
    DecayFit fit = fit_decay(ts, ys, lo, hi, cfg.fit_y_column);

    OutputTracker out(out_dir);
    ExperimentResult res;
    res.out_dir = out_dir;
    kv_line(res.lines, res.values, "fit_exponent", fit.exponent);
    kv_line(res.lines, res.values, "fit_prefactor", fit.prefactor);
    kv_line(res.lines, res.values, "fit_r2", fit.r_squared);
    kv_line(res.lines, res.values, "fit_window_lo", lo);
    kv_line(res.lines, res.values, "fit_window_hi", hi);
    kv_line(res.lines, res.values, "fit_advisory", fit.advisory ? 1 : 0);
    write_summaries(out, cfg, res);
    return res;
}

} // namespace bogoflow
