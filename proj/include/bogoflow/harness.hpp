#ifndef BOGOFLOW_HARNESS_HPP
#define BOGOFLOW_HARNESS_HPP

#include <map>
#include <string>
#include <vector>

#include "bogoflow/config.hpp"
#include "bogoflow/grid.hpp"
#include "bogoflow/hartree.hpp"

namespace bogoflow {

struct DecayFit {
    double exponent = 0;
    double prefactor = 0;
    double r_squared = 0;
    double window_lo = 0, window_hi = 0;
    std::string series_name;
    bool advisory = false; // r^2 < 0.95: reported, never used in pass/fail
};

/// Least squares of log y against log(1+t) over the window; exponent = -slope.
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& y,
                   double window_lo, double window_hi, const std::string& series_name = "");

enum class CertificateKind { gamma_op, sigma_hs };

struct CertificateResult {
    CertificateKind kind;
    bool pass = true;
    double min_margin = 0;     // min over samples of (rhs*(1+slack) - lhs) / max(rhs, eps)
    std::size_t first_violation = 0;
};

/// Gronwall-type integral bound checked sample-by-sample with 5% slack:
///   gamma_op: gamma_op(t)^2 <= 1 + 2 int_s^t op(K_tau) exp(int_tau^t op(K)) dtau
///   sigma_hs: sigma_hs(t)   <= 2 int_s^t hs(K_tau) exp(int_tau^t op(K)) dtau
CertificateResult bound_certificate(CertificateKind kind, const std::vector<double>& times,
                                    const std::vector<double>& k_op,
                                    const std::vector<double>& k_hs,
                                    const std::vector<double>& flow_series,
                                    double slack = 0.05);

/// Periodic-box validity horizon: t_wrap = L / (4 k95) with k95 the 95th
/// percentile wavenumber of the initial datum's spectrum.
double wrap_time(const Field& initial);

/// op- and hs-norm series of the projected pairing kernel along a trajectory.
std::pair<std::vector<double>, std::vector<double>> pairing_kernel_norm_series(
    const HartreeTrajectory& traj, const Potential& v, const std::vector<double>& times);

struct ExperimentResult {
    std::map<std::string, double> values;
    std::vector<std::string> lines;    // human-readable summary
    bool certificates_pass = true;
    std::string out_dir;
};

/// Runs the configured experiment, writing CSV artifacts plus summary.txt and
/// summary.kv into out_dir. Partial outputs are removed on failure.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

/// The `fit` subcommand: fit a column of an existing CSV.
ExperimentResult run_fit_file(const ExperimentConfig& cfg, const std::string& out_dir);

} // namespace bogoflow

#endif
