#ifndef BOGOFLOW_CONFIG_HPP
#define BOGOFLOW_CONFIG_HPP

#include <map>
#include <string>
#include <vector>

namespace bogoflow {

enum class ExperimentKind {
    hartree_decay,
    kernel_decay,
    sigma_dispersion,
    eta_bound,
    free_comparison,
    fock_oracle,
    certificates,
};

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& text);

/// Parsed "key = value" configuration with [section] headers.
/// Unknown sections or keys are reported as errors naming the offending field.
struct ExperimentConfig {
    // [grid]
    int dimension = 1;
    int points = 512;
    double box_length = 256.0;
    // [potential]
    double coupling = 0.1;
    double radius = 1.0;
    // [initial]
    double width = 1.0;
    // [time]
    double t_final = 48.0;
    double dt = 1e-3;
    int sample_stride = 200;       // steps between diagnostic samples
    double s_anchor = 0.0;
    std::vector<double> t0_list;   // snapshot anchors for free comparison
    int hartree_store_stride = 5;  // steps between stored condensate states
    // [experiment]
    ExperimentKind kind = ExperimentKind::hartree_decay;
    unsigned seed = 12345;
    double transient = 10.0;       // fit window floor is max(5, 2 transient)
    // [fit]
    double window_lo = 0.0;        // 0 = default
    double window_hi = 0.0;        // 0 = 0.9 t_wrap
    std::string fit_input;         // fit subcommand: input CSV
    std::string fit_t_column = "t";
    std::string fit_y_column;
    // [fock]
    int fock_modes = 2;
    int fock_n_max = 16;
    std::vector<int> fock_cutoff_list; // defaults to {n_max - 4, n_max, n_max + 4}
    double fock_t_final = 1.5;
    double fock_dt = 5e-4;
    std::string fock_source = "synthetic"; // or "galerkin"
    double fock_k_scale = 0.06;
    double fock_h_scale = 0.25;
    // [flow]
    int grid_doubling_points = 0;  // eta_bound: compare against this n (0 = 2x points)

    void validate() const; // range checks; throws naming the offending field
};

ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

} // namespace bogoflow

#endif
