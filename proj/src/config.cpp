#include "bogoflow/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bogoflow {

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::hartree_decay: return "hartree_decay";
        case ExperimentKind::kernel_decay: return "kernel_decay";
        case ExperimentKind::sigma_dispersion: return "sigma_dispersion";
        case ExperimentKind::eta_bound: return "eta_bound";
        case ExperimentKind::free_comparison: return "free_comparison";
        case ExperimentKind::fock_oracle: return "fock_oracle";
        case ExperimentKind::certificates: return "certificates";
    }
    return "?";
}

ExperimentKind parse_kind(const std::string& text) {
    for (auto k : {ExperimentKind::hartree_decay, ExperimentKind::kernel_decay,
                   ExperimentKind::sigma_dispersion, ExperimentKind::eta_bound,
                   ExperimentKind::free_comparison, ExperimentKind::fock_oracle,
                   ExperimentKind::certificates})
        if (to_string(k) == text) return k;
    throw std::invalid_argument("config field `kind`: unrecognized experiment kind '" + text + "'");
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& section, const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument("config field `" + section + "." + key + "`: not a number: '" + value + "'");
    }
}

int parse_int(const std::string& section, const std::string& key, const std::string& value) {
    const double v = parse_double(section, key, value);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw std::invalid_argument("config field `" + section + "." + key + "`: not an integer: '" + value + "'");
    return i;
}

template <class T, class F>
std::vector<T> parse_list(const std::string& section, const std::string& key,
                          const std::string& value, F&& one) {
    std::vector<T> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(one(section, key, item));
    }
    return out;
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "grid" && section != "potential" && section != "initial" &&
                section != "time" && section != "experiment" && section != "fit" &&
                section != "fock" && section != "flow")
                throw std::invalid_argument("config section `" + section + "`: unknown section");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto unknown = [&]() {
            throw std::invalid_argument("config field `" + section + "." + key + "`: unknown key");
        };

        if (section == "grid") {
            if (key == "dimension") cfg.dimension = parse_int(section, key, value);
            else if (key == "points") cfg.points = parse_int(section, key, value);
            else if (key == "box_length") cfg.box_length = parse_double(section, key, value);
            else unknown();
        } else if (section == "potential") {
            if (key == "coupling") cfg.coupling = parse_double(section, key, value);
            else if (key == "radius") cfg.radius = parse_double(section, key, value);
            else unknown();
        } else if (section == "initial") {
            if (key == "width") cfg.width = parse_double(section, key, value);
            else unknown();
        } else if (section == "time") {
            if (key == "t_final") cfg.t_final = parse_double(section, key, value);
            else if (key == "dt") cfg.dt = parse_double(section, key, value);
            else if (key == "sample_stride") cfg.sample_stride = parse_int(section, key, value);
            else if (key == "s_anchor") cfg.s_anchor = parse_double(section, key, value);
            else if (key == "t0_list") cfg.t0_list = parse_list<double>(section, key, value, parse_double);
            else if (key == "hartree_store_stride") cfg.hartree_store_stride = parse_int(section, key, value);
            else unknown();
        } else if (section == "experiment") {
            if (key == "kind") cfg.kind = parse_kind(value);
            else if (key == "seed") cfg.seed = static_cast<unsigned>(parse_int(section, key, value));
            else if (key == "transient") cfg.transient = parse_double(section, key, value);
            else unknown();
        } else if (section == "fit") {
            if (key == "window_lo") cfg.window_lo = parse_double(section, key, value);
            else if (key == "window_hi") cfg.window_hi = parse_double(section, key, value);
            else if (key == "input") cfg.fit_input = value;
            else if (key == "t_column") cfg.fit_t_column = value;
            else if (key == "y_column") cfg.fit_y_column = value;
            else unknown();
        } else if (section == "fock") {
            if (key == "modes") cfg.fock_modes = parse_int(section, key, value);
            else if (key == "n_max") cfg.fock_n_max = parse_int(section, key, value);
            else if (key == "cutoff_list") cfg.fock_cutoff_list = parse_list<int>(section, key, value, parse_int);
            else if (key == "t_final") cfg.fock_t_final = parse_double(section, key, value);
            else if (key == "dt") cfg.fock_dt = parse_double(section, key, value);
            else if (key == "source") cfg.fock_source = value;
            else if (key == "k_scale") cfg.fock_k_scale = parse_double(section, key, value);
            else if (key == "h_scale") cfg.fock_h_scale = parse_double(section, key, value);
            else unknown();
        } else if (section == "flow") {
            if (key == "grid_doubling_points") cfg.grid_doubling_points = parse_int(section, key, value);
            else unknown();
        } else {
            throw std::invalid_argument("config field `" + key + "`: key appears before any [section]");
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void ExperimentConfig::validate() const {
    auto bad = [](const std::string& field, const std::string& why) {
        throw std::invalid_argument("config field `" + field + "`: " + why);
    };
    if (dimension < 1 || dimension > 3) bad("grid.dimension", "must be 1, 2 or 3");
    if (points < 8 || points > 8192 || (points & (points - 1)) != 0)
        bad("grid.points", "must be a power of two in [8, 8192]");
    if (!(box_length > 0)) bad("grid.box_length", "must be positive");
    if (coupling < 0) bad("potential.coupling", "must be >= 0");
    if (!(radius > 0) || radius >= box_length / 4) bad("potential.radius", "must satisfy 0 < R < L/4");
    if (!(width > 0)) bad("initial.width", "must be positive");
    if (!(t_final > 0)) bad("time.t_final", "must be positive");
    if (!(dt > 0) || dt > 1e-2 + 1e-15) bad("time.dt", "must be in (0, 1e-2]");
    if (sample_stride < 1) bad("time.sample_stride", "must be >= 1");
    if (hartree_store_stride < 1) bad("time.hartree_store_stride", "must be >= 1");
    if (s_anchor < 0 || s_anchor >= t_final) bad("time.s_anchor", "must be in [0, t_final)");
    for (double t0 : t0_list)
        if (t0 < s_anchor || t0 > t_final) bad("time.t0_list", "entries must lie in [s_anchor, t_final]");
    if (transient < 0) bad("experiment.transient", "must be >= 0");
    if (window_lo < 0 || window_hi < 0) bad("fit.window", "must be >= 0");
    if (window_hi > 0 && window_lo >= window_hi) bad("fit.window", "window_lo must be < window_hi");
    if (fock_modes < 1 || fock_modes > 4) bad("fock.modes", "must be in [1, 4]");
    if (fock_n_max < 1 || fock_n_max > 20) bad("fock.n_max", "must be in [1, 20]");
    for (int c : fock_cutoff_list)
        if (c < 1 || c > 20) bad("fock.cutoff_list", "entries must be in [1, 20]");
    if (!(fock_t_final > 0)) bad("fock.t_final", "must be positive");
    if (!(fock_dt > 0)) bad("fock.dt", "must be positive");
    if (fock_source != "synthetic" && fock_source != "galerkin")
        bad("fock.source", "must be 'synthetic' or 'galerkin'");
    if (grid_doubling_points != 0 &&
        (grid_doubling_points < 8 || grid_doubling_points > 8192 ||
         (grid_doubling_points & (grid_doubling_points - 1)) != 0))
        bad("flow.grid_doubling_points", "must be a power of two in [8, 8192]");
}

} // namespace bogoflow
