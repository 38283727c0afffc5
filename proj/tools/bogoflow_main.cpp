#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "bogoflow/config.hpp"
#include "bogoflow/harness.hpp"

namespace {

struct SubArgs {
    std::string config;
    std::string out;
};

void add_sub(CLI::App& app, const std::string& name, const std::string& desc, SubArgs& args,
             CLI::App** handle) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", args.config, "experiment config file")->required();
    sub->add_option("--out", args.out, "output directory")->required();
    *handle = sub;
}

bool kind_allowed(const std::string& sub, bogoflow::ExperimentKind kind) {
    using K = bogoflow::ExperimentKind;
    if (sub == "hartree") return kind == K::hartree_decay;
    if (sub == "kernels") return kind == K::kernel_decay;
    if (sub == "flow")
        return kind == K::sigma_dispersion || kind == K::eta_bound || kind == K::free_comparison;
    if (sub == "oracle") return kind == K::fock_oracle;
    if (sub == "certify") return kind == K::certificates;
    return true;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral Hartree / Bogoliubov kernel dynamics verification harness"};
    app.require_subcommand(1);

    SubArgs args;
    CLI::App* subs[6];
    add_sub(app, "hartree", "condensate evolution and dispersive diagnostics", args, &subs[0]);
    add_sub(app, "flow", "symplectic pair-kernel flow experiments", args, &subs[1]);
    add_sub(app, "kernels", "interaction-kernel norms and bound certificates", args, &subs[2]);
    add_sub(app, "oracle", "truncated Fock-space oracle checks", args, &subs[3]);
    add_sub(app, "fit", "power-law decay fit of a CSV series", args, &subs[4]);
    add_sub(app, "certify", "Gronwall bound certificates along a flow", args, &subs[5]);

    CLI11_PARSE(app, argc, argv);

    const std::string sub = app.get_subcommands().front()->get_name();
    try {
        bogoflow::ExperimentConfig cfg = bogoflow::parse_config_file(args.config);
        bogoflow::ExperimentResult res;
        if (sub == "fit") {
            res = bogoflow::run_fit_file(cfg, args.out);
        } else {
            if (!kind_allowed(sub, cfg.kind)) {
                std::fprintf(stderr, "error: config field `experiment.kind`: '%s' does not belong to subcommand '%s'\n",
                             bogoflow::to_string(cfg.kind).c_str(), sub.c_str());
                return 2;
            }
            res = bogoflow::run_experiment(cfg, args.out);
        }
        for (const auto& line : res.lines) std::printf("%s\n", line.c_str());
        std::printf("certificates: %s\n", res.certificates_pass ? "pass" : "FAIL");
        std::printf("outputs: %s\n", res.out_dir.c_str());
        return res.certificates_pass ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
