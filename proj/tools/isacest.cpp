// Command-line front end for the experiment harness.

#include "isacest/isacest.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> profile;
    bool skip_dnn = false;
    bool plot = false;
    bool quiet = false;
};

isacest::ExperimentConfig resolve(const Options& o) {
    auto cfg = o.config.empty() ? isacest::make_profile(o.profile.value_or("desk"))
                                : isacest::load_config(o.config, o.profile);
    if (o.seed) cfg.seed = *o.seed;
    if (o.out) cfg.out_dir = *o.out;
    cfg.threads = isacest::default_thread_count();
    cfg.validate();
    return cfg;
}

void emit(const isacest::SweepResult& res, const isacest::ExperimentConfig& cfg, const std::string& name,
          const std::string& title, bool plot, const isacest::Log& log) {
    std::filesystem::create_directories(cfg.out_dir);
    const auto csv = std::filesystem::path(cfg.out_dir) / (name + ".csv");
    isacest::write_csv(res, csv);
    if (log) log("wrote " + csv.string());
    if (plot) {
        const auto svg = std::filesystem::path(cfg.out_dir) / (name + ".svg");
        isacest::write_svg_plot(res, svg, title);
        if (log) log("wrote " + svg.string());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deep-learning channel estimation for IRS-assisted ISAC: simulation, training and evaluation"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Experiment config file (key = value)")->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Master seed (overrides config)");
        sub->add_option("--out", o.out, "Output directory (overrides config)");
        sub->add_option("--profile", o.profile, "Base profile")->check(CLI::IsMember({"desk", "paper"}));
        sub->add_flag("--quiet,-q", o.quiet, "Suppress progress output");
    };
    auto* gen = app.add_subcommand("generate", "Generate training and test datasets");
    auto* trn = app.add_subcommand("train", "Train SE-DNN and CE-DNN on generated datasets");
    auto* evl = app.add_subcommand("eval", "NMSE versus SNR for LS and the trained networks");
    auto* swl = app.add_subcommand("sweep-l", "CE-DNN and LS NMSE versus IRS size L");
    auto* swm = app.add_subcommand("sweep-m", "SE-DNN/CE-DNN and LS NMSE versus antenna count M");
    for (auto* s : {gen, trn, evl, swl, swm}) add_common(s);
    for (auto* s : {evl, swl, swm}) {
        s->add_flag("--skip-dnn", o.skip_dnn, "Only evaluate the LS benchmark");
        s->add_flag("--plot", o.plot, "Also write an SVG line chart next to the CSV");
    }

    CLI11_PARSE(app, argc, argv);

    const isacest::Log log = [&o](const std::string& msg) {
        if (!o.quiet) std::cerr << msg << '\n';
    };
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const auto cfg = resolve(o);
        if (gen->parsed()) {
            isacest::cmd_generate(cfg, log);
        } else if (trn->parsed()) {
            isacest::cmd_train(cfg, log);
        } else if (evl->parsed()) {
            emit(isacest::cmd_eval(cfg, o.skip_dnn, log), cfg, "nmse_vs_snr", "NMSE vs SNR", o.plot, log);
        } else if (swl->parsed()) {
            emit(isacest::cmd_sweep_l(cfg, o.skip_dnn, log), cfg, "nmse_vs_L", "Communication NMSE vs L", o.plot, log);
        } else if (swm->parsed()) {
            isacest::SweepOptions so;
            so.skip_dnn = o.skip_dnn;
            emit(isacest::cmd_sweep_m(cfg, so, log), cfg, "nmse_vs_M", "NMSE vs M", o.plot, log);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log("done in " + std::to_string(secs) + " s");
    return 0;
}
