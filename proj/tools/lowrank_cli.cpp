// Command-line harness for the adaptive low-rank completion / approximation
// experiments. Subcommands mirror the experiment kinds; `gen` writes
// synthetic instances to disk and `report` summarizes a raw results CSV.

#include <CLI11.hpp>

#include <iostream>

#include "lowrank/harness/experiments.hpp"
#include "lowrank/harness/matrix_io.hpp"

namespace lh = lowrank::harness;
using lowrank::Index;

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out;
    long long seed = -1;
    int trials = -1;
    int threads = -1;
    bool no_plots = false;
};

void add_common_options(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config_path, "Config file (key = value lines, [grid.*] sections)");
    cmd->add_option("--set", args.overrides, "Override a config key, e.g. --set grid.m=\"20 40 80\"")
        ->take_all();
    cmd->add_option("-o,--out", args.out, "Output CSV path (relative paths land under $LOWRANK_OUT_DIR)");
    cmd->add_option("--seed", args.seed, "Base seed");
    cmd->add_option("--trials", args.trials, "Trials per grid point");
    cmd->add_option("--threads", args.threads, "Worker threads (default: $LOWRANK_THREADS or hardware)");
    cmd->add_flag("--no-plots", args.no_plots, "Skip emitting plot scripts");
}

lh::ExperimentConfig build_config(const CommonArgs& args, lh::ExperimentKind kind) {
    lh::ExperimentConfig cfg;
    if (!args.config_path.empty())
        cfg = lh::parse_config_file(args.config_path, kind);
    else
        cfg.kind = kind;
    if (cfg.kind != kind && cfg.kind != lh::ExperimentKind::SingleRun)
        cfg.kind = kind;
    for (const std::string& kv : args.overrides) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
        lh::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!args.out.empty()) cfg.out = args.out;
    if (args.seed >= 0) cfg.seed = static_cast<uint64_t>(args.seed);
    if (args.trials > 0) cfg.trials = args.trials;
    if (args.threads > 0) cfg.threads = args.threads;
    if (args.no_plots) cfg.emit_plots = false;
    return cfg;
}

int run_kind(const CommonArgs& args, lh::ExperimentKind kind) {
    const lh::ExperimentConfig cfg = build_config(args, kind);
    const lh::SweepOutput out =
        cfg.kind == lh::ExperimentKind::SingleRun ? lh::run_single(cfg) : lh::run_experiment(cfg);
    std::cout << "raw: " << out.raw_csv << "\n";
    if (out.agg_csv != out.raw_csv) std::cout << "agg: " << out.agg_csv << "\n";
    for (const auto& script : out.plot_scripts) std::cout << "plot: " << script << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lowrank: adaptive-sampling experiments for exact matrix completion and "
                 "low-rank approximation from few entries"};
    app.require_subcommand(1);

    CommonArgs complete_args, approx_args, bounds_args, lower_args;
    auto* cmd_complete =
        app.add_subcommand("complete", "Completion success sweeps / threshold location");
    add_common_options(cmd_complete, complete_args);
    auto* cmd_approx = app.add_subcommand("approx", "Adaptive vs passive approximation sweeps");
    add_common_options(cmd_approx, approx_args);
    auto* cmd_bounds =
        app.add_subcommand("validate-bounds", "Monte Carlo coverage of the projection bounds");
    add_common_options(cmd_bounds, bounds_args);
    auto* cmd_lower =
        app.add_subcommand("lowerbound", "Adaptive vs passive sampling on the hard family");
    add_common_options(cmd_lower, lower_args);

    // gen: write one synthetic instance to disk.
    auto* cmd_gen = app.add_subcommand("gen", "Generate a synthetic instance and write it to disk");
    struct {
        long long d = 0, n = 500, r = 10;
        double mu0 = 1.0, noise = 0.0;
        std::string row_mode = "gaussian", norm_mode = "constant", format = "text";
        std::string out = "instance.mtx", truth_out;
        long long seed = 1;
        bool hard_family = false;
    } gen;
    cmd_gen->add_option("--d", gen.d, "Rows (default: n)");
    cmd_gen->add_option("--n", gen.n, "Columns");
    cmd_gen->add_option("--r", gen.r, "Rank");
    cmd_gen->add_option("--mu0", gen.mu0, "Column-space coherence target");
    cmd_gen->add_option("--row-mode", gen.row_mode, "gaussian | rademacher | basis");
    cmd_gen->add_option("--norm-mode", gen.norm_mode, "constant | uniform | lognormal");
    cmd_gen->add_option("--noise-sigma", gen.noise, "Noise scale (entry variance sigma^2/(d*n))");
    cmd_gen->add_option("--seed", gen.seed, "Seed");
    cmd_gen->add_option("--format", gen.format, "text | binary");
    cmd_gen->add_option("-o,--out", gen.out, "Output matrix path");
    cmd_gen->add_option("--truth-out", gen.truth_out, "Also write the noiseless low-rank part here");
    cmd_gen->add_flag("--hard-family", gen.hard_family,
                      "Generate the hidden-column adversarial family instead");

    auto* cmd_report = app.add_subcommand("report", "Summarize a raw results CSV");
    std::string report_path;
    cmd_report->add_option("csv", report_path, "Raw CSV produced by a sweep")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_complete->parsed()) return run_kind(complete_args, lh::ExperimentKind::CompleteSweep);
        if (cmd_approx->parsed()) return run_kind(approx_args, lh::ExperimentKind::ApproxSweep);
        if (cmd_bounds->parsed()) return run_kind(bounds_args, lh::ExperimentKind::BoundsValidate);
        if (cmd_lower->parsed()) return run_kind(lower_args, lh::ExperimentKind::LowerboundDemo);
        if (cmd_gen->parsed()) {
            lowrank::Rng rng(static_cast<uint64_t>(gen.seed));
            lowrank::GeneratedInstance inst;
            const Index d = gen.d > 0 ? static_cast<Index>(gen.d) : static_cast<Index>(gen.n);
            if (gen.hard_family) {
                inst = lowrank::make_lower_bound_instance(d, static_cast<Index>(gen.n),
                                                          static_cast<Index>(gen.r), gen.mu0, rng);
            } else {
                lowrank::InstanceSpec spec{d,
                                           static_cast<Index>(gen.n),
                                           static_cast<Index>(gen.r),
                                           gen.mu0,
                                           lh::parse_row_mode(gen.row_mode),
                                           lh::parse_norm_mode(gen.norm_mode),
                                           gen.noise};
                inst = lowrank::make_low_rank(spec, rng);
            }
            const std::string out_path = lh::resolve_out_path(gen.out);
            if (gen.format == "binary")
                lh::write_matrix_binary(out_path, inst.matrix);
            else if (gen.format == "text")
                lh::write_matrix_text(out_path, inst.matrix);
            else
                throw std::invalid_argument("gen: format must be text or binary");
            if (!gen.truth_out.empty()) {
                const std::string truth_path = lh::resolve_out_path(gen.truth_out);
                if (gen.format == "binary")
                    lh::write_matrix_binary(truth_path, inst.low_rank_part);
                else
                    lh::write_matrix_text(truth_path, inst.low_rank_part);
            }
            std::cout << "wrote " << out_path << " (d=" << inst.matrix.rows()
                      << ", n=" << inst.matrix.cols() << ", rank=" << inst.true_rank
                      << ", mu0=" << inst.realized_mu0 << ", column_mu=" << inst.realized_column_mu
                      << ")\n";
            return 0;
        }
        if (cmd_report->parsed()) {
            std::cout << lh::summarize_raw_csv(report_path);
            return 0;
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
