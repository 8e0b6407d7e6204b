#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "log2sig/nn/gemm.hpp"
#include "log2sig/pipeline.hpp"

namespace {

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    bool split_by_user = false;
    std::optional<double> threshold;
};

log2sig::PipelineConfig resolve_config(const GlobalOptions& opts) {
    log2sig::PipelineConfig cfg;
    if (!opts.config_path.empty()) cfg = log2sig::load_config(opts.config_path);
    if (opts.seed) {
        cfg.seed = *opts.seed;
        cfg.synth.seed = *opts.seed;
    }
    if (opts.out_dir) cfg.output_dir = *opts.out_dir;
    if (opts.split_by_user) cfg.split_by_user = true;
    if (opts.threshold) cfg.threshold = *opts.threshold;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    log2sig::nn::ensure_fast_blas(argv);
    log2sig::nn::configure_blas_single_thread();

    CLI::App app{"Log2Sig: frequency-aware insider threat detection pipeline"};
    app.require_subcommand(1);

    GlobalOptions opts;
    app.add_option("--config", opts.config_path, "Pipeline config (JSON)")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", opts.seed, "Override the master seed");
    app.add_option("--out", opts.out_dir, "Override paths.output_dir");
    app.add_flag("--split-by-user", opts.split_by_user,
                 "Leakage-free split: whole users held out");
    app.add_option("--threshold", opts.threshold, "Decision threshold for eval");

    auto* synth = app.add_subcommand("synth", "Generate CERT-style synthetic logs");
    auto* ingest = app.add_subcommand("ingest", "Parse logs into per-user day sessions");
    auto* decompose = app.add_subcommand("decompose", "Build frequency matrices and run MVMD");
    std::string from_matrix, matrix_name = "matrix";
    decompose->add_option("--from-matrix", from_matrix,
                          "Decompose a frequency-matrix CSV directly");
    decompose->add_option("--name", matrix_name, "Artifact name for --from-matrix");
    auto* train = app.add_subcommand("train", "Resample, then train the detector");
    auto* eval = app.add_subcommand("eval", "Score the held-out split");
    auto* report = app.add_subcommand("report", "Render plots and the metrics table");
    for (auto* sub : {synth, ingest, decompose, train, eval, report}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        const log2sig::PipelineConfig cfg = resolve_config(opts);
        std::string line;
        if (synth->parsed()) line = log2sig::run_synth(cfg);
        else if (ingest->parsed()) line = log2sig::run_ingest(cfg);
        else if (decompose->parsed()) {
            line = from_matrix.empty()
                       ? log2sig::run_decompose(cfg)
                       : log2sig::run_decompose_matrix(cfg, from_matrix, matrix_name);
        } else if (train->parsed()) line = log2sig::run_train(cfg);
        else if (eval->parsed()) line = log2sig::run_eval(cfg);
        else if (report->parsed()) line = log2sig::run_report(cfg);
        std::cout << line << '\n';
        return 0;
    } catch (const log2sig::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const log2sig::NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        // IO, schema, range, classification, resample, dimension: data errors
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
