#include "log2sig/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "log2sig/csv.hpp"
#include "log2sig/plots.hpp"
#include "log2sig/synth.hpp"
#include "log2sig/trainer.hpp"

namespace fs = std::filesystem;

namespace log2sig {

using detail::json;

ArtifactPaths ArtifactPaths::under(const std::string& out_dir) {
    ArtifactPaths p;
    p.sessions = (fs::path(out_dir) / "sessions.txt").string();
    p.freq_dir = (fs::path(out_dir) / "freq").string();
    p.decomp_dir = (fs::path(out_dir) / "decomp").string();
    p.checkpoint = (fs::path(out_dir) / "checkpoint.l2s").string();
    p.loss_history = (fs::path(out_dir) / "loss_history.csv").string();
    p.split_manifest = (fs::path(out_dir) / "split.json").string();
    p.resample_provenance = (fs::path(out_dir) / "resample_provenance.csv").string();
    p.metrics_json = (fs::path(out_dir) / "metrics.json").string();
    p.metrics_txt = (fs::path(out_dir) / "metrics.txt").string();
    p.report_dir = (fs::path(out_dir) / "report").string();
    return p;
}

namespace {

void require_artifact(const std::string& path, const std::string& producer) {
    if (!fs::exists(path)) {
        throw IoError("missing artifact '" + path + "'; run `log2sig " + producer + "` first");
    }
}

std::string meta_path(const std::string& decomp_csv) {
    return decomp_csv.substr(0, decomp_csv.size() - 4) + ".meta.json";
}

void write_decomp_meta(const std::string& path, const std::string& user, const ModeTensor& u,
                       const PipelineConfig& cfg) {
    json meta;
    meta["user"] = user;
    meta["omegas"] = u.omegas;
    meta["final_residual"] = u.final_residual;
    meta["iters_used"] = u.iters_used;
    meta["converged"] = u.converged;
    meta["config"] = {{"k", cfg.mvmd.K},
                      {"alpha", cfg.mvmd.alpha},
                      {"tol", cfg.mvmd.tol},
                      {"tau", cfg.mvmd.tau},
                      {"max_iters", cfg.mvmd.max_iters}};
    meta["fingerprint"] = config_fingerprint(cfg);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write decomposition metadata: " + path);
    out << meta.dump(2) << '\n';
}

std::vector<std::string> users_of(const std::vector<DaySession>& sessions) {
    std::set<std::string> set;
    for (const auto& s : sessions) set.insert(s.user);
    return {set.begin(), set.end()};
}

// Token bag over the raw vocabulary, used as the symbolic half of the
// resampling feature space.
std::vector<double> token_bag(const DaySample& sample, int vocab_tokens) {
    std::vector<double> bag(vocab_tokens, 0.0);
    for (std::int32_t tok : sample.tokens) {
        if (tok > 0) bag[tok - 1] += 1.0;
    }
    return bag;
}

struct TrainOutcome {
    TrainReport report;
    ModelParams<double> model;
};

template <typename T>
TrainOutcome train_typed(const PipelineConfig& cfg, const EncoderConfig& enc,
                         const std::vector<DaySample>& train_set) {
    Rng master(cfg.seed);
    Rng init_rng = master.derive("init");
    ModelParams<T> model = init_model<T>(enc, init_rng);
    TrainConfig tc = cfg.training;
    TrainOutcome out;
    out.report = train_model(model, train_set, tc, master.derive("train"));
    out.model = cast_model<T, double>(model);
    return out;
}

}  // namespace

std::string run_synth(const PipelineConfig& cfg) {
    const SynthOutput out = generate_synthetic(cfg.synth, cfg.vocabulary, cfg.input_dir);
    std::ostringstream line;
    line << "synth: " << out.total_events << " events for " << cfg.synth.n_users
         << " users over " << cfg.synth.n_days << " days; " << out.anomalous_days
         << " anomalous days across " << out.anomalous_users.size() << " users -> "
         << cfg.input_dir;
    return line.str();
}

std::string run_ingest(const PipelineConfig& cfg) {
    const ArtifactPaths paths = ArtifactPaths::under(cfg.output_dir);
    fs::create_directories(cfg.output_dir);

    std::vector<RawEvent> events;
    std::size_t skipped = 0;
    for (int s = 0; s < kNumLogSources; ++s) {
        const LogSource source = LogSource(s);
        const std::string path =
            (fs::path(cfg.input_dir) / (std::string(source_name(source)) + ".csv")).string();
        if (!fs::exists(path)) {
            throw IoError("missing log file '" + path +
                          "'; run `log2sig synth` or point paths.input_dir at CERT-style logs");
        }
        ParsedLog parsed = parse_log_file(path, source);
        skipped += parsed.skipped_rows;
        events.insert(events.end(), std::make_move_iterator(parsed.events.begin()),
                      std::make_move_iterator(parsed.events.end()));
    }
    const LabelSet labels = load_labels(cfg.labels_path());
    const std::vector<DaySession> sessions =
        build_sessions(events, cfg.vocabulary, labels, cfg.tz_offset_minutes);
    write_sessions_file(paths.sessions, sessions, cfg.vocabulary);

    std::size_t anomalous = 0;
    for (const auto& s : sessions) anomalous += s.label;
    std::ostringstream line;
    line << "ingest: " << events.size() << " events (" << skipped << " rows skipped) -> "
         << sessions.size() << " sessions (" << anomalous << " anomalous) across "
         << users_of(sessions).size() << " users -> " << paths.sessions;
    return line.str();
}

std::string run_decompose(const PipelineConfig& cfg) {
    const ArtifactPaths paths = ArtifactPaths::under(cfg.output_dir);
    require_artifact(paths.sessions, "ingest");
    const std::vector<DaySession> sessions =
        read_sessions_file(paths.sessions, cfg.vocabulary);
    if (sessions.empty()) throw SchemaError("decompose: sessions file is empty");

    Day lo = sessions.front().day, hi = sessions.front().day;
    for (const auto& s : sessions) {
        lo = std::min(lo, s.day);
        hi = std::max(hi, s.day);
    }

    fs::create_directories(paths.freq_dir);
    fs::create_directories(paths.decomp_dir);

    const std::vector<std::string> users = users_of(sessions);
    double worst_residual = 0.0;
    int not_converged = 0;
    for (const auto& user : users) {
        std::vector<DaySession> mine;
        for (const auto& s : sessions) {
            if (s.user == user) mine.push_back(s);
        }
        FrequencyMatrix f = build_frequency_matrix(mine, cfg.vocabulary, lo, hi);
        if (cfg.normalize == NormalizeMode::ZscorePerChannel) {
            f.values = normalize(f, cfg.normalize).values;
        }
        write_frequency_csv_file((fs::path(paths.freq_dir) / (user + ".csv")).string(), f,
                                 cfg.vocabulary.channel_names());

        MvmdConfig mv = cfg.mvmd;
        mv.seed = Rng(cfg.seed).derive("mvmd").next_u64();
        const ModeTensor u = decompose(f.values, mv);
        const std::string csv = (fs::path(paths.decomp_dir) / (user + ".csv")).string();
        write_mode_tensor_csv_file(csv, u, f.start_day);
        write_decomp_meta(meta_path(csv), user, u, cfg);
        worst_residual = std::max(worst_residual, u.final_residual);
        not_converged += u.converged ? 0 : 1;
    }
    std::ostringstream line;
    line << "decompose: " << users.size() << " users, K=" << cfg.mvmd.K
         << ", alpha=" << cfg.mvmd.alpha << ", worst residual " << worst_residual << ", "
         << not_converged << " non-converged -> " << paths.decomp_dir;
    return line.str();
}

std::string run_decompose_matrix(const PipelineConfig& cfg, const std::string& matrix_csv,
                                 const std::string& name) {
    const ArtifactPaths paths = ArtifactPaths::under(cfg.output_dir);
    require_artifact(matrix_csv, "synth (or provide an existing frequency CSV)");
    fs::create_directories(paths.decomp_dir);

    const FrequencyMatrix f = read_frequency_csv_file(matrix_csv);
    MvmdConfig mv = cfg.mvmd;
    mv.seed = Rng(cfg.seed).derive("mvmd").next_u64();
    const ModeTensor u = decompose(f.values, mv);
    const std::string csv = (fs::path(paths.decomp_dir) / (name + ".csv")).string();
    write_mode_tensor_csv_file(csv, u, f.start_day);
    write_decomp_meta(meta_path(csv), name, u, cfg);

    std::ostringstream line;
    line << "decompose: matrix " << f.channels() << "x" << f.days() << " -> K=" << cfg.mvmd.K
         << " modes, omegas [";
    for (std::size_t k = 0; k < u.omegas.size(); ++k) {
        if (k) line << ", ";
        line << u.omegas[k];
    }
    line << "], residual " << u.final_residual << " -> " << csv;
    return line.str();
}

DatasetBundle load_dataset(const PipelineConfig& cfg) {
    const ArtifactPaths paths = ArtifactPaths::under(cfg.output_dir);
    require_artifact(paths.sessions, "ingest");

    DatasetBundle bundle;
    bundle.sessions = read_sessions_file(paths.sessions, cfg.vocabulary);
    if (bundle.sessions.empty()) throw SchemaError("dataset: sessions file is empty");

    for (const auto& user : users_of(bundle.sessions)) {
        const std::string f_csv = (fs::path(paths.freq_dir) / (user + ".csv")).string();
        const std::string d_csv = (fs::path(paths.decomp_dir) / (user + ".csv")).string();
        require_artifact(f_csv, "decompose");
        require_artifact(d_csv, "decompose");
        FrequencyMatrix f = read_frequency_csv_file(f_csv);
        f.user = user;
        ModeTensor u = read_mode_tensor_csv_file(d_csv);
        if (u.mode_count() != cfg.mvmd.K) {
            throw SchemaError("dataset: decomposition for '" + user + "' has K=" +
                              std::to_string(u.mode_count()) + ", config says K=" +
                              std::to_string(cfg.mvmd.K) + "; rerun `log2sig decompose`");
        }
        bundle.frequency.emplace(user, std::move(f));
        bundle.modes.emplace(user, std::move(u));
    }

    bundle.encoder =
        cfg.encoder_config(cfg.vocabulary.size(), cfg.vocabulary.channel_count());

    std::map<std::string, FusedSignal> fused;
    for (const auto& [user, f] : bundle.frequency) {
        fused.emplace(user, fuse(f, bundle.modes.at(user)));
    }
    bundle.samples.reserve(bundle.sessions.size());
    for (const auto& session : bundle.sessions) {
        const FusedSignal& z = fused.at(session.user);
        const int t = int(session.day - z.start_day);
        if (t < 0 || t >= z.days()) {
            throw RangeError("dataset: session day " + format_day(session.day) +
                             " outside decomposition range for user " + session.user);
        }
        std::vector<double> column(z.rows());
        for (int r = 0; r < z.rows(); ++r) column[r] = z.z(r, t);
        bundle.samples.push_back(make_day_sample(session, column, bundle.encoder));
    }
    return bundle;
}

void split_dataset(const PipelineConfig& cfg, const std::vector<DaySample>& samples,
                   std::vector<std::size_t>& train, std::vector<std::size_t>& test) {
    Rng rng = Rng(cfg.seed).derive("split-stage");
    if (!cfg.split_by_user) {
        std::vector<int> labels(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) labels[i] = samples[i].label;
        const SplitResult s = split(labels, cfg.train_fraction, rng);
        train = s.train;
        test = s.test;
        return;
    }
    // user-level split: a user is positive when any of their days is
    std::map<std::string, std::vector<std::size_t>> by_user;
    for (std::size_t i = 0; i < samples.size(); ++i) by_user[samples[i].user].push_back(i);
    std::vector<std::string> users;
    std::vector<int> user_labels;
    for (const auto& [user, idx] : by_user) {
        users.push_back(user);
        int label = 0;
        for (std::size_t i : idx) label |= samples[i].label;
        user_labels.push_back(label);
    }
    const SplitResult s = split(user_labels, cfg.train_fraction, rng);
    for (std::size_t ui : s.train) {
        const auto& idx = by_user.at(users[ui]);
        train.insert(train.end(), idx.begin(), idx.end());
    }
    for (std::size_t ui : s.test) {
        const auto& idx = by_user.at(users[ui]);
        test.insert(test.end(), idx.begin(), idx.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
}

std::vector<DaySample> resample_training_set(const PipelineConfig& cfg,
                                             const std::vector<DaySample>& samples,
                                             const std::vector<std::size_t>& train_idx,
                                             const std::string& provenance_csv_path) {
    const int p = int(samples.empty() ? 0 : samples.front().z.size());
    const int vocab_tokens = cfg.vocabulary.size();
    Matrix features(train_idx.size(), std::size_t(p + vocab_tokens));
    std::vector<int> labels(train_idx.size());
    for (std::size_t i = 0; i < train_idx.size(); ++i) {
        const DaySample& s = samples[train_idx[i]];
        for (int j = 0; j < p; ++j) features(i, j) = s.z[j];
        const std::vector<double> bag = token_bag(s, vocab_tokens);
        for (int j = 0; j < vocab_tokens; ++j) features(i, p + j) = bag[j];
        labels[i] = s.label;
    }

    ResampleConfig rc = cfg.resample;
    rc.seed = Rng(cfg.seed).derive("resample").next_u64();
    SmoteResult sm;
    try {
        sm = smote(features, labels, rc);
    } catch (const ResampleError&) {
        // degenerate training split (a single minority day): train unbalanced
        std::vector<DaySample> fallback;
        for (std::size_t i : train_idx) fallback.push_back(samples[i]);
        return fallback;
    }

    if (!provenance_csv_path.empty()) {
        std::ofstream prov(provenance_csv_path);
        if (!prov) throw IoError("cannot write provenance: " + provenance_csv_path);
        prov << "seed_index,neighbor_index,lambda\n";
        prov.precision(17);
        for (const auto& rec : sm.provenance) {
            prov << rec.seed_index << ',' << rec.neighbor_index << ',' << rec.lambda << '\n';
        }
    }

    const TomekResult tk = tomek_clean(sm.features, sm.labels);

    std::vector<DaySample> out;
    out.reserve(sm.labels.size());
    for (std::size_t i = 0; i < sm.labels.size(); ++i) {
        if (!tk.keep[i]) continue;
        if (!sm.synthetic[i]) {
            out.push_back(samples[train_idx[i]]);
            continue;
        }
        const SmoteProvenance& rec = sm.provenance[i - train_idx.size()];
        DaySample synth = samples[train_idx[rec.seed_index]];
        synth.label = sm.labels[i];
        for (int j = 0; j < p; ++j) synth.z[j] = sm.features(i, j);
        out.push_back(std::move(synth));
    }
    return out;
}

std::string run_train(const PipelineConfig& cfg) {
    const ArtifactPaths paths = ArtifactPaths::under(cfg.output_dir);
    const DatasetBundle bundle = load_dataset(cfg);

    std::vector<std::size_t> train_idx, test_idx;
    split_dataset(cfg, bundle.samples, train_idx, test_idx);
    const std::vector<DaySample> train_set =
        resample_training_set(cfg, bundle.samples, train_idx, paths.resample_provenance);

    TrainOutcome outcome;
    if (cfg.precision == "f64") {
        outcome = train_typed<double>(cfg, bundle.encoder, train_set);
    } else {
        outcome = train_typed<float>(cfg, bundle.encoder, train_set);
    }

    json extra;
    extra["seed"] = cfg.seed;
    extra["fingerprint"] = config_fingerprint(cfg);
    extra["precision"] = cfg.precision;
    extra["epochs_run"] = outcome.report.epochs_run;
    extra["final_loss"] =
        outcome.report.epoch_loss.empty() ? 0.0 : outcome.report.epoch_loss.back();
    save_checkpoint(paths.checkpoint, outcome.model, cfg.vocabulary, extra.dump());

    {
        std::ofstream loss(paths.loss_history);
        if (!loss) throw IoError("cannot write loss history: " + paths.loss_history);
        loss << "epoch,mean_bce\n";
        loss.precision(17);
        for (std::size_t e = 0; e < outcome.report.epoch_loss.size(); ++e) {
            loss << e << ',' << outcome.report.epoch_loss[e] << '\n';
        }
    }
    {
        json manifest;
        manifest["seed"] = cfg.seed;
        manifest["fingerprint"] = config_fingerprint(cfg);
        json test = json::array();
        for (std::size_t i : test_idx) {
            test.push_back({{"user", bundle.samples[i].user},
                            {"date", format_day(bundle.samples[i].day)}});
        }
        manifest["test"] = test;
        manifest["train_size"] = train_idx.size();
        manifest["resampled_train_size"] = train_set.size();
        std::ofstream out(paths.split_manifest);
        if (!out) throw IoError("cannot write split manifest: " + paths.split_manifest);
        out << manifest.dump(2) << '\n';
    }

    std::ostringstream line;
    line << "train: " << train_idx.size() << " train days (+"
         << (train_set.size() - train_idx.size()) << " net resampled), " << test_idx.size()
         << " held out; " << outcome.report.epochs_run << " epochs, final loss "
         << (outcome.report.epoch_loss.empty() ? 0.0 : outcome.report.epoch_loss.back());
    if (!outcome.report.warnings.empty()) {
        line << "; " << outcome.report.warnings.size() << " warnings";
    }
    line << " -> " << paths.checkpoint;
    return line.str();
}

std::string run_eval(const PipelineConfig& cfg, MetricReport* out_report) {
    const ArtifactPaths paths = ArtifactPaths::under(cfg.output_dir);
    require_artifact(paths.checkpoint, "train");
    require_artifact(paths.split_manifest, "train");

    const LoadedCheckpoint ckpt = load_checkpoint(paths.checkpoint);
    const DatasetBundle bundle = load_dataset(cfg);

    std::ifstream manifest_in(paths.split_manifest);
    json manifest;
    manifest_in >> manifest;
    std::set<std::pair<std::string, Day>> test_keys;
    for (const auto& entry : manifest.at("test")) {
        test_keys.emplace(entry.at("user").get<std::string>(),
                          parse_day(entry.at("date").get<std::string>()));
    }

    std::vector<const DaySample*> test;
    for (const auto& s : bundle.samples) {
        if (test_keys.count({s.user, s.day})) test.push_back(&s);
    }
    if (test.empty()) throw SchemaError("eval: no test samples matched the split manifest");

    ModelParams<double> model = ckpt.model;
    BatchRunner<double> runner(cfg.training.n_threads);
    std::vector<double> predictions;
    predictions.reserve(test.size());
    const std::vector<std::uint64_t> no_seeds;
    for (std::size_t start = 0; start < test.size(); start += 256) {
        const std::size_t end = std::min(test.size(), start + 256);
        std::vector<const DaySample*> chunk(test.begin() + start, test.begin() + end);
        std::vector<double> probs;
        (void)runner.forward_loss(chunk, model, false, no_seeds, &probs);
        predictions.insert(predictions.end(), probs.begin(), probs.end());
    }

    std::vector<int> labels(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) labels[i] = test[i]->label;
    const MetricReport report = compute_metrics(predictions, labels, cfg.threshold);
    if (out_report) *out_report = report;

    json out;
    out["recall"] = report.recall;
    out["precision"] = report.precision;
    out["accuracy"] = report.accuracy;
    out["f1"] = report.f1;
    out["threshold"] = report.threshold;
    out["counts"] = {{"tp", report.counts.tp},
                     {"tn", report.counts.tn},
                     {"fp", report.counts.fp},
                     {"fn", report.counts.fn}};
    out["degenerate"] = {{"recall", report.recall_degenerate},
                         {"precision", report.precision_degenerate},
                         {"f1", report.f1_degenerate}};
    out["seed"] = cfg.seed;
    out["fingerprint"] = config_fingerprint(cfg);
    out["test_size"] = test.size();
    {
        std::ofstream js(paths.metrics_json);
        if (!js) throw IoError("cannot write metrics: " + paths.metrics_json);
        js << out.dump(2) << '\n';
    }
    {
        std::ofstream txt(paths.metrics_txt);
        if (!txt) throw IoError("cannot write metrics table: " + paths.metrics_txt);
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-10s %7s %7s %7s %7s\n", "Method", "Rec", "Prec",
                      "Acc", "F1");
        txt << buf;
        std::snprintf(buf, sizeof buf, "%-10s %7.3f %7.3f %7.3f %7.3f\n", "Log2Sig",
                      report.recall, report.precision, report.accuracy, report.f1);
        txt << buf;
    }

    std::ostringstream line;
    line.precision(4);
    line << "eval: " << test.size() << " test days @ threshold " << cfg.threshold << ": Rec "
         << report.recall << ", Prec " << report.precision << ", Acc " << report.accuracy
         << ", F1 " << report.f1 << " -> " << paths.metrics_json;
    return line.str();
}

std::string run_report(const PipelineConfig& cfg) {
    const ArtifactPaths paths = ArtifactPaths::under(cfg.output_dir);
    fs::create_directories(paths.report_dir);

    int artifacts = 0;
    // loss curve
    if (fs::exists(paths.loss_history)) {
        std::ifstream in(paths.loss_history);
        std::string line;
        std::getline(in, line);
        PlotSeries series;
        series.label = "mean BCE";
        while (std::getline(in, line)) {
            const auto f = split_csv_line(line);
            if (f.size() == 2) series.values.push_back(std::stod(f[1]));
        }
        write_plot_svg((fs::path(paths.report_dir) / "loss.svg").string(), "Training loss",
                       {{"per-epoch mean BCE", {series}}});
        ++artifacts;
    }

    // decomposition panels for the busiest user
    if (fs::exists(paths.freq_dir) && fs::exists(paths.decomp_dir)) {
        std::string best_user;
        double best_mass = -1.0;
        for (const auto& entry : fs::directory_iterator(paths.freq_dir)) {
            if (entry.path().extension() != ".csv") continue;
            const FrequencyMatrix f = read_frequency_csv_file(entry.path().string());
            double mass = 0.0;
            for (double v : f.values.data) mass += std::fabs(v);
            if (mass > best_mass) {
                best_mass = mass;
                best_user = entry.path().stem().string();
            }
        }
        if (!best_user.empty()) {
            const FrequencyMatrix f = read_frequency_csv_file(
                (fs::path(paths.freq_dir) / (best_user + ".csv")).string());
            const ModeTensor u = read_mode_tensor_csv_file(
                (fs::path(paths.decomp_dir) / (best_user + ".csv")).string());
            std::vector<PlotPanel> panels;
            PlotPanel original;
            original.title = "original frequency signal (" + best_user + ")";
            const auto& names = cfg.vocabulary.channel_names();
            for (int c = 0; c < f.channels(); ++c) {
                PlotSeries s;
                s.label = c < int(names.size()) ? names[c] : "ch" + std::to_string(c);
                s.values.assign(f.values.row(c), f.values.row(c) + f.days());
                original.series.push_back(std::move(s));
            }
            panels.push_back(std::move(original));
            for (int k = 0; k < u.mode_count(); ++k) {
                PlotPanel panel;
                std::ostringstream t;
                t.precision(4);
                t << "mode " << (k + 1) << " (omega " << u.omegas[k] << " cycles/day)";
                panel.title = t.str();
                for (int c = 0; c < u.channels(); ++c) {
                    PlotSeries s;
                    s.label = c < int(names.size()) ? names[c] : "ch" + std::to_string(c);
                    s.values.assign(u.modes[k].row(c), u.modes[k].row(c) + u.samples());
                    panel.series.push_back(std::move(s));
                }
                panels.push_back(std::move(panel));
            }
            write_plot_svg((fs::path(paths.report_dir) / ("decomposition_" + best_user + ".svg"))
                               .string(),
                           "MVMD decomposition", panels);
            ++artifacts;
        }
    }

    // metrics table
    if (fs::exists(paths.metrics_json)) {
        std::ifstream in(paths.metrics_json);
        json metrics;
        in >> metrics;
        std::ofstream csv((fs::path(paths.report_dir) / "metrics.csv").string());
        csv << "method,recall,precision,accuracy,f1\n";
        csv.precision(12);
        csv << "log2sig," << metrics.at("recall").get<double>() << ','
            << metrics.at("precision").get<double>() << ','
            << metrics.at("accuracy").get<double>() << ',' << metrics.at("f1").get<double>()
            << '\n';
        ++artifacts;
    }

    if (artifacts == 0) {
        throw IoError("report: no artifacts found under '" + cfg.output_dir +
                      "'; run `log2sig train` and `log2sig eval` first");
    }
    std::ostringstream line;
    line << "report: wrote " << artifacts << " artifact group(s) -> " << paths.report_dir;
    return line.str();
}

}  // namespace log2sig
