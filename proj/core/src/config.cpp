#include "log2sig/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json_util.hpp"

namespace log2sig {

using detail::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config: " + path + ": " + what);
}

void expect_keys(const json& obj, const std::string& path,
                 const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key)) {
            fail(path.empty() ? key : path + "." + key, "unknown key");
        }
    }
}

template <typename T>
T get_or(const json& obj, const std::string& path, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail(path.empty() ? key : path + "." + std::string(key), "wrong type");
    }
}

MvmdConfig::Init parse_init(const std::string& s, const std::string& path) {
    if (s == "zeros") return MvmdConfig::Init::Zeros;
    if (s == "uniform") return MvmdConfig::Init::Uniform;
    if (s == "random") return MvmdConfig::Init::Random;
    fail(path, "init must be zeros|uniform|random");
}

MvmdConfig::Boundary parse_boundary(const std::string& s, const std::string& path) {
    if (s == "ar_forecast") return MvmdConfig::Boundary::ArForecast;
    if (s == "mirror") return MvmdConfig::Boundary::Mirror;
    fail(path, "boundary must be ar_forecast|mirror");
}

const char* init_name(MvmdConfig::Init i) {
    switch (i) {
        case MvmdConfig::Init::Zeros: return "zeros";
        case MvmdConfig::Init::Uniform: return "uniform";
        case MvmdConfig::Init::Random: return "random";
    }
    return "zeros";
}

const char* boundary_name(MvmdConfig::Boundary b) {
    return b == MvmdConfig::Boundary::Mirror ? "mirror" : "ar_forecast";
}

}  // namespace

EncoderConfig PipelineConfig::encoder_config(int vocab_tokens, int channels) const {
    EncoderConfig e;
    e.d = d;
    e.n_layers = n_layers;
    e.l_max = l_max;
    e.vocab_size = vocab_tokens + 1;  // reserved pad slot
    e.k_modes = mvmd.K;
    e.channels = channels;
    e.residual = residual;
    e.comp_full_affine = comp_full_affine;
    e.mlp_hidden = mlp_hidden;
    e.dropout = dropout;
    e.leaky_slope = leaky_slope;
    return e;
}

void PipelineConfig::validate() const {
    mvmd.validate();
    resample.validate();
    if (precision != "f32" && precision != "f64") {
        throw ConfigError("config: training.precision must be f32|f64");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("config: split.train_fraction must be in (0,1)");
    }
    if (threshold < 0.0 || threshold > 1.0) {
        throw ConfigError("config: eval.threshold must be in [0,1]");
    }
    if (training.epochs < 0 || training.batch_size < 1 || training.n_threads < 1) {
        throw ConfigError("config: bad training block");
    }
    EncoderConfig probe = encoder_config(vocabulary.size(), vocabulary.channel_count());
    probe.validate();
}

PipelineConfig parse_config(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset -> line:column for the error message
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("config: " + origin + ":" + std::to_string(line) + ":" +
                          std::to_string(col) + ": " + e.what());
    }
    if (!root.is_object()) throw ConfigError("config: " + origin + ": top level must be an object");

    PipelineConfig cfg;
    expect_keys(root, "",
                {"seed", "paths", "timezone_offset_minutes", "vocabulary", "normalize", "mvmd",
                 "encoder", "mlp", "training", "resample", "split", "eval", "synth"});

    cfg.seed = get_or<std::uint64_t>(root, "", "seed", cfg.seed);
    cfg.tz_offset_minutes = get_or<int>(root, "", "timezone_offset_minutes", 0);

    if (root.contains("paths")) {
        const json& p = root["paths"];
        expect_keys(p, "paths", {"input_dir", "output_dir", "labels_file"});
        cfg.input_dir = get_or<std::string>(p, "paths", "input_dir", cfg.input_dir);
        cfg.output_dir = get_or<std::string>(p, "paths", "output_dir", cfg.output_dir);
        cfg.labels_file = get_or<std::string>(p, "paths", "labels_file", cfg.labels_file);
    }

    if (root.contains("vocabulary")) {
        const json& v = root["vocabulary"];
        expect_keys(v, "vocabulary",
                    {"tokens", "channel_names", "split_http_after_hours", "other_token"});
        if (v.contains("tokens")) {
            try {
                cfg.vocabulary = detail::vocab_from_json(v);
            } catch (const json::exception& e) {
                fail("vocabulary", e.what());
            }
        } else {
            const bool split = get_or<bool>(v, "vocabulary", "split_http_after_hours", true);
            const std::string other =
                get_or<std::string>(v, "vocabulary", "other_token", std::string{});
            auto def = BehaviorVocabulary::default_vocabulary();
            std::vector<VocabToken> toks = def.tokens();
            std::vector<std::string> names = def.channel_names();
            if (!other.empty()) {
                toks.push_back({other, def.channel_count()});
                names.push_back("other");
            }
            cfg.vocabulary = BehaviorVocabulary::create(toks, names, split, other);
        }
    }

    if (root.contains("normalize")) {
        const std::string mode = root["normalize"].get<std::string>();
        if (mode == "none") cfg.normalize = NormalizeMode::None;
        else if (mode == "zscore_per_channel") cfg.normalize = NormalizeMode::ZscorePerChannel;
        else fail("normalize", "must be none|zscore_per_channel");
    }

    if (root.contains("mvmd")) {
        const json& m = root["mvmd"];
        expect_keys(m, "mvmd", {"k", "alpha", "tol", "tau", "max_iters", "init", "boundary"});
        cfg.mvmd.K = get_or<int>(m, "mvmd", "k", cfg.mvmd.K);
        cfg.mvmd.alpha = get_or<double>(m, "mvmd", "alpha", cfg.mvmd.alpha);
        cfg.mvmd.tol = get_or<double>(m, "mvmd", "tol", cfg.mvmd.tol);
        cfg.mvmd.tau = get_or<double>(m, "mvmd", "tau", cfg.mvmd.tau);
        cfg.mvmd.max_iters = get_or<int>(m, "mvmd", "max_iters", cfg.mvmd.max_iters);
        if (m.contains("init")) {
            cfg.mvmd.init = parse_init(m["init"].get<std::string>(), "mvmd.init");
        }
        if (m.contains("boundary")) {
            cfg.mvmd.boundary =
                parse_boundary(m["boundary"].get<std::string>(), "mvmd.boundary");
        }
    }

    if (root.contains("encoder")) {
        const json& e = root["encoder"];
        expect_keys(e, "encoder", {"d", "n_layers", "l_max", "residual", "comp_full_affine"});
        cfg.d = get_or<int>(e, "encoder", "d", cfg.d);
        cfg.n_layers = get_or<int>(e, "encoder", "n_layers", cfg.n_layers);
        cfg.l_max = get_or<int>(e, "encoder", "l_max", cfg.l_max);
        cfg.residual = get_or<bool>(e, "encoder", "residual", cfg.residual);
        cfg.comp_full_affine =
            get_or<bool>(e, "encoder", "comp_full_affine", cfg.comp_full_affine);
    }

    if (root.contains("mlp")) {
        const json& m = root["mlp"];
        expect_keys(m, "mlp", {"hidden", "dropout", "leaky_slope"});
        cfg.mlp_hidden = get_or<std::vector<int>>(m, "mlp", "hidden", cfg.mlp_hidden);
        cfg.dropout = get_or<double>(m, "mlp", "dropout", cfg.dropout);
        cfg.leaky_slope = get_or<double>(m, "mlp", "leaky_slope", cfg.leaky_slope);
    }

    if (root.contains("training")) {
        const json& t = root["training"];
        expect_keys(t, "training",
                    {"epochs", "batch_size", "learning_rate", "beta1", "beta2", "adam_eps",
                     "cosine_decay", "early_stop", "threads", "precision"});
        cfg.training.epochs = get_or<int>(t, "training", "epochs", cfg.training.epochs);
        cfg.training.batch_size =
            get_or<int>(t, "training", "batch_size", cfg.training.batch_size);
        cfg.training.lr = get_or<double>(t, "training", "learning_rate", cfg.training.lr);
        cfg.training.beta1 = get_or<double>(t, "training", "beta1", cfg.training.beta1);
        cfg.training.beta2 = get_or<double>(t, "training", "beta2", cfg.training.beta2);
        cfg.training.adam_eps = get_or<double>(t, "training", "adam_eps", cfg.training.adam_eps);
        cfg.training.cosine_decay =
            get_or<bool>(t, "training", "cosine_decay", cfg.training.cosine_decay);
        cfg.training.early_stop =
            get_or<bool>(t, "training", "early_stop", cfg.training.early_stop);
        cfg.training.n_threads = get_or<int>(t, "training", "threads", cfg.training.n_threads);
        cfg.precision = get_or<std::string>(t, "training", "precision", cfg.precision);
    }

    if (root.contains("resample")) {
        const json& r = root["resample"];
        expect_keys(r, "resample", {"target_ratio", "k_neighbors"});
        cfg.resample.target_ratio =
            get_or<double>(r, "resample", "target_ratio", cfg.resample.target_ratio);
        cfg.resample.k_neighbors =
            get_or<int>(r, "resample", "k_neighbors", cfg.resample.k_neighbors);
    }

    if (root.contains("split")) {
        const json& s = root["split"];
        expect_keys(s, "split", {"train_fraction", "by_user"});
        cfg.train_fraction = get_or<double>(s, "split", "train_fraction", cfg.train_fraction);
        cfg.split_by_user = get_or<bool>(s, "split", "by_user", cfg.split_by_user);
    }

    if (root.contains("eval")) {
        const json& e = root["eval"];
        expect_keys(e, "eval", {"threshold"});
        cfg.threshold = get_or<double>(e, "eval", "threshold", cfg.threshold);
    }

    if (root.contains("synth")) {
        const json& s = root["synth"];
        expect_keys(s, "synth",
                    {"n_users", "n_days", "start_date", "channel_rates", "weekend_factor",
                     "weekly_amplitude", "seed", "anomaly"});
        cfg.synth.n_users = get_or<int>(s, "synth", "n_users", cfg.synth.n_users);
        cfg.synth.n_days = get_or<int>(s, "synth", "n_days", cfg.synth.n_days);
        if (s.contains("start_date")) {
            cfg.synth.start_day = parse_day(s["start_date"].get<std::string>());
        }
        cfg.synth.weekend_factor =
            get_or<double>(s, "synth", "weekend_factor", cfg.synth.weekend_factor);
        cfg.synth.weekly_amplitude =
            get_or<double>(s, "synth", "weekly_amplitude", cfg.synth.weekly_amplitude);
        cfg.synth.seed = get_or<std::uint64_t>(s, "synth", "seed", cfg.seed);
        if (s.contains("channel_rates")) {
            cfg.synth.channel_rates.clear();
            for (const auto& [name, spec] : s["channel_rates"].items()) {
                expect_keys(spec, "synth.channel_rates." + name,
                            {"day_rate", "after_hours_rate"});
                ChannelRates rates;
                rates.day_rate = get_or<double>(spec, "synth.channel_rates." + name,
                                                "day_rate", 0.0);
                rates.after_hours_rate = get_or<double>(
                    spec, "synth.channel_rates." + name, "after_hours_rate", 0.0);
                cfg.synth.channel_rates[name] = rates;
            }
        }
        if (s.contains("anomaly")) {
            const json& a = s["anomaly"];
            expect_keys(a, "synth.anomaly",
                        {"n_users", "windows_per_user", "window_days",
                         "after_hours_multiplier", "day_rate_factor", "target_channels",
                         "burst_tokens"});
            auto& an = cfg.synth.anomaly;
            an.n_users = get_or<int>(a, "synth.anomaly", "n_users", an.n_users);
            an.windows_per_user =
                get_or<int>(a, "synth.anomaly", "windows_per_user", an.windows_per_user);
            an.window_days = get_or<int>(a, "synth.anomaly", "window_days", an.window_days);
            an.after_hours_multiplier = get_or<double>(a, "synth.anomaly",
                                                       "after_hours_multiplier",
                                                       an.after_hours_multiplier);
            an.day_rate_factor =
                get_or<double>(a, "synth.anomaly", "day_rate_factor", an.day_rate_factor);
            an.target_channels = get_or<std::vector<std::string>>(
                a, "synth.anomaly", "target_channels", an.target_channels);
            if (a.contains("burst_tokens")) {
                an.burst_tokens.clear();
                for (const auto& [token, count] : a["burst_tokens"].items()) {
                    an.burst_tokens[token] = count.get<int>();
                }
            }
        }
    } else {
        cfg.synth.seed = cfg.seed;
    }

    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path);
}

std::string dump_config(const PipelineConfig& cfg) {
    json root;
    root["seed"] = cfg.seed;
    root["paths"] = {{"input_dir", cfg.input_dir},
                     {"output_dir", cfg.output_dir},
                     {"labels_file", cfg.labels_file}};
    root["timezone_offset_minutes"] = cfg.tz_offset_minutes;
    root["vocabulary"] = detail::vocab_to_json(cfg.vocabulary);
    root["normalize"] =
        cfg.normalize == NormalizeMode::None ? "none" : "zscore_per_channel";
    root["mvmd"] = {{"k", cfg.mvmd.K},
                    {"alpha", cfg.mvmd.alpha},
                    {"tol", cfg.mvmd.tol},
                    {"tau", cfg.mvmd.tau},
                    {"max_iters", cfg.mvmd.max_iters},
                    {"init", init_name(cfg.mvmd.init)},
                    {"boundary", boundary_name(cfg.mvmd.boundary)}};
    root["encoder"] = {{"d", cfg.d},
                       {"n_layers", cfg.n_layers},
                       {"l_max", cfg.l_max},
                       {"residual", cfg.residual},
                       {"comp_full_affine", cfg.comp_full_affine}};
    root["mlp"] = {{"hidden", cfg.mlp_hidden},
                   {"dropout", cfg.dropout},
                   {"leaky_slope", cfg.leaky_slope}};
    root["training"] = {{"epochs", cfg.training.epochs},
                        {"batch_size", cfg.training.batch_size},
                        {"learning_rate", cfg.training.lr},
                        {"beta1", cfg.training.beta1},
                        {"beta2", cfg.training.beta2},
                        {"adam_eps", cfg.training.adam_eps},
                        {"cosine_decay", cfg.training.cosine_decay},
                        {"early_stop", cfg.training.early_stop},
                        {"threads", cfg.training.n_threads},
                        {"precision", cfg.precision}};
    root["resample"] = {{"target_ratio", cfg.resample.target_ratio},
                        {"k_neighbors", cfg.resample.k_neighbors}};
    root["split"] = {{"train_fraction", cfg.train_fraction}, {"by_user", cfg.split_by_user}};
    root["eval"] = {{"threshold", cfg.threshold}};
    json rates = json::object();
    for (const auto& [name, r] : cfg.synth.channel_rates) {
        rates[name] = {{"day_rate", r.day_rate}, {"after_hours_rate", r.after_hours_rate}};
    }
    json bursts = json::object();
    for (const auto& [token, count] : cfg.synth.anomaly.burst_tokens) bursts[token] = count;
    root["synth"] = {{"n_users", cfg.synth.n_users},
                     {"n_days", cfg.synth.n_days},
                     {"start_date", format_day(cfg.synth.start_day)},
                     {"channel_rates", rates},
                     {"weekend_factor", cfg.synth.weekend_factor},
                     {"weekly_amplitude", cfg.synth.weekly_amplitude},
                     {"seed", cfg.synth.seed},
                     {"anomaly",
                      {{"n_users", cfg.synth.anomaly.n_users},
                       {"windows_per_user", cfg.synth.anomaly.windows_per_user},
                       {"window_days", cfg.synth.anomaly.window_days},
                       {"after_hours_multiplier", cfg.synth.anomaly.after_hours_multiplier},
                       {"day_rate_factor", cfg.synth.anomaly.day_rate_factor},
                       {"target_channels", cfg.synth.anomaly.target_channels},
                       {"burst_tokens", bursts}}}};
    return root.dump(2);
}

std::string config_fingerprint(const PipelineConfig& cfg) {
    const std::string text = dump_config(cfg);
    std::uint64_t h = 1469598103934665603ull;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace log2sig
