#include "log2sig/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "json_util.hpp"

namespace log2sig {

namespace detail {

json vocab_to_json(const BehaviorVocabulary& vocab) {
    json tokens = json::array();
    for (const auto& t : vocab.tokens()) {
        tokens.push_back({{"name", t.name}, {"channel", t.channel}});
    }
    return json{{"tokens", tokens},
                {"channel_names", vocab.channel_names()},
                {"split_http_after_hours", vocab.split_http_after_hours()},
                {"other_token", vocab.other_token()}};
}

BehaviorVocabulary vocab_from_json(const json& j) {
    std::vector<VocabToken> tokens;
    for (const auto& t : j.at("tokens")) {
        tokens.push_back({t.at("name").get<std::string>(), t.at("channel").get<int>()});
    }
    return BehaviorVocabulary::create(
        std::move(tokens), j.at("channel_names").get<std::vector<std::string>>(),
        j.at("split_http_after_hours").get<bool>(), j.value("other_token", std::string{}));
}

json encoder_config_to_json(const EncoderConfig& cfg) {
    return json{{"d", cfg.d},
                {"n_layers", cfg.n_layers},
                {"l_max", cfg.l_max},
                {"vocab_size", cfg.vocab_size},
                {"k_modes", cfg.k_modes},
                {"channels", cfg.channels},
                {"residual", cfg.residual},
                {"comp_full_affine", cfg.comp_full_affine},
                {"mlp_hidden", cfg.mlp_hidden},
                {"dropout", cfg.dropout},
                {"leaky_slope", cfg.leaky_slope}};
}

EncoderConfig encoder_config_from_json(const json& j) {
    EncoderConfig cfg;
    cfg.d = j.at("d").get<int>();
    cfg.n_layers = j.at("n_layers").get<int>();
    cfg.l_max = j.at("l_max").get<int>();
    cfg.vocab_size = j.at("vocab_size").get<int>();
    cfg.k_modes = j.at("k_modes").get<int>();
    cfg.channels = j.at("channels").get<int>();
    cfg.residual = j.at("residual").get<bool>();
    cfg.comp_full_affine = j.at("comp_full_affine").get<bool>();
    cfg.mlp_hidden = j.at("mlp_hidden").get<std::vector<int>>();
    cfg.dropout = j.at("dropout").get<double>();
    cfg.leaky_slope = j.at("leaky_slope").get<double>();
    return cfg;
}

}  // namespace detail

namespace {

constexpr char kMagic[8] = {'L', '2', 'S', 'G', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams<double>& model,
                     const BehaviorVocabulary& vocab, const std::string& extra_json) {
    using detail::json;
    json header;
    header["encoder"] = detail::encoder_config_to_json(model.cfg);
    header["vocabulary"] = detail::vocab_to_json(vocab);
    header["extra"] = extra_json.empty() ? json::object() : json::parse(extra_json);
    json index = json::array();
    const auto named = model.named_tensors();
    for (const auto& [name, tensor] : named) {
        index.push_back({{"name", name}, {"rows", tensor->rows}, {"cols", tensor->cols}});
    }
    header["tensors"] = index;
    const std::string head = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof kMagic);
    const std::uint32_t version = kVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    const std::uint64_t head_len = head.size();
    out.write(reinterpret_cast<const char*>(&head_len), sizeof head_len);
    out.write(head.data(), std::streamsize(head.size()));
    for (const auto& [name, tensor] : named) {
        out.write(reinterpret_cast<const char*>(tensor->data.data()),
                  std::streamsize(tensor->data.size() * sizeof(double)));
    }
    if (!out) throw IoError("short write to checkpoint: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    using detail::json;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw SchemaError(path + ": not a checkpoint file");
    }
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    if (version != kVersion) {
        throw SchemaError(path + ": unsupported checkpoint version " + std::to_string(version));
    }
    std::uint64_t head_len = 0;
    in.read(reinterpret_cast<char*>(&head_len), sizeof head_len);
    std::string head(head_len, '\0');
    in.read(head.data(), std::streamsize(head_len));
    if (!in) throw SchemaError(path + ": truncated checkpoint header");

    json header;
    try {
        header = json::parse(head);
    } catch (const json::exception& e) {
        throw SchemaError(path + ": bad checkpoint header: " + e.what());
    }

    LoadedCheckpoint loaded;
    const EncoderConfig cfg = detail::encoder_config_from_json(header.at("encoder"));
    loaded.vocab = detail::vocab_from_json(header.at("vocabulary"));
    loaded.extra_json = header.at("extra").dump();

    Rng dummy(0);
    loaded.model = init_model<double>(cfg, dummy);
    auto named = loaded.model.named_tensors();
    const auto& index = header.at("tensors");
    if (index.size() != named.size()) {
        throw SchemaError(path + ": checkpoint lists " + std::to_string(index.size()) +
                          " tensors, model has " + std::to_string(named.size()));
    }
    for (std::size_t i = 0; i < named.size(); ++i) {
        const auto& entry = index[i];
        if (entry.at("name").get<std::string>() != named[i].first) {
            throw SchemaError(path + ": tensor order mismatch at '" + named[i].first + "'");
        }
        const std::size_t rows = entry.at("rows").get<std::size_t>();
        const std::size_t cols = entry.at("cols").get<std::size_t>();
        if (rows != named[i].second->rows || cols != named[i].second->cols) {
            throw SchemaError(path + ": tensor '" + named[i].first + "' has shape " +
                              std::to_string(rows) + "x" + std::to_string(cols) +
                              ", expected " + std::to_string(named[i].second->rows) + "x" +
                              std::to_string(named[i].second->cols));
        }
        in.read(reinterpret_cast<char*>(named[i].second->data.data()),
                std::streamsize(rows * cols * sizeof(double)));
    }
    if (!in) throw SchemaError(path + ": truncated checkpoint payload");
    return loaded;
}

}  // namespace log2sig
