#pragma once

#include <string>

#include "log2sig/encoder.hpp"
#include "log2sig/events.hpp"

namespace log2sig {

// Single-file binary archive: magic + version, a JSON header (encoder
// config, vocabulary, caller metadata, tensor index), then raw little-endian
// f64 tensor payloads in index order.
void save_checkpoint(const std::string& path, const ModelParams<double>& model,
                     const BehaviorVocabulary& vocab, const std::string& extra_json);

struct LoadedCheckpoint {
    ModelParams<double> model;
    BehaviorVocabulary vocab;
    std::string extra_json;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace log2sig
