#pragma once

#include <json.hpp>

#include "log2sig/encoder.hpp"
#include "log2sig/events.hpp"

// Internal JSON helpers shared by checkpoint, config, and pipeline code.
namespace log2sig::detail {

using json = nlohmann::json;

json vocab_to_json(const BehaviorVocabulary& vocab);
BehaviorVocabulary vocab_from_json(const json& j);

json encoder_config_to_json(const EncoderConfig& cfg);
EncoderConfig encoder_config_from_json(const json& j);

}  // namespace log2sig::detail
