#pragma once

#include <string>

#include "log2sig/encoder.hpp"
#include "log2sig/events.hpp"
#include "log2sig/mvmd.hpp"
#include "log2sig/resample.hpp"
#include "log2sig/signal.hpp"
#include "log2sig/synth.hpp"
#include "log2sig/trainer.hpp"

namespace log2sig {

// Every Table-defaults knob pre-filled: `train` runs without a config file.
struct PipelineConfig {
    std::uint64_t seed = 1;

    std::string input_dir = "data/logs";
    std::string output_dir = "out";
    std::string labels_file;  // defaults to <input_dir>/labels.csv
    int tz_offset_minutes = 0;

    BehaviorVocabulary vocabulary = BehaviorVocabulary::default_vocabulary();
    NormalizeMode normalize = NormalizeMode::None;

    MvmdConfig mvmd;

    // encoder knobs; vocab_size / k_modes / channels are derived at run time
    int d = 64;
    int n_layers = 2;
    int l_max = 128;
    bool residual = true;
    bool comp_full_affine = false;
    std::vector<int> mlp_hidden = {256, 128, 32};
    double dropout = 0.3;
    double leaky_slope = 0.01;

    TrainConfig training;
    std::string precision = "f32";  // "f32" or "f64"; tests always run f64

    ResampleConfig resample;
    double train_fraction = 0.8;
    bool split_by_user = false;
    double threshold = 0.5;

    SynthScenario synth;

    std::string labels_path() const {
        return labels_file.empty() ? input_dir + "/labels.csv" : labels_file;
    }
    EncoderConfig encoder_config(int vocab_tokens, int channels) const;
    void validate() const;
};

// Strict parse: unknown keys rejected with their JSON path, parse errors
// reported with line and column.
PipelineConfig load_config(const std::string& path);
PipelineConfig parse_config(const std::string& text, const std::string& origin);

std::string dump_config(const PipelineConfig& cfg);

// FNV-1a of the canonical dump; stamped into reports.
std::string config_fingerprint(const PipelineConfig& cfg);

}  // namespace log2sig
