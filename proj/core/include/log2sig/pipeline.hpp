#pragma once

#include <map>
#include <optional>
#include <string>

#include "log2sig/checkpoint.hpp"
#include "log2sig/config.hpp"
#include "log2sig/eval.hpp"
#include "log2sig/fusion.hpp"
#include "log2sig/ingest.hpp"
#include "log2sig/mvmd.hpp"
#include "log2sig/signal.hpp"

namespace log2sig {

struct ArtifactPaths {
    std::string sessions;
    std::string freq_dir;
    std::string decomp_dir;
    std::string checkpoint;
    std::string loss_history;
    std::string split_manifest;
    std::string resample_provenance;
    std::string metrics_json;
    std::string metrics_txt;
    std::string report_dir;

    static ArtifactPaths under(const std::string& out_dir);
};

// Each stage consumes the previous stage's artifacts and returns a one-line
// summary for the CLI. Missing prerequisites raise IoError naming the
// command to run first.
std::string run_synth(const PipelineConfig& cfg);
std::string run_ingest(const PipelineConfig& cfg);
std::string run_decompose(const PipelineConfig& cfg);
// Decompose a frequency-matrix CSV directly (fixture / external data entry).
std::string run_decompose_matrix(const PipelineConfig& cfg, const std::string& matrix_csv,
                                 const std::string& name);
std::string run_train(const PipelineConfig& cfg);
std::string run_eval(const PipelineConfig& cfg, MetricReport* out_report = nullptr);
std::string run_report(const PipelineConfig& cfg);

// Sessions + per-user decomposition artifacts joined into model inputs.
struct DatasetBundle {
    std::vector<DaySession> sessions;
    std::map<std::string, FrequencyMatrix> frequency;
    std::map<std::string, ModeTensor> modes;
    std::vector<DaySample> samples;  // aligned with sessions
    EncoderConfig encoder;
};

DatasetBundle load_dataset(const PipelineConfig& cfg);

// Stratified index split honoring split_by_user.
void split_dataset(const PipelineConfig& cfg, const std::vector<DaySample>& samples,
                   std::vector<std::size_t>& train, std::vector<std::size_t>& test);

// Resampled training set: SMOTE on [z ; token-bag] features, Tomek cleanup;
// synthetic rows reuse their seed's token sequence.
std::vector<DaySample> resample_training_set(const PipelineConfig& cfg,
                                             const std::vector<DaySample>& samples,
                                             const std::vector<std::size_t>& train_idx,
                                             const std::string& provenance_csv_path);

}  // namespace log2sig
