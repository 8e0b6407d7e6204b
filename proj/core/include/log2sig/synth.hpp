#pragma once

#include <map>
#include <string>
#include <vector>

#include "log2sig/events.hpp"
#include "log2sig/ingest.hpp"

namespace log2sig {

struct ChannelRates {
    double day_rate = 0.0;          // expected business-hours events per day
    double after_hours_rate = 0.0;  // expected events outside [07,19)
};

struct AnomalySpec {
    int n_users = 3;
    int windows_per_user = 2;
    int window_days = 7;
    double after_hours_multiplier = 10.0;
    // Daytime activity factor on the targeted channels during anomaly windows.
    // Below 1.0 models work shifting into the night: daily totals stay
    // ambiguous while the within-day timing changes.
    double day_rate_factor = 0.55;
    std::vector<std::string> target_channels = {"http", "file"};
    std::map<std::string, int> burst_tokens = {{"HTTP_AFTERHOURS", 6}, {"FILE_COPY", 8}};
};

struct SynthScenario {
    int n_users = 20;
    int n_days = 200;
    Day start_day = days_from_civil(2010, 1, 4);
    std::map<std::string, ChannelRates> channel_rates = {
        {"logon", {2.0, 0.05}},          {"logoff", {2.0, 0.05}},
        {"device_connect", {1.0, 0.02}}, {"device_disconnect", {1.0, 0.02}},
        {"http", {14.0, 0.4}},           {"email", {4.0, 0.1}},
        {"file", {3.0, 0.1}},
    };
    double weekend_factor = 0.25;
    double weekly_amplitude = 0.15;
    AnomalySpec anomaly;
    std::uint64_t seed = 1;

    void validate(const BehaviorVocabulary& vocab) const;
};

struct SynthOutput {
    std::map<LogSource, std::string> log_files;
    std::string labels_file;
    std::size_t total_events = 0;
    std::size_t anomalous_days = 0;
    std::vector<std::string> anomalous_users;
};

// CERT-style CSVs plus the ground-truth labels file, deterministic per seed.
SynthOutput generate_synthetic(const SynthScenario& scenario, const BehaviorVocabulary& vocab,
                               const std::string& out_dir);

}  // namespace log2sig
