#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "log2sig/common.hpp"

namespace log2sig {

enum class LogSource { Logon = 0, Device = 1, Http = 2, Email = 3, File = 4 };

constexpr int kNumLogSources = 5;

const char* source_name(LogSource s);
LogSource source_from_name(const std::string& name);

// One parsed log line from any of the five CERT-style sources.
struct RawEvent {
    std::string event_id;
    std::int64_t timestamp = 0;  // seconds since epoch
    std::string user;
    std::string host;
    LogSource source = LogSource::Logon;
    std::string action_detail;
};

struct VocabToken {
    std::string name;
    int channel = 0;
};

// The behavior alphabet: tokens form the per-day sequence, their channel
// grouping forms the rows of the frequency matrix. Order is load-bearing
// (serialized with the model), so it is fixed at construction.
class BehaviorVocabulary {
public:
    static BehaviorVocabulary create(std::vector<VocabToken> tokens,
                                     std::vector<std::string> channel_names,
                                     bool split_http_after_hours = true,
                                     std::string other_token = "");

    // LOGON/LOGOFF, DEVICE_CONNECT/DISCONNECT, HTTP_VISIT + HTTP_AFTERHOURS,
    // EMAIL_SEND, FILE_OPEN/WRITE/COPY over 7 channels.
    static BehaviorVocabulary default_vocabulary();

    int size() const { return static_cast<int>(tokens_.size()); }
    int channel_count() const { return channel_count_; }
    const std::string& token_name(int idx) const { return tokens_[idx].name; }
    int channel_of(int idx) const { return tokens_[idx].channel; }
    const std::vector<std::string>& channel_names() const { return channel_names_; }

    // -1 when absent.
    int find(const std::string& name) const;

    bool split_http_after_hours() const { return split_http_after_hours_; }
    // Empty string means unmapped events are an error.
    const std::string& other_token() const { return other_token_; }

    const std::vector<VocabToken>& tokens() const { return tokens_; }

private:
    std::vector<VocabToken> tokens_;
    std::vector<std::string> channel_names_;
    int channel_count_ = 0;
    bool split_http_after_hours_ = true;
    std::string other_token_;
};

// One user-day: the ordered token sequence s_t and its label.
struct DaySession {
    std::string user;
    Day day = 0;
    std::vector<std::int32_t> tokens;
    int label = 0;
};

}  // namespace log2sig
