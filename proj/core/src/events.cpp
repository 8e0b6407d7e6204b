#include "log2sig/events.hpp"

#include <algorithm>
#include <set>

namespace log2sig {

const char* source_name(LogSource s) {
    switch (s) {
        case LogSource::Logon: return "logon";
        case LogSource::Device: return "device";
        case LogSource::Http: return "http";
        case LogSource::Email: return "email";
        case LogSource::File: return "file";
    }
    return "unknown";
}

LogSource source_from_name(const std::string& name) {
    if (name == "logon") return LogSource::Logon;
    if (name == "device") return LogSource::Device;
    if (name == "http") return LogSource::Http;
    if (name == "email") return LogSource::Email;
    if (name == "file") return LogSource::File;
    throw ConfigError("unknown log source: '" + name + "'");
}

BehaviorVocabulary BehaviorVocabulary::create(std::vector<VocabToken> tokens,
                                              std::vector<std::string> channel_names,
                                              bool split_http_after_hours,
                                              std::string other_token) {
    if (tokens.empty()) throw ConfigError("vocabulary: no tokens");
    std::set<std::string> names;
    int max_channel = -1;
    for (const auto& t : tokens) {
        if (t.name.empty()) throw ConfigError("vocabulary: empty token name");
        if (!names.insert(t.name).second) {
            throw ConfigError("vocabulary: duplicate token '" + t.name + "'");
        }
        if (t.channel < 0) throw ConfigError("vocabulary: negative channel for '" + t.name + "'");
        max_channel = std::max(max_channel, t.channel);
    }
    const int c = max_channel + 1;
    std::vector<bool> hit(c, false);
    for (const auto& t : tokens) hit[t.channel] = true;
    for (int i = 0; i < c; ++i) {
        if (!hit[i]) {
            throw ConfigError("vocabulary: channel " + std::to_string(i) +
                              " has no token assigned");
        }
    }
    if (channel_names.empty()) {
        for (int i = 0; i < c; ++i) channel_names.push_back("ch" + std::to_string(i));
    }
    if (static_cast<int>(channel_names.size()) != c) {
        throw ConfigError("vocabulary: channel_names size " +
                          std::to_string(channel_names.size()) + " != channel count " +
                          std::to_string(c));
    }
    if (!other_token.empty() && !names.count(other_token)) {
        throw ConfigError("vocabulary: other_token '" + other_token + "' is not in the token list");
    }

    BehaviorVocabulary v;
    v.tokens_ = std::move(tokens);
    v.channel_names_ = std::move(channel_names);
    v.channel_count_ = c;
    v.split_http_after_hours_ = split_http_after_hours;
    v.other_token_ = std::move(other_token);
    return v;
}

BehaviorVocabulary BehaviorVocabulary::default_vocabulary() {
    return create(
        {
            {"LOGON", 0},
            {"LOGOFF", 1},
            {"DEVICE_CONNECT", 2},
            {"DEVICE_DISCONNECT", 3},
            {"HTTP_VISIT", 4},
            {"HTTP_AFTERHOURS", 4},
            {"EMAIL_SEND", 5},
            {"FILE_OPEN", 6},
            {"FILE_WRITE", 6},
            {"FILE_COPY", 6},
        },
        {"logon", "logoff", "device_connect", "device_disconnect", "http", "email", "file"},
        /*split_http_after_hours=*/true);
}

int BehaviorVocabulary::find(const std::string& name) const {
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (tokens_[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

}  // namespace log2sig
