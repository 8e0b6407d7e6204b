#include "log2sig/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "log2sig/csv.hpp"
#include "log2sig/rng.hpp"

namespace log2sig {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct PendingEvent {
    std::int64_t timestamp;
    std::string user;
    std::string host;
    LogSource source;
    std::string detail;   // action or activity
    std::string payload;  // url / recipient / filename
};

// Tokens a channel can emit during normal operation, with emission weights.
struct TokenEmitter {
    const char* token;
    double weight;
};

const std::map<std::string, std::vector<TokenEmitter>>& channel_emitters() {
    static const std::map<std::string, std::vector<TokenEmitter>> emitters = {
        {"logon", {{"LOGON", 1.0}}},
        {"logoff", {{"LOGOFF", 1.0}}},
        {"device_connect", {{"DEVICE_CONNECT", 1.0}}},
        {"device_disconnect", {{"DEVICE_DISCONNECT", 1.0}}},
        {"http", {{"HTTP_VISIT", 1.0}}},
        {"email", {{"EMAIL_SEND", 1.0}}},
        {"file", {{"FILE_OPEN", 0.5}, {"FILE_WRITE", 0.3}, {"FILE_COPY", 0.2}}},
    };
    return emitters;
}

// Seconds within the day. Business hours cluster after lunch; after-hours
// draws uniformly from the complement of [07,19).
std::int64_t business_seconds(Rng& rng) {
    double hour;
    do {
        hour = rng.normal(13.0, 2.8);
    } while (hour < 7.0 || hour >= 19.0);
    return std::int64_t(hour * 3600.0) + std::int64_t(rng.uniform_index(60));
}

std::int64_t after_hours_seconds(Rng& rng) {
    // 12 off-hours: [19,24) then [0,7)
    const double off = rng.uniform(0.0, 12.0);
    const double hour = off < 5.0 ? 19.0 + off : off - 5.0;
    return std::int64_t(hour * 3600.0) + std::int64_t(rng.uniform_index(60));
}

struct TokenShape {
    LogSource source;
    const char* detail;  // activity string, or payload template marker
};

TokenShape shape_of(const std::string& token) {
    if (token == "LOGON") return {LogSource::Logon, "Logon"};
    if (token == "LOGOFF") return {LogSource::Logon, "Logoff"};
    if (token == "DEVICE_CONNECT") return {LogSource::Device, "Connect"};
    if (token == "DEVICE_DISCONNECT") return {LogSource::Device, "Disconnect"};
    if (token == "HTTP_VISIT" || token == "HTTP_AFTERHOURS") return {LogSource::Http, ""};
    if (token == "EMAIL_SEND") return {LogSource::Email, ""};
    if (token == "FILE_OPEN") return {LogSource::File, "File Open"};
    if (token == "FILE_WRITE") return {LogSource::File, "File Write"};
    if (token == "FILE_COPY") return {LogSource::File, "File Copy"};
    throw ConfigError("synth: no emitter for token '" + token + "'");
}

void emit(std::vector<PendingEvent>& events, Rng& rng, const std::string& user, Day day,
          const std::string& token, bool after_hours) {
    const TokenShape shape = shape_of(token);
    PendingEvent ev;
    ev.timestamp = std::int64_t(day) * kSecondsPerDay +
                   (after_hours ? after_hours_seconds(rng) : business_seconds(rng));
    ev.user = user;
    ev.host = "PC-" + std::to_string(1 + rng.uniform_index(400));
    ev.source = shape.source;
    switch (shape.source) {
        case LogSource::Http:
            ev.payload = "http://site" + std::to_string(rng.uniform_index(5000)) + ".example/p" +
                         std::to_string(rng.uniform_index(100));
            break;
        case LogSource::Email:
            ev.payload = "peer" + std::to_string(rng.uniform_index(300)) + "@corp.example";
            break;
        case LogSource::File:
            ev.payload = "doc" + std::to_string(rng.uniform_index(9000)) + ".dat";
            ev.detail = shape.detail;
            break;
        default: ev.detail = shape.detail; break;
    }
    events.push_back(std::move(ev));
}

const char* id_prefix(LogSource s) {
    switch (s) {
        case LogSource::Logon: return "L";
        case LogSource::Device: return "D";
        case LogSource::Http: return "H";
        case LogSource::Email: return "E";
        case LogSource::File: return "F";
    }
    return "X";
}

}  // namespace

void SynthScenario::validate(const BehaviorVocabulary& vocab) const {
    if (n_users < 1) throw ConfigError("synth: n_users must be >= 1");
    if (n_days < 1) throw ConfigError("synth: n_days must be >= 1");
    for (const auto& [name, rates] : channel_rates) {
        if (rates.day_rate < 0.0 || rates.after_hours_rate < 0.0) {
            throw ConfigError("synth: negative rate for channel '" + name + "'");
        }
        if (!channel_emitters().count(name)) {
            throw ConfigError("synth: unknown channel '" + name + "'");
        }
    }
    if (anomaly.n_users < 0 || anomaly.n_users >= n_users) {
        throw ConfigError("synth: need at least one clean user");
    }
    if (anomaly.windows_per_user < 0 || anomaly.window_days < 0) {
        throw ConfigError("synth: negative anomaly window spec");
    }
    if (anomaly.n_users > 0 && anomaly.windows_per_user > 0 && anomaly.window_days > n_days) {
        throw ConfigError("synth: anomaly window longer than the scenario");
    }
    if (anomaly.after_hours_multiplier < 0.0 || anomaly.day_rate_factor < 0.0) {
        throw ConfigError("synth: negative anomaly multiplier");
    }
    for (const auto& name : anomaly.target_channels) {
        if (!channel_rates.count(name)) {
            throw ConfigError("synth: anomaly targets unknown channel '" + name + "'");
        }
    }
    for (const auto& [token, count] : anomaly.burst_tokens) {
        if (count < 0) throw ConfigError("synth: negative burst for token '" + token + "'");
        (void)shape_of(token);
        if (vocab.find(token) < 0) {
            throw ConfigError("synth: burst token '" + token + "' not in the vocabulary");
        }
    }
}

SynthOutput generate_synthetic(const SynthScenario& sc, const BehaviorVocabulary& vocab,
                               const std::string& out_dir) {
    sc.validate(vocab);
    std::filesystem::create_directories(out_dir);

    Rng master(sc.seed);

    std::vector<std::string> users;
    for (int u = 0; u < sc.n_users; ++u) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "U%04d", u);
        users.emplace_back(buf);
    }

    // Pick anomalous users and their windows.
    Rng pick = master.derive("synth.users");
    std::vector<int> order(sc.n_users);
    for (int i = 0; i < sc.n_users; ++i) order[i] = i;
    pick.shuffle(order);
    std::set<int> anomalous_users(order.begin(), order.begin() + sc.anomaly.n_users);

    std::set<std::pair<std::string, Day>> anomalous_days;
    std::vector<std::set<int>> windows(sc.n_users);
    for (int u : anomalous_users) {
        Rng wrng = master.derive("synth.windows", std::uint64_t(u));
        for (int w = 0; w < sc.anomaly.windows_per_user; ++w) {
            const int span = std::max(1, sc.n_days - sc.anomaly.window_days);
            const int start = int(wrng.uniform_index(std::uint64_t(span)));
            for (int d = 0; d < sc.anomaly.window_days && start + d < sc.n_days; ++d) {
                windows[u].insert(start + d);
                anomalous_days.emplace(users[u], sc.start_day + start + d);
            }
        }
    }

    std::vector<PendingEvent> events;
    Rng scales = master.derive("synth.scales");
    std::vector<double> user_scale(sc.n_users);
    for (int u = 0; u < sc.n_users; ++u) user_scale[u] = scales.uniform(0.85, 1.15);

    for (int u = 0; u < sc.n_users; ++u) {
        for (int d = 0; d < sc.n_days; ++d) {
            Rng rng = master.derive("synth.cell", std::uint64_t(u) * std::uint64_t(sc.n_days) +
                                                      std::uint64_t(d));
            const Day day = sc.start_day + d;
            const CivilDate civil = civil_from_days(day);
            const int dow = int(((day % 7) + 7 + 4) % 7);  // 1970-01-01 was a Thursday
            (void)civil;
            const bool weekend = dow == 6 || dow == 0;
            const double season =
                weekend ? sc.weekend_factor
                        : 1.0 + sc.weekly_amplitude * std::sin(2.0 * kPi * double(dow) / 7.0);
            const bool hot = windows[u].count(d) > 0;

            for (const auto& [channel, rates] : sc.channel_rates) {
                const bool targeted =
                    hot && std::find(sc.anomaly.target_channels.begin(),
                                     sc.anomaly.target_channels.end(),
                                     channel) != sc.anomaly.target_channels.end();
                const double day_rate = rates.day_rate * season * user_scale[u] *
                                        (targeted ? sc.anomaly.day_rate_factor : 1.0);
                const double ah_rate = rates.after_hours_rate * user_scale[u] *
                                       (targeted ? sc.anomaly.after_hours_multiplier : 1.0);

                const auto& emitters = channel_emitters().at(channel);
                auto pick_token = [&](Rng& r) -> const char* {
                    double total = 0.0;
                    for (const auto& e : emitters) total += e.weight;
                    double x = r.uniform(0.0, total);
                    for (const auto& e : emitters) {
                        if (x < e.weight) return e.token;
                        x -= e.weight;
                    }
                    return emitters.back().token;
                };

                const int n_day = rng.poisson(day_rate);
                for (int i = 0; i < n_day; ++i) {
                    emit(events, rng, users[u], day, pick_token(rng), false);
                }
                const int n_ah = rng.poisson(ah_rate);
                for (int i = 0; i < n_ah; ++i) {
                    emit(events, rng, users[u], day, pick_token(rng), true);
                }
            }
            if (hot) {
                for (const auto& [token, count] : sc.anomaly.burst_tokens) {
                    for (int i = 0; i < count; ++i) {
                        emit(events, rng, users[u], day, token, true);
                    }
                }
            }
        }
    }

    // Write one CSV per source, rows in timestamp order, CERT-style ids.
    SynthOutput out;
    out.total_events = events.size();
    out.anomalous_days = anomalous_days.size();
    for (int u : anomalous_users) out.anomalous_users.push_back(users[u]);
    std::sort(out.anomalous_users.begin(), out.anomalous_users.end());

    std::stable_sort(events.begin(), events.end(),
                     [](const PendingEvent& a, const PendingEvent& b) {
                         return a.timestamp < b.timestamp;
                     });

    for (int s = 0; s < kNumLogSources; ++s) {
        const LogSource source = LogSource(s);
        const std::string path =
            (std::filesystem::path(out_dir) / (std::string(source_name(source)) + ".csv"))
                .string();
        std::ofstream file(path);
        if (!file) throw IoError("cannot write synthetic log: " + path);
        file << join_csv_line(expected_header(source)) << '\n';
        std::size_t counter = 0;
        for (const auto& ev : events) {
            if (ev.source != source) continue;
            char id[24];
            std::snprintf(id, sizeof id, "%s%08zu", id_prefix(source), counter++);
            std::vector<std::string> row = {id, format_cert_timestamp(ev.timestamp), ev.user,
                                            ev.host};
            switch (source) {
                case LogSource::Logon:
                case LogSource::Device: row.push_back(ev.detail); break;
                case LogSource::Http:
                case LogSource::Email: row.push_back(ev.payload); break;
                case LogSource::File:
                    row.push_back(ev.payload);
                    row.push_back(ev.detail);
                    break;
            }
            file << join_csv_line(row) << '\n';
        }
        out.log_files[source] = path;
    }

    out.labels_file = (std::filesystem::path(out_dir) / "labels.csv").string();
    std::ofstream labels(out.labels_file);
    if (!labels) throw IoError("cannot write labels: " + out.labels_file);
    labels << "user,date\n";
    for (const auto& [user, day] : anomalous_days) {
        labels << user << ',' << format_day(day) << '\n';
    }
    return out;
}

}  // namespace log2sig
