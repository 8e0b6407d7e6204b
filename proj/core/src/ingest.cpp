#include "log2sig/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "log2sig/csv.hpp"

namespace log2sig {

std::vector<std::string> expected_header(LogSource source) {
    std::vector<std::string> h = {"id", "date", "user", "pc"};
    switch (source) {
        case LogSource::Logon:
        case LogSource::Device: h.push_back("activity"); break;
        case LogSource::Http: h.push_back("url"); break;
        case LogSource::Email: h.push_back("to"); break;
        case LogSource::File:
            h.push_back("filename");
            h.push_back("activity");
            break;
    }
    return h;
}

namespace {

// Index of the field carrying the action detail for a source.
std::size_t detail_column(LogSource source) {
    return source == LogSource::File ? 5 : 4;
}

}  // namespace

ParsedLog parse_log_stream(std::istream& in, LogSource source, const std::string& origin) {
    const std::vector<std::string> expect = expected_header(source);

    std::string line;
    if (!std::getline(in, line)) {
        throw SchemaError(origin + ": missing header row");
    }
    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() < expect.size()) {
        throw SchemaError(origin + ": header has " + std::to_string(header.size()) +
                          " columns, expected at least " + std::to_string(expect.size()) +
                          " for source '" + source_name(source) + "'");
    }
    for (std::size_t i = 0; i < expect.size(); ++i) {
        if (header[i] != expect[i]) {
            throw SchemaError(origin + ": column " + std::to_string(i + 1) + " is '" +
                              header[i] + "', expected '" + expect[i] + "' for source '" +
                              source_name(source) + "'");
        }
    }

    ParsedLog out;
    const std::size_t detail_col = detail_column(source);
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() <= detail_col) {
            ++out.skipped_rows;
            continue;
        }
        std::int64_t ts = 0;
        if (!parse_cert_timestamp(f[1], ts) || f[2].empty()) {
            ++out.skipped_rows;
            continue;
        }
        RawEvent ev;
        ev.event_id = f[0];
        ev.timestamp = ts;
        ev.user = f[2];
        ev.host = f[3];
        ev.source = source;
        ev.action_detail = f[detail_col];
        out.events.push_back(std::move(ev));
    }
    return out;
}

ParsedLog parse_log_file(const std::string& path, LogSource source) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open log file: " + path);
    return parse_log_stream(in, source, path);
}

int map_event(const RawEvent& event, const BehaviorVocabulary& vocab, int tz_offset_minutes) {
    const char* wanted = nullptr;
    switch (event.source) {
        case LogSource::Logon:
            if (event.action_detail == "Logon") wanted = "LOGON";
            else if (event.action_detail == "Logoff") wanted = "LOGOFF";
            break;
        case LogSource::Device:
            if (event.action_detail == "Connect") wanted = "DEVICE_CONNECT";
            else if (event.action_detail == "Disconnect") wanted = "DEVICE_DISCONNECT";
            break;
        case LogSource::Http: {
            const int hour = hour_of_timestamp(event.timestamp, tz_offset_minutes);
            const bool after_hours = hour < 7 || hour >= 19;
            wanted = (after_hours && vocab.split_http_after_hours()) ? "HTTP_AFTERHOURS"
                                                                     : "HTTP_VISIT";
            break;
        }
        case LogSource::Email: wanted = "EMAIL_SEND"; break;
        case LogSource::File:
            if (event.action_detail == "File Open") wanted = "FILE_OPEN";
            else if (event.action_detail == "File Write") wanted = "FILE_WRITE";
            else if (event.action_detail == "File Copy") wanted = "FILE_COPY";
            break;
    }

    int idx = wanted ? vocab.find(wanted) : -1;
    if (idx < 0) {
        if (!vocab.other_token().empty()) return vocab.find(vocab.other_token());
        throw ClassificationError(std::string("unmapped event: source='") +
                                  source_name(event.source) + "' action_detail='" +
                                  event.action_detail + "'");
    }
    return idx;
}

LabelSet load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open labels file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path + ": missing header row");
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "user" || header[1] != "date") {
        throw SchemaError(path + ": labels header must be 'user,date'");
    }
    LabelSet labels;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (f.size() < 2) throw SchemaError(path + ": short labels row '" + line + "'");
        labels.emplace(f[0], parse_day(f[1]));
    }
    return labels;
}

std::vector<DaySession> build_sessions(const std::vector<RawEvent>& events,
                                       const BehaviorVocabulary& vocab,
                                       const LabelSet& labels,
                                       int tz_offset_minutes) {
    struct Keyed {
        std::int64_t timestamp;
        int source;
        const RawEvent* ev;
    };
    std::map<std::pair<std::string, Day>, std::vector<Keyed>> groups;
    for (const auto& ev : events) {
        const Day day = day_of_timestamp(ev.timestamp, tz_offset_minutes);
        groups[{ev.user, day}].push_back({ev.timestamp, static_cast<int>(ev.source), &ev});
    }

    std::vector<DaySession> sessions;
    sessions.reserve(groups.size());
    for (auto& [key, rows] : groups) {
        std::sort(rows.begin(), rows.end(), [](const Keyed& a, const Keyed& b) {
            if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
            if (a.source != b.source) return a.source < b.source;
            return a.ev->event_id < b.ev->event_id;
        });
        DaySession s;
        s.user = key.first;
        s.day = key.second;
        s.tokens.reserve(rows.size());
        for (const auto& r : rows) {
            s.tokens.push_back(map_event(*r.ev, vocab, tz_offset_minutes));
        }
        s.label = labels.count(key) ? 1 : 0;
        sessions.push_back(std::move(s));
    }
    return sessions;
}

void write_sessions(std::ostream& out, const std::vector<DaySession>& sessions,
                    const BehaviorVocabulary& vocab) {
    for (const auto& s : sessions) {
        std::string toks;
        for (std::size_t i = 0; i < s.tokens.size(); ++i) {
            if (i) toks.push_back(' ');
            toks += vocab.token_name(s.tokens[i]);
        }
        out << join_csv_line({s.user, format_day(s.day), std::to_string(s.label), toks})
            << '\n';
    }
}

std::vector<DaySession> read_sessions(std::istream& in, const BehaviorVocabulary& vocab) {
    std::vector<DaySession> sessions;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (f.size() != 4) {
            throw SchemaError("sessions line " + std::to_string(lineno) + ": expected 4 fields");
        }
        DaySession s;
        s.user = f[0];
        s.day = parse_day(f[1]);
        s.label = f[2] == "1" ? 1 : 0;
        std::istringstream toks(f[3]);
        std::string name;
        while (toks >> name) {
            const int idx = vocab.find(name);
            if (idx < 0) {
                throw SchemaError("sessions line " + std::to_string(lineno) +
                                  ": unknown token '" + name + "'");
            }
            s.tokens.push_back(idx);
        }
        sessions.push_back(std::move(s));
    }
    return sessions;
}

void write_sessions_file(const std::string& path, const std::vector<DaySession>& sessions,
                         const BehaviorVocabulary& vocab) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write sessions file: " + path);
    write_sessions(out, sessions, vocab);
}

std::vector<DaySession> read_sessions_file(const std::string& path,
                                           const BehaviorVocabulary& vocab) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open sessions file: " + path);
    return read_sessions(in, vocab);
}

}  // namespace log2sig
