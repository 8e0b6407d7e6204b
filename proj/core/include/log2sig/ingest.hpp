#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "log2sig/events.hpp"

namespace log2sig {

struct ParsedLog {
    std::vector<RawEvent> events;
    std::size_t skipped_rows = 0;
};

// CERT-style CSV: header `id,date,user,pc,<source tail>`, dates as
// `MM/DD/YYYY HH:MM:SS`. Rows with malformed timestamps or missing fields
// are counted and skipped. Extra trailing columns are tolerated.
ParsedLog parse_log_file(const std::string& path, LogSource source);
ParsedLog parse_log_stream(std::istream& in, LogSource source, const std::string& origin);

// Expected header for a source, first columns are always id,date,user,pc.
std::vector<std::string> expected_header(LogSource source);

// Rule-based token lookup. Throws ClassificationError on combinations the
// vocabulary does not cover, unless a catch-all OTHER token is configured.
int map_event(const RawEvent& event, const BehaviorVocabulary& vocab,
              int tz_offset_minutes = 0);

using LabelSet = std::set<std::pair<std::string, Day>>;

LabelSet load_labels(const std::string& path);

// Group events into per-user per-day sessions. Tokens ordered by
// timestamp, ties broken by (source, event_id). Sessions ordered by
// (user, day). Days with no events produce no session.
std::vector<DaySession> build_sessions(const std::vector<RawEvent>& events,
                                       const BehaviorVocabulary& vocab,
                                       const LabelSet& labels,
                                       int tz_offset_minutes = 0);

// Line-delimited dump: user,date,label,space-joined token names.
void write_sessions(std::ostream& out, const std::vector<DaySession>& sessions,
                    const BehaviorVocabulary& vocab);
std::vector<DaySession> read_sessions(std::istream& in, const BehaviorVocabulary& vocab);
void write_sessions_file(const std::string& path, const std::vector<DaySession>& sessions,
                         const BehaviorVocabulary& vocab);
std::vector<DaySession> read_sessions_file(const std::string& path,
                                           const BehaviorVocabulary& vocab);

}  // namespace log2sig
