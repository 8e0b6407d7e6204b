#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "log2sig/events.hpp"
#include "log2sig/tensor.hpp"

namespace log2sig {

// Per-user C x T matrix of daily behavior counts; column t is f(t).
// Days are gap-free: dates with no session are zero columns.
struct FrequencyMatrix {
    std::string user;
    Day start_day = 0;
    Matrix values;  // C x T

    int channels() const { return static_cast<int>(values.rows); }
    int days() const { return static_cast<int>(values.cols); }
    Day day_at(int t) const { return start_day + t; }
};

FrequencyMatrix build_frequency_matrix(const std::vector<DaySession>& sessions,
                                       const BehaviorVocabulary& vocab,
                                       Day range_start, Day range_end);

enum class NormalizeMode { None, ZscorePerChannel };

struct ChannelStats {
    double mean = 0.0;
    double stddev = 1.0;
};

struct NormalizedSignal {
    Matrix values;  // C x T
    std::vector<ChannelStats> stats;
};

// Population z-score per channel. Constant channels pass through centered
// with stddev recorded as 1 so the inverse map stays exact.
NormalizedSignal normalize(const FrequencyMatrix& f, NormalizeMode mode);

Matrix denormalize(const NormalizedSignal& n);

// CSV dump: header `channel,<date>,...`, one row per channel.
void write_frequency_csv(std::ostream& out, const FrequencyMatrix& f,
                         const std::vector<std::string>& channel_names);
void write_frequency_csv_file(const std::string& path, const FrequencyMatrix& f,
                              const std::vector<std::string>& channel_names);
FrequencyMatrix read_frequency_csv_file(const std::string& path);

}  // namespace log2sig
