#include "log2sig/signal.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "log2sig/csv.hpp"

namespace log2sig {

FrequencyMatrix build_frequency_matrix(const std::vector<DaySession>& sessions,
                                       const BehaviorVocabulary& vocab,
                                       Day range_start, Day range_end) {
    if (range_end < range_start) {
        throw RangeError("frequency matrix: empty date range");
    }
    const int T = static_cast<int>(range_end - range_start) + 1;
    const int C = vocab.channel_count();

    FrequencyMatrix f;
    f.start_day = range_start;
    f.values = Matrix(static_cast<std::size_t>(C), static_cast<std::size_t>(T), 0.0);

    for (const auto& s : sessions) {
        if (!f.user.empty() && s.user != f.user) {
            throw RangeError("frequency matrix: sessions span users '" + f.user + "' and '" +
                             s.user + "'");
        }
        f.user = s.user;
        if (s.day < range_start || s.day > range_end) {
            throw RangeError("frequency matrix: session day " + format_day(s.day) +
                             " outside range [" + format_day(range_start) + ", " +
                             format_day(range_end) + "]");
        }
        const int t = static_cast<int>(s.day - range_start);
        for (std::int32_t tok : s.tokens) {
            f.values(static_cast<std::size_t>(vocab.channel_of(tok)),
                     static_cast<std::size_t>(t)) += 1.0;
        }
    }
    return f;
}

NormalizedSignal normalize(const FrequencyMatrix& f, NormalizeMode mode) {
    NormalizedSignal out;
    out.values = f.values;
    out.stats.assign(f.values.rows, ChannelStats{});
    if (mode == NormalizeMode::None) return out;

    const std::size_t T = f.values.cols;
    if (T < 2) throw DimensionError("normalize: z-score needs T >= 2");
    for (std::size_t c = 0; c < f.values.rows; ++c) {
        const double* row = f.values.row(c);
        double mean = 0.0;
        for (std::size_t t = 0; t < T; ++t) mean += row[t];
        mean /= double(T);
        double var = 0.0;
        for (std::size_t t = 0; t < T; ++t) var += (row[t] - mean) * (row[t] - mean);
        var /= double(T);
        const double sd = std::sqrt(var);
        out.stats[c].mean = mean;
        out.stats[c].stddev = sd > 0.0 ? sd : 1.0;
        double* dst = out.values.row(c);
        for (std::size_t t = 0; t < T; ++t) dst[t] = (row[t] - mean) / out.stats[c].stddev;
    }
    return out;
}

Matrix denormalize(const NormalizedSignal& n) {
    Matrix out = n.values;
    for (std::size_t c = 0; c < out.rows; ++c) {
        double* row = out.row(c);
        for (std::size_t t = 0; t < out.cols; ++t) {
            row[t] = row[t] * n.stats[c].stddev + n.stats[c].mean;
        }
    }
    return out;
}

void write_frequency_csv(std::ostream& out, const FrequencyMatrix& f,
                         const std::vector<std::string>& channel_names) {
    std::vector<std::string> header = {"channel"};
    for (int t = 0; t < f.days(); ++t) header.push_back(format_day(f.day_at(t)));
    out << join_csv_line(header) << '\n';
    for (int c = 0; c < f.channels(); ++c) {
        std::vector<std::string> row;
        row.push_back(c < static_cast<int>(channel_names.size()) ? channel_names[c]
                                                                 : "ch" + std::to_string(c));
        for (int t = 0; t < f.days(); ++t) {
            std::ostringstream v;
            v << f.values(c, t);
            row.push_back(v.str());
        }
        out << join_csv_line(row) << '\n';
    }
}

void write_frequency_csv_file(const std::string& path, const FrequencyMatrix& f,
                              const std::vector<std::string>& channel_names) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write frequency csv: " + path);
    write_frequency_csv(out, f, channel_names);
}

FrequencyMatrix read_frequency_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open frequency csv: " + path);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path + ": missing header");
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "channel") {
        throw SchemaError(path + ": frequency header must start with 'channel'");
    }
    const int T = static_cast<int>(header.size()) - 1;

    FrequencyMatrix f;
    f.start_day = parse_day(header[1]);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != T + 1) {
            throw SchemaError(path + ": row has " + std::to_string(fields.size()) +
                              " fields, expected " + std::to_string(T + 1));
        }
        std::vector<double> row(T);
        for (int t = 0; t < T; ++t) {
            try {
                row[t] = std::stod(fields[t + 1]);
            } catch (const std::exception&) {
                throw SchemaError(path + ": non-numeric value '" + fields[t + 1] + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw SchemaError(path + ": no channel rows");
    f.values = Matrix(rows.size(), static_cast<std::size_t>(T));
    for (std::size_t c = 0; c < rows.size(); ++c) {
        for (int t = 0; t < T; ++t) f.values(c, t) = rows[c][t];
    }
    return f;
}

}  // namespace log2sig
