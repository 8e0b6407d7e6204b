#include "log2sig/encoder.hpp"

namespace log2sig {

DaySample make_day_sample(const DaySession& session, const std::vector<double>& z,
                          const EncoderConfig& cfg) {
    DaySample s;
    s.user = session.user;
    s.day = session.day;
    s.label = session.label;
    s.z = z;

    const int l_max = cfg.l_max;
    s.tokens.assign(l_max, 0);
    const int n = static_cast<int>(session.tokens.size());
    // Keep the most recent tokens, left-pad the rest.
    const int take = std::min(n, l_max);
    const int src_start = n - take;
    const int dst_start = l_max - take;
    for (int i = 0; i < take; ++i) {
        s.tokens[dst_start + i] = session.tokens[src_start + i] + 1;
    }
    s.real_len = take;
    return s;
}

}  // namespace log2sig
