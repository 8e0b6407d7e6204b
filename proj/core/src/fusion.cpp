#include "log2sig/fusion.hpp"

namespace log2sig {

FusedSignal fuse(const FrequencyMatrix& f, const ModeTensor& u) {
    const std::size_t c = f.values.rows;
    const std::size_t t = f.values.cols;
    const std::size_t k = u.modes.size();
    for (const Matrix& m : u.modes) {
        if (m.rows != c || m.cols != t) {
            throw DimensionError("fuse: mode tensor is " + std::to_string(m.rows) + "x" +
                                 std::to_string(m.cols) + ", frequency matrix is " +
                                 std::to_string(c) + "x" + std::to_string(t));
        }
    }

    FusedSignal out;
    out.user = f.user;
    out.start_day = f.start_day;
    out.channels = static_cast<int>(c);
    out.mode_count = static_cast<int>(k);
    out.z = Matrix(c * (k + 1), t);
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t j = 0; j < t; ++j) out.z(ch, j) = f.values(ch, j);
    }
    for (std::size_t mode = 0; mode < k; ++mode) {
        const std::size_t base = c * (mode + 1);
        for (std::size_t ch = 0; ch < c; ++ch) {
            for (std::size_t j = 0; j < t; ++j) out.z(base + ch, j) = u.modes[mode](ch, j);
        }
    }
    return out;
}

}  // namespace log2sig
