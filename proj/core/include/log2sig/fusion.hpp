#pragma once

#include <string>

#include "log2sig/mvmd.hpp"
#include "log2sig/signal.hpp"

namespace log2sig {

// Z is C(K+1) x T with column t = [f(t); m_1(t); ...; m_K(t)], modes in
// ascending center-frequency order.
struct FusedSignal {
    std::string user;
    Day start_day = 0;
    int channels = 0;
    int mode_count = 0;
    Matrix z;

    int rows() const { return channels * (mode_count + 1); }
    int days() const { return static_cast<int>(z.cols); }
};

FusedSignal fuse(const FrequencyMatrix& f, const ModeTensor& u);

}  // namespace log2sig
