#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "log2sig/common.hpp"

namespace log2sig {

// Dense row-major matrix. double in tests and numerics, float allowed for
// training throughput.
template <typename T>
struct Tensor2 {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> data;

    Tensor2() = default;
    Tensor2(std::size_t r, std::size_t c, T fill = T(0)) : rows(r), cols(c), data(r * c, fill) {}

    T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    T* row(std::size_t r) { return data.data() + r * cols; }
    const T* row(std::size_t r) const { return data.data() + r * cols; }

    std::size_t size() const { return data.size(); }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }

    bool all_finite() const {
        for (const T& v : data) {
            if (!std::isfinite(double(v))) return false;
        }
        return true;
    }

    bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }
};

using Matrix = Tensor2<double>;

template <typename T>
void check_shape(const Tensor2<T>& t, std::size_t rows, std::size_t cols, const char* what) {
    if (t.rows != rows || t.cols != cols) {
        throw DimensionError(std::string(what) + ": got " + std::to_string(t.rows) + "x" +
                             std::to_string(t.cols) + ", expected " + std::to_string(rows) +
                             "x" + std::to_string(cols));
    }
}

}  // namespace log2sig
