#pragma once

#include <cstdint>
#include <vector>

#include "log2sig/rng.hpp"
#include "log2sig/tensor.hpp"

namespace log2sig {

struct ResampleConfig {
    double target_ratio = 0.5;  // minority/majority after oversampling
    int k_neighbors = 5;        // shrinks to n_minority-1 when needed
    std::uint64_t seed = 0;

    void validate() const;
};

struct SmoteProvenance {
    std::size_t seed_index;      // row in the input feature matrix
    std::size_t neighbor_index;  // row in the input feature matrix
    double lambda;
};

struct SmoteResult {
    Matrix features;  // originals verbatim (input order), synthetics appended
    std::vector<int> labels;
    std::vector<bool> synthetic;
    std::vector<SmoteProvenance> provenance;  // one entry per synthetic row
};

// Neighbor search runs on per-feature z-scored coordinates; interpolation is
// applied in raw space (the two agree because z-scoring is affine).
SmoteResult smote(const Matrix& features, const std::vector<int>& labels,
                  const ResampleConfig& cfg);

struct TomekResult {
    std::vector<bool> keep;             // parallel to the input rows
    std::vector<std::size_t> removed;   // removed majority-class rows, ascending
};

// One pass: mutual nearest neighbors of opposite class form a link; the
// majority-class member of each link is dropped. Ties in the nearest
// neighbor go to the lower index.
TomekResult tomek_clean(const Matrix& features, const std::vector<int>& labels);

}  // namespace log2sig
