#include "log2sig/resample.hpp"

#include <algorithm>
#include <cmath>

namespace log2sig {

void ResampleConfig::validate() const {
    if (!(target_ratio > 0.0) || target_ratio > 1.0) {
        throw ConfigError("resample: target_ratio must be in (0, 1]");
    }
    if (k_neighbors < 1) throw ConfigError("resample: k_neighbors must be >= 1");
}

namespace {

// Per-column z-scored copy used for distances only.
Matrix zscore_columns(const Matrix& features) {
    Matrix scaled = features;
    const std::size_t n = features.rows;
    const std::size_t d = features.cols;
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += features(i, j);
        mean /= double(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            var += (features(i, j) - mean) * (features(i, j) - mean);
        }
        const double sd = std::sqrt(var / double(n));
        const double inv = sd > 0.0 ? 1.0 / sd : 1.0;
        for (std::size_t i = 0; i < n; ++i) scaled(i, j) = (features(i, j) - mean) * inv;
    }
    return scaled;
}

double sq_dist(const Matrix& m, std::size_t a, std::size_t b) {
    const double* ra = m.row(a);
    const double* rb = m.row(b);
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) s += (ra[j] - rb[j]) * (ra[j] - rb[j]);
    return s;
}

}  // namespace

SmoteResult smote(const Matrix& features, const std::vector<int>& labels,
                  const ResampleConfig& cfg) {
    cfg.validate();
    const std::size_t n = features.rows;
    if (labels.size() != n) throw DimensionError("smote: labels/features size mismatch");
    if (features.cols < 1) throw DimensionError("smote: need D >= 1");

    std::vector<std::size_t> of_class[2];
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw ResampleError("smote: labels must be 0/1");
        of_class[labels[i]].push_back(i);
    }
    if (of_class[0].empty() || of_class[1].empty()) {
        throw ResampleError("smote: both classes must be present");
    }
    const int minority_class = of_class[1].size() <= of_class[0].size() ? 1 : 0;
    const auto& minority = of_class[minority_class];
    const auto& majority = of_class[1 - minority_class];

    SmoteResult out;
    out.features = features;
    out.labels = labels;
    out.synthetic.assign(n, false);

    const long target = std::lround(cfg.target_ratio * double(majority.size()));
    const long need = target - long(minority.size());
    if (need <= 0) return out;  // already at or past the requested ratio

    if (minority.size() < 2) {
        throw ResampleError("smote: need at least 2 minority samples to interpolate");
    }
    const std::size_t k =
        std::min<std::size_t>(std::size_t(cfg.k_neighbors), minority.size() - 1);

    const Matrix scaled = zscore_columns(features);

    // k nearest minority neighbors per minority point; ties by lower index.
    std::vector<std::vector<std::size_t>> neighbors(minority.size());
    for (std::size_t a = 0; a < minority.size(); ++a) {
        std::vector<std::pair<double, std::size_t>> dists;
        dists.reserve(minority.size() - 1);
        for (std::size_t b = 0; b < minority.size(); ++b) {
            if (a == b) continue;
            dists.emplace_back(sq_dist(scaled, minority[a], minority[b]), minority[b]);
        }
        std::sort(dists.begin(), dists.end());
        neighbors[a].reserve(k);
        for (std::size_t i = 0; i < k; ++i) neighbors[a].push_back(dists[i].second);
    }

    Rng rng = Rng(cfg.seed).derive("smote");
    out.features = Matrix(n + std::size_t(need), features.cols);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < features.cols; ++j) out.features(i, j) = features(i, j);
    }
    for (long s = 0; s < need; ++s) {
        const std::size_t a = std::size_t(s) % minority.size();
        const std::size_t seed_row = minority[a];
        const std::size_t nn_row = neighbors[a][rng.uniform_index(k)];
        const double lambda = rng.uniform();
        const std::size_t dst = n + std::size_t(s);
        for (std::size_t j = 0; j < features.cols; ++j) {
            const double base = features(seed_row, j);
            out.features(dst, j) = base + lambda * (features(nn_row, j) - base);
        }
        out.labels.push_back(minority_class);
        out.synthetic.push_back(true);
        out.provenance.push_back({seed_row, nn_row, lambda});
    }
    return out;
}

TomekResult tomek_clean(const Matrix& features, const std::vector<int>& labels) {
    const std::size_t n = features.rows;
    if (labels.size() != n) throw DimensionError("tomek: labels/features size mismatch");
    if (n < 2) throw ResampleError("tomek: need at least 2 points");

    std::size_t count1 = 0;
    for (int label : labels) count1 += label == 1;
    const int majority_class = count1 > n - count1 ? 1 : 0;

    const Matrix scaled = zscore_columns(features);
    std::vector<std::size_t> nearest(n);
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = i;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = sq_dist(scaled, i, j);
            if (d < best) {
                best = d;
                arg = j;
            }
        }
        nearest[i] = arg;
    }

    TomekResult out;
    out.keep.assign(n, true);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = nearest[i];
        if (j <= i) continue;  // handle each unordered pair once
        if (labels[i] == labels[j] || nearest[j] != i) continue;
        const std::size_t victim = labels[i] == majority_class ? i : j;
        if (out.keep[victim]) {
            out.keep[victim] = false;
            out.removed.push_back(victim);
        }
    }
    std::sort(out.removed.begin(), out.removed.end());
    return out;
}

}  // namespace log2sig
