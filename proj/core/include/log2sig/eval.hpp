#pragma once

#include <span>
#include <vector>

#include "log2sig/rng.hpp"
#include "log2sig/tensor.hpp"

namespace log2sig {

struct ConfusionCounts {
    long tp = 0;
    long tn = 0;
    long fp = 0;
    long fn = 0;
    long total() const { return tp + tn + fp + fn; }
};

struct MetricReport {
    double recall = 0.0;
    double precision = 0.0;
    double accuracy = 0.0;
    double f1 = 0.0;
    double threshold = 0.5;
    ConfusionCounts counts;
    bool recall_degenerate = false;
    bool precision_degenerate = false;
    bool f1_degenerate = false;
};

MetricReport metrics_from_counts(const ConfusionCounts& counts, double threshold = 0.5);

// prediction >= threshold counts as positive.
MetricReport compute_metrics(std::span<const double> predictions, std::span<const int> labels,
                             double threshold = 0.5);

struct SplitResult {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    bool stratified = true;
};

// Stratified 80/20 by default. Falls back to an unstratified shuffle when a
// class has fewer than 2 members.
SplitResult split(const std::vector<int>& labels, double train_fraction, const Rng& rng);

}  // namespace log2sig
