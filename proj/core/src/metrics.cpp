#include "log2sig/eval.hpp"

#include <algorithm>
#include <cmath>

namespace log2sig {

MetricReport metrics_from_counts(const ConfusionCounts& c, double threshold) {
    MetricReport r;
    r.threshold = threshold;
    r.counts = c;
    if (c.tp + c.fn > 0) {
        r.recall = double(c.tp) / double(c.tp + c.fn);
    } else {
        r.recall_degenerate = true;
    }
    if (c.tp + c.fp > 0) {
        r.precision = double(c.tp) / double(c.tp + c.fp);
    } else {
        r.precision_degenerate = true;
    }
    r.accuracy = c.total() > 0 ? double(c.tp + c.tn) / double(c.total()) : 0.0;
    if (r.precision + r.recall > 0.0) {
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    } else {
        r.f1_degenerate = true;
    }
    return r;
}

MetricReport compute_metrics(std::span<const double> predictions, std::span<const int> labels,
                             double threshold) {
    if (predictions.size() != labels.size()) {
        throw DimensionError("compute_metrics: " + std::to_string(predictions.size()) +
                             " predictions vs " + std::to_string(labels.size()) + " labels");
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool positive = predictions[i] >= threshold;
        if (positive && labels[i] == 1) ++c.tp;
        else if (positive && labels[i] == 0) ++c.fp;
        else if (!positive && labels[i] == 1) ++c.fn;
        else ++c.tn;
    }
    return metrics_from_counts(c, threshold);
}

SplitResult split(const std::vector<int>& labels, double train_fraction, const Rng& rng) {
    const std::size_t n = labels.size();
    if (n < 5) throw RangeError("split: need at least 5 samples");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("split: fraction must be in (0, 1)");
    }

    std::vector<std::size_t> of_class[2];
    for (std::size_t i = 0; i < n; ++i) of_class[labels[i] == 1].push_back(i);

    SplitResult out;
    if (of_class[0].size() < 2 || of_class[1].size() < 2) {
        out.stratified = false;
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        Rng r = rng.derive("split");
        r.shuffle(all);
        const std::size_t n_train = std::size_t(std::lround(train_fraction * double(n)));
        out.train.assign(all.begin(), all.begin() + n_train);
        out.test.assign(all.begin() + n_train, all.end());
    } else {
        for (int cls = 0; cls < 2; ++cls) {
            auto idx = of_class[cls];
            Rng r = rng.derive("split.class", std::uint64_t(cls));
            r.shuffle(idx);
            std::size_t n_train =
                std::size_t(std::lround(train_fraction * double(idx.size())));
            // keep both splits populated for any class with >= 2 members
            n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
            out.train.insert(out.train.end(), idx.begin(), idx.begin() + n_train);
            out.test.insert(out.test.end(), idx.begin() + n_train, idx.end());
        }
        std::sort(out.train.begin(), out.train.end());
        std::sort(out.test.begin(), out.test.end());
    }
    return out;
}

}  // namespace log2sig
