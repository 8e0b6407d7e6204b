#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "log2sig/encoder.hpp"

namespace log2sig {

struct TrainConfig {
    int epochs = 200;
    int batch_size = 32;
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    bool cosine_decay = false;
    bool early_stop = false;
    int early_stop_patience = 10;
    double early_stop_min_delta = 1e-5;
    int n_threads = 2;
};

struct TrainReport {
    std::vector<double> epoch_loss;
    std::vector<std::string> warnings;
    bool aborted = false;
    int epochs_run = 0;
};

inline std::uint64_t mask_seed_for(std::uint64_t base, std::uint64_t epoch,
                                   std::uint64_t sample_index) {
    std::uint64_t x = base ^ (epoch * 0x9e3779b97f4a7c15ull) ^
                      (sample_index * 0xbf58476d1ce4e5b9ull);
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Shared forward/backward machinery for one minibatch, built on the
// batch-major engine. Deterministic for a fixed thread count.
template <typename T>
class BatchRunner {
public:
    BatchRunner(int n_threads) : n_threads_(std::max(1, n_threads)) {
        nn::configure_blas_single_thread();
    }

    double forward_backward(std::span<const DaySample* const> batch, ModelParams<T>& model,
                            ModelParams<T>& grads, bool train,
                            std::span<const std::uint64_t> mask_seeds,
                            std::vector<T>* probs_out = nullptr) {
        const std::size_t b = batch.size();
        batch_forward_features(batch, model, features_, &cache_, n_threads_);

        nn::MlpCache<T> mlp_cache;
        const std::vector<T> probs = nn::mlp_forward_batch<T>(
            features_, model.mlp, T(model.cfg.dropout), T(model.cfg.leaky_slope), train,
            mask_seeds, &mlp_cache, n_threads_);
        if (probs_out) *probs_out = probs;

        std::vector<T> labels(b);
        for (std::size_t i = 0; i < b; ++i) labels[i] = T(batch[i]->label);
        const double loss = nn::bce_loss<T>(probs, labels);

        std::vector<T> d_logit(b);
        for (std::size_t i = 0; i < b; ++i) {
            d_logit[i] = nn::bce_dlogit(probs[i], labels[i], b);
        }
        Tensor2<T> d_features;
        nn::mlp_backward_batch<T>(model.mlp, mlp_cache, T(model.cfg.leaky_slope), d_logit,
                                  d_features, grads.mlp, n_threads_);

        batch_backward_features(batch, model, cache_, d_features, grads, n_threads_);
        return loss;
    }

    double forward_loss(std::span<const DaySample* const> batch, ModelParams<T>& model,
                        bool train, std::span<const std::uint64_t> mask_seeds,
                        std::vector<T>* probs_out = nullptr) {
        const std::size_t b = batch.size();
        batch_forward_features(batch, model, features_,
                               static_cast<BatchCache<T>*>(nullptr), n_threads_);
        const std::vector<T> probs = nn::mlp_forward_batch<T>(
            features_, model.mlp, T(model.cfg.dropout), T(model.cfg.leaky_slope), train,
            mask_seeds, nullptr, n_threads_);
        if (probs_out) *probs_out = probs;
        std::vector<T> labels(b);
        for (std::size_t i = 0; i < b; ++i) labels[i] = T(batch[i]->label);
        return nn::bce_loss<T>(probs, labels);
    }

private:
    int n_threads_;
    Tensor2<T> features_;
    BatchCache<T> cache_;
};

// Minibatch Adam on mean BCE. Deterministic under a fixed seed and thread
// count; aborts (restoring the last finite-loss parameters) on divergence.
template <typename T>
TrainReport train_model(ModelParams<T>& model, const std::vector<DaySample>& samples,
                        const TrainConfig& tc, const Rng& stage_rng) {
    if (samples.empty()) throw DimensionError("train: empty training set");
    TrainReport report;
    if (tc.epochs == 0) return report;

    BatchRunner<T> runner(tc.n_threads);
    ModelParams<T> grads = zeros_like(model);

    nn::AdamState<T> adam;
    adam.lr = tc.lr;
    adam.beta1 = tc.beta1;
    adam.beta2 = tc.beta2;
    adam.eps = tc.adam_eps;
    adam.init(model.named_tensors());

    std::vector<Tensor2<T>*> param_list, grad_list;
    for (auto& [name, t] : model.named_tensors()) {
        (void)name;
        param_list.push_back(t);
    }
    for (auto& [name, t] : grads.named_tensors()) {
        (void)name;
        grad_list.push_back(t);
    }

    Rng mask_rng = stage_rng.derive("dropout");
    const std::uint64_t mask_base = mask_rng.next_u64();
    ModelParams<T> last_good = model;
    double best_loss = std::numeric_limits<double>::infinity();
    int stall = 0;

    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        Rng shuffle_rng = stage_rng.derive("shuffle", std::uint64_t(epoch));
        shuffle_rng.shuffle(order);

        if (tc.cosine_decay) {
            adam.lr = tc.lr * 0.5 * (1.0 + std::cos(3.14159265358979323846 * double(epoch) /
                                                    double(tc.epochs)));
        }

        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
            const std::size_t end = std::min(order.size(), start + tc.batch_size);
            std::vector<const DaySample*> batch;
            std::vector<std::uint64_t> seeds;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(&samples[order[i]]);
                seeds.push_back(mask_seed_for(mask_base, std::uint64_t(epoch), order[i]));
            }
            for (auto* g : grad_list) g->fill(T(0));
            const double loss = runner.forward_backward(batch, model, grads, true, seeds);
            loss_sum += loss * double(batch.size());
            seen += batch.size();
            adam_step(param_list, grad_list, adam);
        }

        const double epoch_loss = loss_sum / double(seen);
        report.epoch_loss.push_back(epoch_loss);
        report.epochs_run = epoch + 1;

        if (!std::isfinite(epoch_loss)) {
            model = last_good;
            report.aborted = true;
            report.warnings.push_back("epoch " + std::to_string(epoch) +
                                      ": non-finite loss, restored last checkpoint");
            break;
        }
        last_good = model;

        for (std::size_t l = 0; l < model.layers.size(); ++l) {
            const double rho = spectral_radius_estimate(model.layers[l].a);
            if (rho > 1.05) {
                report.warnings.push_back("epoch " + std::to_string(epoch) + ": layer " +
                                          std::to_string(l) + " spectral radius " +
                                          std::to_string(rho));
            }
        }

        if (tc.early_stop) {
            if (epoch_loss < best_loss - tc.early_stop_min_delta) {
                best_loss = epoch_loss;
                stall = 0;
            } else if (++stall >= tc.early_stop_patience) {
                break;
            }
        }
    }
    return report;
}

}  // namespace log2sig
