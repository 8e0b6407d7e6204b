#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "log2sig/tensor.hpp"

namespace log2sig::nn {

// Bias-corrected Adam. Moment buffers align index-wise with the model's
// named-tensor order; the same walk must feed params and grads.
template <typename T>
struct AdamState {
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step = 0;
    std::vector<std::vector<T>> m;
    std::vector<std::vector<T>> v;

    template <typename Tensors>
    void init(const Tensors& tensors) {
        m.clear();
        v.clear();
        for (const auto& [name, t] : tensors) {
            (void)name;
            m.emplace_back(t->data.size(), T(0));
            v.emplace_back(t->data.size(), T(0));
        }
        step = 0;
    }
};

// One update over parallel lists of (param tensor*, grad tensor*). Throws
// NumericError on non-finite gradients without touching any state.
template <typename T>
void adam_step(std::vector<Tensor2<T>*>& params, const std::vector<Tensor2<T>*>& grads,
               AdamState<T>& state) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw DimensionError("adam_step: mismatched tensor lists");
    }
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!grads[i]->all_finite()) {
            throw NumericError("adam_step: non-finite gradient in tensor " + std::to_string(i) +
                               "; update skipped");
        }
        if (grads[i]->data.size() != params[i]->data.size()) {
            throw DimensionError("adam_step: tensor " + std::to_string(i) + " shape mismatch");
        }
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, double(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, double(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        T* p = params[i]->data.data();
        const T* g = grads[i]->data.data();
        T* m = state.m[i].data();
        T* v = state.v[i].data();
        const std::size_t n = params[i]->data.size();
        for (std::size_t j = 0; j < n; ++j) {
            m[j] = T(state.beta1) * m[j] + T(1.0 - state.beta1) * g[j];
            v[j] = T(state.beta2) * v[j] + T(1.0 - state.beta2) * g[j] * g[j];
            const double mhat = double(m[j]) / bc1;
            const double vhat = double(v[j]) / bc2;
            p[j] -= T(state.lr * mhat / (std::sqrt(vhat) + state.eps));
        }
    }
}

}  // namespace log2sig::nn
