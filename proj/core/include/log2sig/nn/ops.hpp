#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "log2sig/nn/gemm.hpp"
#include "log2sig/rng.hpp"
#include "log2sig/tensor.hpp"

// Forward/backward primitives with hand-derived gradients. Convention:
// gradients w.r.t. an op's INPUT are overwritten, gradients w.r.t. its
// PARAMETERS are accumulated (so one grad buffer serves a whole batch).
namespace log2sig::nn {

template <typename T>
inline T sigmoid(T x) {
    return T(1) / (T(1) + std::exp(-x));
}

// ---------------------------------------------------------------------------
// Gating: Xhat = (X Wu) ⊙ σ(X Wv)

template <typename T>
struct GateCache {
    Tensor2<T> u;    // X Wu
    Tensor2<T> sig;  // σ(X Wv)
};

template <typename T>
Tensor2<T> gate_forward(const Tensor2<T>& x, const Tensor2<T>& w_u, const Tensor2<T>& w_v,
                        GateCache<T>* cache = nullptr) {
    if (x.cols != w_u.rows || w_u.rows != w_u.cols || !w_u.same_shape(w_v)) {
        throw DimensionError("gate_forward: X is " + std::to_string(x.rows) + "x" +
                             std::to_string(x.cols) + ", gates are " + std::to_string(w_u.rows) +
                             "x" + std::to_string(w_u.cols));
    }
    Tensor2<T> u, v;
    matmul(x, w_u, u);
    matmul(x, w_v, v);
    for (T& e : v.data) e = sigmoid(e);
    Tensor2<T> out(x.rows, x.cols);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = u.data[i] * v.data[i];
    if (cache) {
        cache->u = std::move(u);
        cache->sig = std::move(v);
    }
    return out;
}

template <typename T>
void gate_backward(const Tensor2<T>& x, const Tensor2<T>& w_u, const Tensor2<T>& w_v,
                   const GateCache<T>& cache, const Tensor2<T>& d_out, Tensor2<T>& d_x,
                   Tensor2<T>& d_wu, Tensor2<T>& d_wv) {
    Tensor2<T> d_u(x.rows, x.cols);
    Tensor2<T> d_v(x.rows, x.cols);
    for (std::size_t i = 0; i < d_out.data.size(); ++i) {
        const T s = cache.sig.data[i];
        d_u.data[i] = d_out.data[i] * s;
        d_v.data[i] = d_out.data[i] * cache.u.data[i] * s * (T(1) - s);
    }
    matmul(x, d_u, d_wu, true, false, T(1), T(1));
    matmul(x, d_v, d_wv, true, false, T(1), T(1));
    matmul(d_u, w_u, d_x, false, true);
    matmul(d_v, w_v, d_x, false, true, T(1), T(1));
}

// ---------------------------------------------------------------------------
// RMSNorm: row -> row / sqrt(mean(row^2) + eps) ⊙ gain

inline constexpr double kRmsNormEps = 1e-6;

template <typename T>
Tensor2<T> rmsnorm_forward(const Tensor2<T>& x, const Tensor2<T>& gain,
                           std::vector<T>* inv_rms_cache = nullptr) {
    if (gain.rows != 1 || gain.cols != x.cols) {
        throw DimensionError("rmsnorm: gain must be 1x" + std::to_string(x.cols));
    }
    Tensor2<T> out(x.rows, x.cols);
    if (inv_rms_cache) inv_rms_cache->assign(x.rows, T(0));
    for (std::size_t r = 0; r < x.rows; ++r) {
        const T* src = x.row(r);
        T mean_sq = T(0);
        for (std::size_t j = 0; j < x.cols; ++j) mean_sq += src[j] * src[j];
        mean_sq /= T(x.cols);
        const T inv = T(1) / std::sqrt(mean_sq + T(kRmsNormEps));
        if (inv_rms_cache) (*inv_rms_cache)[r] = inv;
        T* dst = out.row(r);
        for (std::size_t j = 0; j < x.cols; ++j) dst[j] = src[j] * inv * gain.data[j];
    }
    return out;
}

template <typename T>
void rmsnorm_backward(const Tensor2<T>& x, const Tensor2<T>& gain,
                      const std::vector<T>& inv_rms, const Tensor2<T>& d_out, Tensor2<T>& d_x,
                      Tensor2<T>& d_gain) {
    d_x = Tensor2<T>(x.rows, x.cols);
    for (std::size_t r = 0; r < x.rows; ++r) {
        const T* xr = x.row(r);
        const T* dr = d_out.row(r);
        T* out = d_x.row(r);
        const T inv = inv_rms[r];
        T dot = T(0);
        for (std::size_t j = 0; j < x.cols; ++j) {
            dot += dr[j] * gain.data[j] * xr[j];
            d_gain.data[j] += dr[j] * xr[j] * inv;
        }
        const T scale = inv * inv * inv * dot / T(x.cols);
        for (std::size_t j = 0; j < x.cols; ++j) {
            out[j] = dr[j] * gain.data[j] * inv - xr[j] * scale;
        }
    }
}

// ---------------------------------------------------------------------------
// Linear state-space scan: h_t = h_{t-1} A + xhat_t B, z_t = h_t C

template <typename T>
struct ScanCache {
    Tensor2<T> h;  // L x d, rows h_1..h_L
};

template <typename T>
Tensor2<T> ssm_scan_forward(const Tensor2<T>& xhat, const Tensor2<T>& a, const Tensor2<T>& b,
                            const Tensor2<T>& c_out, ScanCache<T>* cache = nullptr) {
    const std::size_t len = xhat.rows;
    const std::size_t d = xhat.cols;
    if (a.rows != d || a.cols != d || b.rows != d || b.cols != d || c_out.rows != d ||
        c_out.cols != d) {
        throw DimensionError("ssm_scan: parameter matrices must be " + std::to_string(d) + "x" +
                             std::to_string(d));
    }
    Tensor2<T> drive;
    matmul(xhat, b, drive);  // xhat_t B for all t at once

    Tensor2<T> h(len, d, T(0));
    for (std::size_t t = 0; t < len; ++t) {
        T* ht = h.row(t);
        const T* dt = drive.row(t);
        for (std::size_t j = 0; j < d; ++j) ht[j] = dt[j];
        if (t > 0) row_times_matrix_add(h.row(t - 1), a, ht);
        for (std::size_t j = 0; j < d; ++j) {
            if (!std::isfinite(double(ht[j]))) {
                throw NumericError("ssm_scan: non-finite state at step t=" + std::to_string(t));
            }
        }
    }
    Tensor2<T> z;
    matmul(h, c_out, z);
    if (cache) cache->h = std::move(h);
    return z;
}

template <typename T>
void ssm_scan_backward(const Tensor2<T>& xhat, const Tensor2<T>& a, const Tensor2<T>& b,
                       const Tensor2<T>& c_out, const ScanCache<T>& cache,
                       const Tensor2<T>& d_z, Tensor2<T>& d_xhat, Tensor2<T>& d_a,
                       Tensor2<T>& d_b, Tensor2<T>& d_c) {
    const std::size_t len = xhat.rows;
    const std::size_t d = xhat.cols;
    matmul(cache.h, d_z, d_c, true, false, T(1), T(1));

    Tensor2<T> dzc;
    matmul(d_z, c_out, dzc, false, true);

    // g_t = dL/dh_t, accumulated in reverse time.
    Tensor2<T> g(len, d, T(0));
    for (std::size_t t = len; t-- > 0;) {
        T* gt = g.row(t);
        const T* base = dzc.row(t);
        for (std::size_t j = 0; j < d; ++j) gt[j] = base[j];
        if (t + 1 < len) {
            const T* gn = g.row(t + 1);
            // gt += g_{t+1} A^T : dot each row of A with g_{t+1}
            for (std::size_t i = 0; i < d; ++i) {
                const T* arow = a.row(i);
                T acc = T(0);
                for (std::size_t j = 0; j < d; ++j) acc += gn[j] * arow[j];
                gt[i] += acc;
            }
        }
    }

    // dA += sum_t h_{t-1}^T g_t ; h_0 = 0 so t starts at 1.
    if (len > 1) {
        gemm_raw(true, false, int(d), int(d), int(len - 1), T(1), cache.h.data.data(),
                 int(d), g.data.data() + d, int(d), T(1), d_a.data.data(), int(d));
    }
    matmul(xhat, g, d_b, true, false, T(1), T(1));
    matmul(g, b, d_xhat, false, true);
}

// ---------------------------------------------------------------------------
// MLP head: hidden layers with LeakyReLU + inverted dropout, scalar logit,
// logistic output.

template <typename T>
struct MlpParams {
    std::vector<Tensor2<T>> weights;  // layer l: (n_{l-1} x n_l)
    std::vector<Tensor2<T>> biases;   // 1 x n_l
};

template <typename T>
struct MlpCache {
    std::vector<Tensor2<T>> inputs;   // input to each layer
    std::vector<Tensor2<T>> preact;   // pre-activation per hidden layer
    std::vector<Tensor2<T>> mask;     // dropout masks (already inverted-scaled)
    std::vector<T> prob;              // σ(logit), unclamped
};

// Rows of `input` are independent samples. Masks draw from one rng per row so
// results do not depend on batch composition order.
template <typename T>
std::vector<T> mlp_forward_batch(const Tensor2<T>& input, const MlpParams<T>& mlp, T dropout,
                                 T leaky_slope, bool train, std::span<const std::uint64_t>
                                 mask_seeds, MlpCache<T>* cache, int n_threads = 1) {
    const std::size_t n_layers = mlp.weights.size();
    if (n_layers == 0 || mlp.weights.back().cols != 1) {
        throw DimensionError("mlp: final layer must emit one logit");
    }
    if (train && dropout > T(0) && mask_seeds.size() != input.rows) {
        throw DimensionError("mlp: need one mask seed per row in train mode");
    }
    std::vector<Rng> row_rngs;
    if (train && dropout > T(0)) {
        row_rngs.reserve(input.rows);
        for (std::size_t r = 0; r < input.rows; ++r) row_rngs.emplace_back(mask_seeds[r]);
    }

    Tensor2<T> act = input;
    if (cache) {
        cache->inputs.clear();
        cache->preact.clear();
        cache->mask.clear();
    }
    for (std::size_t l = 0; l < n_layers; ++l) {
        const Tensor2<T>& w = mlp.weights[l];
        const Tensor2<T>& bias = mlp.biases[l];
        if (act.cols != w.rows) {
            throw DimensionError("mlp: layer " + std::to_string(l) + " expects " +
                                 std::to_string(w.rows) + " inputs, got " +
                                 std::to_string(act.cols));
        }
        if (cache) cache->inputs.push_back(act);
        Tensor2<T> z;
        matmul_mt(act, w, z, false, false, T(1), T(0), n_threads);
        for (std::size_t r = 0; r < z.rows; ++r) {
            T* row = z.row(r);
            for (std::size_t j = 0; j < z.cols; ++j) row[j] += bias.data[j];
        }
        if (l + 1 == n_layers) {
            act = std::move(z);
            break;
        }
        if (cache) cache->preact.push_back(z);
        Tensor2<T> h(z.rows, z.cols);
        for (std::size_t i = 0; i < z.data.size(); ++i) {
            h.data[i] = z.data[i] > T(0) ? z.data[i] : leaky_slope * z.data[i];
        }
        if (train && dropout > T(0)) {
            Tensor2<T> m(z.rows, z.cols);
            const T keep_scale = T(1) / (T(1) - dropout);
            for (std::size_t r = 0; r < z.rows; ++r) {
                T* mrow = m.row(r);
                for (std::size_t j = 0; j < z.cols; ++j) {
                    mrow[j] = row_rngs[r].uniform() >= double(dropout) ? keep_scale : T(0);
                }
            }
            for (std::size_t i = 0; i < h.data.size(); ++i) h.data[i] *= m.data[i];
            if (cache) cache->mask.push_back(std::move(m));
        } else if (cache) {
            cache->mask.emplace_back();
        }
        act = std::move(h);
    }

    std::vector<T> prob(input.rows);
    for (std::size_t r = 0; r < input.rows; ++r) prob[r] = sigmoid(act(r, 0));
    if (cache) cache->prob = prob;
    return prob;
}

// d_logit is dL/d(final pre-sigmoid logit) per row.
template <typename T>
void mlp_backward_batch(const MlpParams<T>& mlp, const MlpCache<T>& cache, T leaky_slope,
                        std::span<const T> d_logit, Tensor2<T>& d_input,
                        MlpParams<T>& grads, int n_threads = 1) {
    const std::size_t n_layers = mlp.weights.size();
    Tensor2<T> delta(cache.inputs[0].rows, 1);
    for (std::size_t r = 0; r < delta.rows; ++r) delta(r, 0) = d_logit[r];

    for (std::size_t l = n_layers; l-- > 0;) {
        const Tensor2<T>& input = cache.inputs[l];
        matmul_mt(input, delta, grads.weights[l], true, false, T(1), T(1), n_threads);
        for (std::size_t r = 0; r < delta.rows; ++r) {
            const T* row = delta.row(r);
            for (std::size_t j = 0; j < delta.cols; ++j) grads.biases[l].data[j] += row[j];
        }
        Tensor2<T> d_prev;
        matmul_mt(delta, mlp.weights[l], d_prev, false, true, T(1), T(0), n_threads);
        if (l > 0) {
            const Tensor2<T>& z = cache.preact[l - 1];
            const Tensor2<T>& m = cache.mask[l - 1];
            const bool has_mask = m.data.size() == d_prev.data.size();
            for (std::size_t i = 0; i < d_prev.data.size(); ++i) {
                T v = d_prev.data[i];
                if (has_mask) v *= m.data[i];
                d_prev.data[i] = z.data[i] > T(0) ? v : leaky_slope * v;
            }
        }
        delta = std::move(d_prev);
    }
    d_input = std::move(delta);
}

// ---------------------------------------------------------------------------
// Binary cross-entropy over clamped probabilities.

inline constexpr double kBceClamp = 1e-7;

template <typename T>
double bce_loss(std::span<const T> predictions, std::span<const T> labels) {
    if (predictions.size() != labels.size()) {
        throw DimensionError("bce_loss: " + std::to_string(predictions.size()) +
                             " predictions vs " + std::to_string(labels.size()) + " labels");
    }
    if (predictions.empty()) throw DimensionError("bce_loss: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double p = std::clamp(double(predictions[i]), kBceClamp, 1.0 - kBceClamp);
        const double y = double(labels[i]);
        sum += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    }
    return sum / double(predictions.size());
}

// dL/dlogit for mean BCE over σ(logit); zero where the clamp is active.
template <typename T>
T bce_dlogit(T prob, T label, std::size_t batch) {
    const double p = double(prob);
    if (p < kBceClamp || p > 1.0 - kBceClamp) return T(0);
    return T((p - double(label)) / double(batch));
}

}  // namespace log2sig::nn
