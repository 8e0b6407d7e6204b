#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "log2sig/events.hpp"
#include "log2sig/nn/adam.hpp"
#include "log2sig/nn/ops.hpp"

namespace log2sig {

struct EncoderConfig {
    int d = 64;
    int n_layers = 2;
    int l_max = 128;
    int vocab_size = 0;  // includes the reserved pad slot 0
    int k_modes = 3;
    int channels = 7;
    bool residual = true;
    bool comp_full_affine = false;
    std::vector<int> mlp_hidden = {256, 128, 32};
    double dropout = 0.3;
    double leaky_slope = 0.01;

    int pseudo_tokens() const { return channels * (k_modes + 1); }
    int flatten_len() const { return (l_max + pseudo_tokens()) * d; }
    void validate() const;
};

// One training example: padded token sequence, fused frequency vector, label.
struct DaySample {
    std::string user;
    Day day = 0;
    std::vector<std::int32_t> tokens;  // length l_max, left-padded with 0
    int real_len = 0;
    std::vector<double> z;  // length C(K+1)
    int label = 0;
};

// Vocabulary indices shift by one (0 is the pad); longer days keep the most
// recent tokens.
DaySample make_day_sample(const DaySession& session, const std::vector<double>& z,
                          const EncoderConfig& cfg);

template <typename T>
struct SsmLayer {
    Tensor2<T> gain;  // 1 x d
    Tensor2<T> w_u, w_v, a, b, c_out;  // d x d
};

template <typename T>
struct ComponentEncoder {
    // shared map: row_i = z_i * w + bias + pos_i
    Tensor2<T> w;     // 1 x d
    Tensor2<T> bias;  // 1 x d
    Tensor2<T> pos;   // P x d
    // full affine alternative: rows = reshape(full_w z + full_b)
    Tensor2<T> full_w;  // (P d) x P, empty in shared mode
    Tensor2<T> full_b;  // 1 x (P d)
};

template <typename T>
struct ModelParams {
    EncoderConfig cfg;
    Tensor2<T> embedding;  // vocab_size x d
    std::vector<SsmLayer<T>> layers;
    ComponentEncoder<T> comp;
    nn::MlpParams<T> mlp;

    std::vector<std::pair<std::string, Tensor2<T>*>> named_tensors();
    std::vector<std::pair<std::string, const Tensor2<T>*>> named_tensors() const;
};

template <typename T>
ModelParams<T> init_model(const EncoderConfig& cfg, Rng& rng);

template <typename T>
ModelParams<T> zeros_like(const ModelParams<T>& model);

template <typename T>
void accumulate(ModelParams<T>& into, const ModelParams<T>& from);

template <typename From, typename To>
ModelParams<To> cast_model(const ModelParams<From>& model);

template <typename T>
struct LayerCache {
    Tensor2<T> input;
    std::vector<T> inv_rms;
    Tensor2<T> normed;
    nn::GateCache<T> gate;
    Tensor2<T> xhat;
    nn::ScanCache<T> scan;
};

template <typename T>
struct DayCache {
    std::vector<LayerCache<T>> layers;
    Tensor2<T> h_s;  // l_max x d
    Tensor2<T> h_z;  // P x d
};

// Embedding lookup plus n_layers of (RMSNorm -> gate -> scan -> residual).
template <typename T>
Tensor2<T> encode_sequence(const DaySample& sample, const ModelParams<T>& model,
                           DayCache<T>* cache = nullptr);

template <typename T>
Tensor2<T> encode_components(const std::vector<double>& z, const ModelParams<T>& model);

// Row-major flatten of [H_s; H_z] into out (length flatten_len()).
template <typename T>
void fuse_and_flatten(const Tensor2<T>& h_s, const Tensor2<T>& h_z, T* out);

template <typename T>
void forward_day_features(const DaySample& sample, const ModelParams<T>& model, T* features,
                          DayCache<T>* cache = nullptr);

template <typename T>
void backward_day_features(const DaySample& sample, const ModelParams<T>& model,
                           const DayCache<T>& cache, const T* d_features,
                           ModelParams<T>& grads);

// Whole-day probability; train mode draws dropout from mask_seed.
template <typename T>
T forward_day(const DaySample& sample, ModelParams<T>& model, bool train = false,
              std::uint64_t mask_seed = 0);

// Power-iteration estimate of the largest |eigenvalue| of A; the trainer
// warns when any layer drifts above 1.05.
template <typename T>
double spectral_radius_estimate(const Tensor2<T>& a, int iterations = 50);

// ---------------------------------------------------------------------------
// Batch-major engine: the whole minibatch flows through each op as one
// (B*l_max) x d matrix, so the heavy lifting happens in a handful of large
// GEMMs instead of thousands of per-sample ones. Row s*l_max + t is sample
// s at position t. Math is identical to the per-sample path.

template <typename T>
struct BatchLayerCache {
    Tensor2<T> input;
    std::vector<T> inv_rms;
    Tensor2<T> normed;
    Tensor2<T> gate_u;
    Tensor2<T> gate_sig;
    Tensor2<T> xhat;
    Tensor2<T> h;
};

template <typename T>
struct BatchCache {
    std::size_t batch = 0;
    std::vector<BatchLayerCache<T>> layers;
    Tensor2<T> h_s;  // (B*l_max) x d
    Tensor2<T> h_z;  // (B*P) x d
};

template <typename T>
void batch_forward_features(std::span<const DaySample* const> batch,
                            const ModelParams<T>& model, Tensor2<T>& features,
                            BatchCache<T>* cache, int n_threads);

template <typename T>
void batch_backward_features(std::span<const DaySample* const> batch,
                             const ModelParams<T>& model, const BatchCache<T>& cache,
                             const Tensor2<T>& d_features, ModelParams<T>& grads,
                             int n_threads);

// ---------------------------------------------------------------------------
// Implementation

inline void EncoderConfig::validate() const {
    if (d < 1) throw ConfigError("encoder: d must be >= 1");
    if (n_layers < 0) throw ConfigError("encoder: n_layers must be >= 0");
    if (l_max < 1) throw ConfigError("encoder: l_max must be >= 1");
    if (vocab_size < 2) throw ConfigError("encoder: vocab_size must include pad and tokens");
    if (k_modes < 0 || channels < 1) throw ConfigError("encoder: bad K or C");
    if (mlp_hidden.empty()) throw ConfigError("encoder: mlp_hidden must be non-empty");
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("encoder: dropout in [0,1)");
}

template <typename T>
std::vector<std::pair<std::string, Tensor2<T>*>> ModelParams<T>::named_tensors() {
    std::vector<std::pair<std::string, Tensor2<T>*>> out;
    out.emplace_back("embedding", &embedding);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string p = "layer" + std::to_string(l) + ".";
        out.emplace_back(p + "gain", &layers[l].gain);
        out.emplace_back(p + "w_u", &layers[l].w_u);
        out.emplace_back(p + "w_v", &layers[l].w_v);
        out.emplace_back(p + "a", &layers[l].a);
        out.emplace_back(p + "b", &layers[l].b);
        out.emplace_back(p + "c_out", &layers[l].c_out);
    }
    if (cfg.comp_full_affine) {
        out.emplace_back("comp.full_w", &comp.full_w);
        out.emplace_back("comp.full_b", &comp.full_b);
    } else {
        out.emplace_back("comp.w", &comp.w);
        out.emplace_back("comp.bias", &comp.bias);
        out.emplace_back("comp.pos", &comp.pos);
    }
    for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
        out.emplace_back("mlp.w" + std::to_string(l), &mlp.weights[l]);
        out.emplace_back("mlp.b" + std::to_string(l), &mlp.biases[l]);
    }
    return out;
}

template <typename T>
std::vector<std::pair<std::string, const Tensor2<T>*>> ModelParams<T>::named_tensors() const {
    auto mutable_list = const_cast<ModelParams<T>*>(this)->named_tensors();
    std::vector<std::pair<std::string, const Tensor2<T>*>> out;
    out.reserve(mutable_list.size());
    for (auto& [name, t] : mutable_list) out.emplace_back(name, t);
    return out;
}

template <typename T>
ModelParams<T> init_model(const EncoderConfig& cfg, Rng& rng) {
    cfg.validate();
    ModelParams<T> m;
    m.cfg = cfg;
    const int d = cfg.d;

    auto uniform_fill = [&rng](Tensor2<T>& t, double limit) {
        for (T& v : t.data) v = T(rng.uniform(-limit, limit));
    };
    auto gauss_fill = [&rng](Tensor2<T>& t, double sd) {
        for (T& v : t.data) v = T(rng.normal(0.0, sd));
    };

    m.embedding = Tensor2<T>(cfg.vocab_size, d);
    gauss_fill(m.embedding, 0.02);

    const double lim = 1.0 / std::sqrt(double(d));
    m.layers.resize(cfg.n_layers);
    for (auto& layer : m.layers) {
        layer.gain = Tensor2<T>(1, d, T(1));
        layer.w_u = Tensor2<T>(d, d);
        layer.w_v = Tensor2<T>(d, d);
        layer.b = Tensor2<T>(d, d);
        layer.c_out = Tensor2<T>(d, d);
        uniform_fill(layer.w_u, lim);
        uniform_fill(layer.w_v, lim);
        uniform_fill(layer.b, lim);
        uniform_fill(layer.c_out, lim);
        layer.a = Tensor2<T>(d, d, T(0));
        for (int i = 0; i < d; ++i) layer.a(i, i) = T(0.9);
    }

    const int p = cfg.pseudo_tokens();
    if (cfg.comp_full_affine) {
        m.comp.full_w = Tensor2<T>(std::size_t(p) * d, p);
        uniform_fill(m.comp.full_w, 1.0 / std::sqrt(double(p)));
        m.comp.full_b = Tensor2<T>(1, std::size_t(p) * d, T(0));
    } else {
        m.comp.w = Tensor2<T>(1, d);
        gauss_fill(m.comp.w, 0.02);
        m.comp.bias = Tensor2<T>(1, d, T(0));
        m.comp.pos = Tensor2<T>(p, d);
        gauss_fill(m.comp.pos, 0.02);
    }

    int prev = cfg.flatten_len();
    for (int width : cfg.mlp_hidden) {
        Tensor2<T> w(prev, width);
        uniform_fill(w, 1.0 / std::sqrt(double(prev)));
        m.mlp.weights.push_back(std::move(w));
        m.mlp.biases.emplace_back(1, width, T(0));
        prev = width;
    }
    Tensor2<T> w(prev, 1);
    uniform_fill(w, 1.0 / std::sqrt(double(prev)));
    m.mlp.weights.push_back(std::move(w));
    m.mlp.biases.emplace_back(1, 1, T(0));
    return m;
}

template <typename T>
ModelParams<T> zeros_like(const ModelParams<T>& model) {
    ModelParams<T> z;
    z.cfg = model.cfg;
    z.embedding = Tensor2<T>(model.embedding.rows, model.embedding.cols, T(0));
    z.layers.resize(model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& src = model.layers[l];
        auto& dst = z.layers[l];
        dst.gain = Tensor2<T>(src.gain.rows, src.gain.cols, T(0));
        dst.w_u = Tensor2<T>(src.w_u.rows, src.w_u.cols, T(0));
        dst.w_v = Tensor2<T>(src.w_v.rows, src.w_v.cols, T(0));
        dst.a = Tensor2<T>(src.a.rows, src.a.cols, T(0));
        dst.b = Tensor2<T>(src.b.rows, src.b.cols, T(0));
        dst.c_out = Tensor2<T>(src.c_out.rows, src.c_out.cols, T(0));
    }
    auto zero_of = [](const Tensor2<T>& t) { return Tensor2<T>(t.rows, t.cols, T(0)); };
    z.comp.w = zero_of(model.comp.w);
    z.comp.bias = zero_of(model.comp.bias);
    z.comp.pos = zero_of(model.comp.pos);
    z.comp.full_w = zero_of(model.comp.full_w);
    z.comp.full_b = zero_of(model.comp.full_b);
    for (const auto& wt : model.mlp.weights) z.mlp.weights.push_back(zero_of(wt));
    for (const auto& bt : model.mlp.biases) z.mlp.biases.push_back(zero_of(bt));
    return z;
}

template <typename T>
void accumulate(ModelParams<T>& into, const ModelParams<T>& from) {
    auto dst = into.named_tensors();
    auto src = from.named_tensors();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        for (std::size_t j = 0; j < dst[i].second->data.size(); ++j) {
            dst[i].second->data[j] += src[i].second->data[j];
        }
    }
}

template <typename From, typename To>
ModelParams<To> cast_model(const ModelParams<From>& model) {
    ModelParams<To> out;
    out.cfg = model.cfg;
    auto copy = [](const Tensor2<From>& s) {
        Tensor2<To> t(s.rows, s.cols);
        for (std::size_t i = 0; i < s.data.size(); ++i) t.data[i] = To(s.data[i]);
        return t;
    };
    out.embedding = copy(model.embedding);
    out.layers.resize(model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        out.layers[l].gain = copy(model.layers[l].gain);
        out.layers[l].w_u = copy(model.layers[l].w_u);
        out.layers[l].w_v = copy(model.layers[l].w_v);
        out.layers[l].a = copy(model.layers[l].a);
        out.layers[l].b = copy(model.layers[l].b);
        out.layers[l].c_out = copy(model.layers[l].c_out);
    }
    out.comp.w = copy(model.comp.w);
    out.comp.bias = copy(model.comp.bias);
    out.comp.pos = copy(model.comp.pos);
    out.comp.full_w = copy(model.comp.full_w);
    out.comp.full_b = copy(model.comp.full_b);
    for (const auto& wt : model.mlp.weights) out.mlp.weights.push_back(copy(wt));
    for (const auto& bt : model.mlp.biases) out.mlp.biases.push_back(copy(bt));
    return out;
}

template <typename T>
Tensor2<T> encode_sequence(const DaySample& sample, const ModelParams<T>& model,
                           DayCache<T>* cache) {
    const auto& cfg = model.cfg;
    if (int(sample.tokens.size()) != cfg.l_max) {
        throw DimensionError("encode_sequence: sample has " +
                             std::to_string(sample.tokens.size()) + " tokens, expected l_max=" +
                             std::to_string(cfg.l_max));
    }
    Tensor2<T> x(cfg.l_max, cfg.d);
    for (int t = 0; t < cfg.l_max; ++t) {
        const std::int32_t tok = sample.tokens[t];
        if (tok < 0 || tok >= cfg.vocab_size) {
            throw RangeError("encode_sequence: token index " + std::to_string(tok) +
                             " outside vocabulary of size " + std::to_string(cfg.vocab_size));
        }
        const T* src = model.embedding.row(tok);
        T* dst = x.row(t);
        for (int j = 0; j < cfg.d; ++j) dst[j] = src[j];
    }

    if (cache) cache->layers.assign(model.layers.size(), LayerCache<T>{});
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& layer = model.layers[l];
        LayerCache<T>* lc = cache ? &cache->layers[l] : nullptr;
        if (lc) lc->input = x;
        std::vector<T> inv;
        Tensor2<T> normed = nn::rmsnorm_forward(x, layer.gain, &inv);
        nn::GateCache<T> gc;
        Tensor2<T> xhat = nn::gate_forward(normed, layer.w_u, layer.w_v, &gc);
        nn::ScanCache<T> sc;
        Tensor2<T> z = nn::ssm_scan_forward(xhat, layer.a, layer.b, layer.c_out, &sc);
        if (cfg.residual) {
            for (std::size_t i = 0; i < z.data.size(); ++i) z.data[i] += x.data[i];
        }
        if (lc) {
            lc->inv_rms = std::move(inv);
            lc->normed = std::move(normed);
            lc->gate = std::move(gc);
            lc->xhat = std::move(xhat);
            lc->scan = std::move(sc);
        }
        x = std::move(z);
    }
    if (cache) cache->h_s = x;
    return x;
}

template <typename T>
Tensor2<T> encode_components(const std::vector<double>& z, const ModelParams<T>& model) {
    const auto& cfg = model.cfg;
    const int p = cfg.pseudo_tokens();
    if (int(z.size()) != p) {
        throw DimensionError("encode_components: z has " + std::to_string(z.size()) +
                             " entries, expected C(K+1)=" + std::to_string(p));
    }
    for (double v : z) {
        if (!std::isfinite(v)) throw NumericError("encode_components: non-finite z");
    }
    Tensor2<T> h(p, cfg.d);
    if (cfg.comp_full_affine) {
        for (int i = 0; i < p; ++i) {
            for (int j = 0; j < cfg.d; ++j) {
                const std::size_t flat = std::size_t(i) * cfg.d + j;
                T acc = model.comp.full_b.data[flat];
                const T* wrow = model.comp.full_w.row(flat);
                for (int q = 0; q < p; ++q) acc += wrow[q] * T(z[q]);
                h(i, j) = acc;
            }
        }
    } else {
        for (int i = 0; i < p; ++i) {
            T* row = h.row(i);
            const T* pos = model.comp.pos.row(i);
            for (int j = 0; j < cfg.d; ++j) {
                row[j] = T(z[i]) * model.comp.w.data[j] + model.comp.bias.data[j] + pos[j];
            }
        }
    }
    return h;
}

template <typename T>
void fuse_and_flatten(const Tensor2<T>& h_s, const Tensor2<T>& h_z, T* out) {
    if (h_s.cols != h_z.cols) {
        throw DimensionError("fuse_and_flatten: d mismatch " + std::to_string(h_s.cols) +
                             " vs " + std::to_string(h_z.cols));
    }
    std::size_t idx = 0;
    for (const T v : h_s.data) out[idx++] = v;
    for (const T v : h_z.data) out[idx++] = v;
}

template <typename T>
void forward_day_features(const DaySample& sample, const ModelParams<T>& model, T* features,
                          DayCache<T>* cache) {
    Tensor2<T> h_s = encode_sequence(sample, model, cache);
    Tensor2<T> h_z = encode_components(sample.z, model);
    if (cache) cache->h_z = h_z;
    fuse_and_flatten(h_s, h_z, features);
}

template <typename T>
void backward_day_features(const DaySample& sample, const ModelParams<T>& model,
                           const DayCache<T>& cache, const T* d_features,
                           ModelParams<T>& grads) {
    const auto& cfg = model.cfg;
    const int d = cfg.d;
    const int p = cfg.pseudo_tokens();

    Tensor2<T> d_hs(cfg.l_max, d);
    std::copy(d_features, d_features + std::size_t(cfg.l_max) * d, d_hs.data.begin());
    Tensor2<T> d_hz(p, d);
    std::copy(d_features + std::size_t(cfg.l_max) * d,
              d_features + std::size_t(cfg.l_max + p) * d, d_hz.data.begin());

    // component branch
    if (cfg.comp_full_affine) {
        for (int i = 0; i < p; ++i) {
            for (int j = 0; j < d; ++j) {
                const std::size_t flat = std::size_t(i) * d + j;
                const T g = d_hz(i, j);
                grads.comp.full_b.data[flat] += g;
                T* wrow = grads.comp.full_w.row(flat);
                for (int q = 0; q < p; ++q) wrow[q] += g * T(sample.z[q]);
            }
        }
    } else {
        for (int i = 0; i < p; ++i) {
            const T* g = d_hz.row(i);
            T* dpos = grads.comp.pos.row(i);
            for (int j = 0; j < d; ++j) {
                grads.comp.w.data[j] += g[j] * T(sample.z[i]);
                grads.comp.bias.data[j] += g[j];
                dpos[j] += g[j];
            }
        }
    }

    // sequence branch, layers in reverse
    Tensor2<T> d_x = std::move(d_hs);
    for (std::size_t l = model.layers.size(); l-- > 0;) {
        const auto& layer = model.layers[l];
        const auto& lc = cache.layers[l];
        auto& gl = grads.layers[l];

        Tensor2<T> d_xhat, d_normed, d_in;
        nn::ssm_scan_backward(lc.xhat, layer.a, layer.b, layer.c_out, lc.scan, d_x, d_xhat,
                              gl.a, gl.b, gl.c_out);
        nn::gate_backward(lc.normed, layer.w_u, layer.w_v, lc.gate, d_xhat, d_normed, gl.w_u,
                          gl.w_v);
        nn::rmsnorm_backward(lc.input, layer.gain, lc.inv_rms, d_normed, d_in, gl.gain);
        if (cfg.residual) {
            for (std::size_t i = 0; i < d_in.data.size(); ++i) d_in.data[i] += d_x.data[i];
        }
        d_x = std::move(d_in);
    }

    for (int t = 0; t < cfg.l_max; ++t) {
        T* dst = grads.embedding.row(sample.tokens[t]);
        const T* src = d_x.row(t);
        for (int j = 0; j < d; ++j) dst[j] += src[j];
    }
}

template <typename T>
T forward_day(const DaySample& sample, ModelParams<T>& model, bool train,
              std::uint64_t mask_seed) {
    const auto& cfg = model.cfg;
    Tensor2<T> features(1, cfg.flatten_len());
    forward_day_features(sample, model, features.row(0));
    const std::uint64_t seeds[1] = {mask_seed};
    auto probs = nn::mlp_forward_batch<T>(features, model.mlp, T(cfg.dropout),
                                          T(cfg.leaky_slope), train,
                                          std::span<const std::uint64_t>(seeds, 1), nullptr);
    return probs[0];
}

template <typename T>
double spectral_radius_estimate(const Tensor2<T>& a, int iterations) {
    const std::size_t d = a.rows;
    std::vector<double> v(d);
    for (std::size_t i = 0; i < d; ++i) v[i] = 1.0 + 0.01 * double(i % 7);
    double norm = 0.0;
    for (int it = 0; it < iterations; ++it) {
        std::vector<double> next(d, 0.0);
        for (std::size_t i = 0; i < d; ++i) {
            const T* row = a.row(i);
            for (std::size_t j = 0; j < d; ++j) next[j] += v[i] * double(row[j]);
        }
        norm = 0.0;
        for (double x : next) norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 1e-300) return 0.0;
        for (std::size_t i = 0; i < d; ++i) v[i] = next[i] / norm;
    }
    return norm;
}

namespace batch_detail {

template <typename T>
void ensure(Tensor2<T>& t, std::size_t rows, std::size_t cols) {
    if (t.rows != rows || t.cols != cols) t = Tensor2<T>(rows, cols);
}

// h[s,t] = h[s,t-1] * A + drive[s,t]; drive is preloaded into h. One strided
// GEMM per step covers every sample: the (B x d) step view of the
// sample-major buffer has leading dimension len*d.
template <typename T>
void scan_steps_inplace(Tensor2<T>& h, const Tensor2<T>& a, std::size_t b, std::size_t len) {
    const std::size_t d = a.rows;
    for (std::size_t t = 1; t < len; ++t) {
        nn::gemm_raw(false, false, int(b), int(d), int(d), T(1),
                     h.data.data() + (t - 1) * d, int(len * d), a.data.data(), int(d), T(1),
                     h.data.data() + t * d, int(len * d));
    }
}

// g[s,t] += g[s,t+1] * A^T, reverse time.
template <typename T>
void scan_steps_reverse(Tensor2<T>& g, const Tensor2<T>& a, std::size_t b, std::size_t len) {
    const std::size_t d = a.rows;
    for (std::size_t t = len - 1; t-- > 0;) {
        nn::gemm_raw(false, true, int(b), int(d), int(d), T(1),
                     g.data.data() + (t + 1) * d, int(len * d), a.data.data(), int(d), T(1),
                     g.data.data() + t * d, int(len * d));
    }
}

}  // namespace batch_detail

template <typename T>
void batch_forward_features(std::span<const DaySample* const> batch,
                            const ModelParams<T>& model, Tensor2<T>& features,
                            BatchCache<T>* cache, int n_threads) {
    using batch_detail::ensure;
    const auto& cfg = model.cfg;
    const std::size_t b = batch.size();
    const std::size_t len = std::size_t(cfg.l_max);
    const std::size_t d = std::size_t(cfg.d);
    const std::size_t p = std::size_t(cfg.pseudo_tokens());
    const std::size_t rows = b * len;

    ensure(features, b, std::size_t(cfg.flatten_len()));
    if (cache) {
        cache->batch = b;
        cache->layers.resize(model.layers.size());
    }

    Tensor2<T> x(rows, d);
#pragma omp parallel for schedule(static) num_threads(n_threads)
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(b); ++i) {
        const DaySample& s = *batch[i];
        if (int(s.tokens.size()) != cfg.l_max) {
            continue;  // checked below, cannot throw inside the parallel region
        }
        for (std::size_t t = 0; t < len; ++t) {
            const std::int32_t tok = s.tokens[t];
            if (tok < 0 || tok >= cfg.vocab_size) continue;
            std::copy(model.embedding.row(tok), model.embedding.row(tok) + d,
                      x.row(i * len + t));
        }
    }
    for (std::size_t i = 0; i < b; ++i) {
        const DaySample& s = *batch[i];
        if (int(s.tokens.size()) != cfg.l_max) {
            throw DimensionError("batch_forward: sample has " +
                                 std::to_string(s.tokens.size()) + " tokens, expected l_max=" +
                                 std::to_string(cfg.l_max));
        }
        for (std::int32_t tok : s.tokens) {
            if (tok < 0 || tok >= cfg.vocab_size) {
                throw RangeError("batch_forward: token index " + std::to_string(tok) +
                                 " outside vocabulary of size " +
                                 std::to_string(cfg.vocab_size));
            }
        }
    }

    Tensor2<T> normed, xhat, z;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& layer = model.layers[l];
        BatchLayerCache<T>* lc = cache ? &cache->layers[l] : nullptr;
        if (lc) lc->input = x;

        std::vector<T> inv(rows);
        ensure(normed, rows, d);
#pragma omp parallel for schedule(static) num_threads(n_threads)
        for (std::ptrdiff_t r = 0; r < std::ptrdiff_t(rows); ++r) {
            const T* src = x.row(r);
            T mean_sq = T(0);
            for (std::size_t j = 0; j < d; ++j) mean_sq += src[j] * src[j];
            mean_sq /= T(d);
            const T s = T(1) / std::sqrt(mean_sq + T(nn::kRmsNormEps));
            inv[r] = s;
            T* dst = normed.row(r);
            for (std::size_t j = 0; j < d; ++j) dst[j] = src[j] * s * layer.gain.data[j];
        }

        Tensor2<T> u, sig;
        nn::matmul_mt(normed, layer.w_u, u, false, false, T(1), T(0), n_threads);
        nn::matmul_mt(normed, layer.w_v, sig, false, false, T(1), T(0), n_threads);
        ensure(xhat, rows, d);
#pragma omp parallel for schedule(static) num_threads(n_threads)
        for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(u.data.size()); ++i) {
            const T s = nn::sigmoid(sig.data[i]);
            sig.data[i] = s;
            xhat.data[i] = u.data[i] * s;
        }

        Tensor2<T> h;
        nn::matmul_mt(xhat, layer.b, h, false, false, T(1), T(0), n_threads);
        batch_detail::scan_steps_inplace(h, layer.a, b, len);
        for (std::size_t r = 0; r < rows; ++r) {
            const T* hr = h.row(r);
            for (std::size_t j = 0; j < d; ++j) {
                if (!std::isfinite(double(hr[j]))) {
                    throw NumericError("ssm_scan: non-finite state at step t=" +
                                       std::to_string(r % len));
                }
            }
        }
        nn::matmul_mt(h, layer.c_out, z, false, false, T(1), T(0), n_threads);
        if (cfg.residual) {
#pragma omp parallel for schedule(static) num_threads(n_threads)
            for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(z.data.size()); ++i) {
                z.data[i] += x.data[i];
            }
        }
        if (lc) {
            lc->inv_rms = std::move(inv);
            lc->normed = normed;
            lc->gate_u = std::move(u);
            lc->gate_sig = std::move(sig);
            lc->xhat = xhat;
            lc->h = std::move(h);
        }
        std::swap(x, z);
    }

    // pseudo-token branch + flatten
    Tensor2<T> h_z(b * p, d);
#pragma omp parallel for schedule(static) num_threads(n_threads)
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(b); ++i) {
        const DaySample& s = *batch[i];
        if (cfg.comp_full_affine) {
            for (std::size_t row = 0; row < p; ++row) {
                T* dst = h_z.row(i * p + row);
                for (std::size_t j = 0; j < d; ++j) {
                    const std::size_t flat = row * d + j;
                    T acc = model.comp.full_b.data[flat];
                    const T* wrow = model.comp.full_w.row(flat);
                    for (std::size_t q = 0; q < p; ++q) acc += wrow[q] * T(s.z[q]);
                    dst[j] = acc;
                }
            }
        } else {
            for (std::size_t row = 0; row < p; ++row) {
                T* dst = h_z.row(i * p + row);
                const T* pos = model.comp.pos.row(row);
                const T zi = T(s.z[row]);
                for (std::size_t j = 0; j < d; ++j) {
                    dst[j] = zi * model.comp.w.data[j] + model.comp.bias.data[j] + pos[j];
                }
            }
        }
        // sample block of H_s is already the row-major flatten
        T* out = features.row(i);
        std::copy(x.row(i * len), x.row(i * len) + len * d, out);
        std::copy(h_z.row(i * p), h_z.row(i * p) + p * d, out + len * d);
    }
    for (std::size_t i = 0; i < b; ++i) {
        const DaySample& s = *batch[i];
        if (s.z.size() != p) {
            throw DimensionError("batch_forward: z has " + std::to_string(s.z.size()) +
                                 " entries, expected C(K+1)=" + std::to_string(p));
        }
        for (double v : s.z) {
            if (!std::isfinite(v)) throw NumericError("batch_forward: non-finite z");
        }
    }
    if (cache) {
        cache->h_s = std::move(x);
        cache->h_z = std::move(h_z);
    }
}

template <typename T>
void batch_backward_features(std::span<const DaySample* const> batch,
                             const ModelParams<T>& model, const BatchCache<T>& cache,
                             const Tensor2<T>& d_features, ModelParams<T>& grads,
                             int n_threads) {
    using batch_detail::ensure;
    const auto& cfg = model.cfg;
    const std::size_t b = batch.size();
    const std::size_t len = std::size_t(cfg.l_max);
    const std::size_t d = std::size_t(cfg.d);
    const std::size_t p = std::size_t(cfg.pseudo_tokens());
    const std::size_t rows = b * len;

    Tensor2<T> d_x(rows, d);
    Tensor2<T> d_hz(b * p, d);
#pragma omp parallel for schedule(static) num_threads(n_threads)
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(b); ++i) {
        const T* src = d_features.row(i);
        std::copy(src, src + len * d, d_x.row(i * len));
        std::copy(src + len * d, src + (len * d + p * d), d_hz.row(i * p));
    }

    // component branch (accumulation overlaps across samples: sequential)
    for (std::size_t i = 0; i < b; ++i) {
        const DaySample& s = *batch[i];
        if (cfg.comp_full_affine) {
            for (std::size_t row = 0; row < p; ++row) {
                const T* g = d_hz.row(i * p + row);
                for (std::size_t j = 0; j < d; ++j) {
                    const std::size_t flat = row * d + j;
                    grads.comp.full_b.data[flat] += g[j];
                    T* wrow = grads.comp.full_w.row(flat);
                    for (std::size_t q = 0; q < p; ++q) wrow[q] += g[j] * T(s.z[q]);
                }
            }
        } else {
            for (std::size_t row = 0; row < p; ++row) {
                const T* g = d_hz.row(i * p + row);
                T* dpos = grads.comp.pos.row(row);
                const T zi = T(s.z[row]);
                for (std::size_t j = 0; j < d; ++j) {
                    grads.comp.w.data[j] += g[j] * zi;
                    grads.comp.bias.data[j] += g[j];
                    dpos[j] += g[j];
                }
            }
        }
    }

    Tensor2<T> g, dzc, d_xhat, d_u, d_v, d_normed;
    for (std::size_t l = model.layers.size(); l-- > 0;) {
        const auto& layer = model.layers[l];
        const auto& lc = cache.layers[l];
        auto& gl = grads.layers[l];

        // z = H C ; dC += H^T dZ ; dzc = dZ C^T
        nn::matmul_mt(lc.h, d_x, gl.c_out, true, false, T(1), T(1), n_threads);
        nn::matmul_mt(d_x, layer.c_out, dzc, false, true, T(1), T(0), n_threads);

        // reverse-time state gradient
        g = dzc;
        batch_detail::scan_steps_reverse(g, layer.a, b, len);

        // dA += sum_t h_{t-1}^T g_t within each sample block
        if (len > 1) {
            for (std::size_t i = 0; i < b; ++i) {
                nn::gemm_raw(true, false, int(d), int(d), int(len - 1), T(1),
                             lc.h.data.data() + i * len * d, int(d),
                             g.data.data() + i * len * d + d, int(d), T(1),
                             gl.a.data.data(), int(d));
            }
        }
        nn::matmul_mt(lc.xhat, g, gl.b, true, false, T(1), T(1), n_threads);
        nn::matmul_mt(g, layer.b, d_xhat, false, true, T(1), T(0), n_threads);

        // gate backward
        ensure(d_u, rows, d);
        ensure(d_v, rows, d);
#pragma omp parallel for schedule(static) num_threads(n_threads)
        for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(d_xhat.data.size()); ++i) {
            const T s = lc.gate_sig.data[i];
            d_u.data[i] = d_xhat.data[i] * s;
            d_v.data[i] = d_xhat.data[i] * lc.gate_u.data[i] * s * (T(1) - s);
        }
        nn::matmul_mt(lc.normed, d_u, gl.w_u, true, false, T(1), T(1), n_threads);
        nn::matmul_mt(lc.normed, d_v, gl.w_v, true, false, T(1), T(1), n_threads);
        nn::matmul_mt(d_u, layer.w_u, d_normed, false, true, T(1), T(0), n_threads);
        nn::matmul_mt(d_v, layer.w_v, d_normed, false, true, T(1), T(1), n_threads);

        // rmsnorm backward; gain gradient reduced per thread block
        std::vector<T> dgain(d, T(0));
        Tensor2<T> d_in(rows, d);
        {
            std::vector<std::vector<T>> dgain_parts;
#pragma omp parallel num_threads(n_threads)
            {
#ifdef _OPENMP
                const int tid = omp_get_thread_num();
                const int nt = omp_get_num_threads();
#else
                const int tid = 0;
                const int nt = 1;
#endif
#pragma omp single
                dgain_parts.assign(nt, std::vector<T>(d, T(0)));
                std::vector<T>& part = dgain_parts[tid];
                const std::size_t r0 = rows * std::size_t(tid) / nt;
                const std::size_t r1 = rows * std::size_t(tid + 1) / nt;
                for (std::size_t r = r0; r < r1; ++r) {
                    const T* xr = lc.input.row(r);
                    const T* dr = d_normed.row(r);
                    T* out = d_in.row(r);
                    const T inv = lc.inv_rms[r];
                    T dot = T(0);
                    for (std::size_t j = 0; j < d; ++j) {
                        dot += dr[j] * layer.gain.data[j] * xr[j];
                        part[j] += dr[j] * xr[j] * inv;
                    }
                    const T scale = inv * inv * inv * dot / T(d);
                    for (std::size_t j = 0; j < d; ++j) {
                        out[j] = dr[j] * layer.gain.data[j] * inv - xr[j] * scale;
                    }
                }
            }
            for (const auto& part : dgain_parts) {
                for (std::size_t j = 0; j < d; ++j) dgain[j] += part[j];
            }
        }
        for (std::size_t j = 0; j < d; ++j) gl.gain.data[j] += dgain[j];

        if (cfg.residual) {
#pragma omp parallel for schedule(static) num_threads(n_threads)
            for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(d_in.data.size()); ++i) {
                d_in.data[i] += d_x.data[i];
            }
        }
        d_x = std::move(d_in);
    }

    // embedding scatter (token rows collide between samples: sequential)
    for (std::size_t i = 0; i < b; ++i) {
        const DaySample& s = *batch[i];
        for (std::size_t t = 0; t < len; ++t) {
            T* dst = grads.embedding.row(s.tokens[t]);
            const T* src = d_x.row(i * len + t);
            for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
        }
    }
}

}  // namespace log2sig
