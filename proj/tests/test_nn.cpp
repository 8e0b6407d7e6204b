#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "log2sig/nn/adam.hpp"
#include "log2sig/nn/ops.hpp"
#include "log2sig/rng.hpp"

using namespace log2sig;

namespace {

Tensor2<double> random_tensor(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
    Tensor2<double> t(r, c);
    for (double& v : t.data) v = rng.normal(0.0, scale);
    return t;
}

Tensor2<double> identity(std::size_t d) {
    Tensor2<double> t(d, d, 0.0);
    for (std::size_t i = 0; i < d; ++i) t(i, i) = 1.0;
    return t;
}

// Weighted sum of outputs as the scalar objective for gradient checks.
double weighted_sum(const Tensor2<double>& y, const Tensor2<double>& w) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.data.size(); ++i) s += y.data[i] * w.data[i];
    return s;
}

constexpr double kFdStep = 1e-5;
constexpr double kFdTol = 1e-4;

// Relative error at 1e-4; gradients below the finite-difference noise floor
// are compared against it instead.
void check_grad(double analytic, double numeric) {
    const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-5});
    CHECK(std::fabs(analytic - numeric) / denom <= kFdTol);
}

}  // namespace

TEST_CASE("gate closed forms") {
    Rng rng(1);
    Tensor2<double> x = random_tensor(4, 5, rng);

    SUBCASE("Wu=I, Wv=0 halves the input") {
        Tensor2<double> zero(5, 5, 0.0);
        const auto out = nn::gate_forward(x, identity(5), zero);
        for (std::size_t i = 0; i < x.data.size(); ++i) {
            CHECK(out.data[i] == doctest::Approx(0.5 * x.data[i]).epsilon(1e-12));
        }
    }
    SUBCASE("zero input maps to zero") {
        Tensor2<double> z(3, 5, 0.0);
        Tensor2<double> wu = random_tensor(5, 5, rng);
        Tensor2<double> wv = random_tensor(5, 5, rng);
        const auto out = nn::gate_forward(z, wu, wv);
        for (double v : out.data) CHECK(v == 0.0);
    }
    SUBCASE("matches an independent elementwise evaluation") {
        Tensor2<double> xs = random_tensor(2, 3, rng);
        Tensor2<double> wu = random_tensor(3, 3, rng);
        Tensor2<double> wv = random_tensor(3, 3, rng);
        const auto out = nn::gate_forward(xs, wu, wv);
        for (std::size_t r = 0; r < 2; ++r) {
            for (std::size_t j = 0; j < 3; ++j) {
                double u = 0.0, v = 0.0;
                for (std::size_t i = 0; i < 3; ++i) {
                    u += xs(r, i) * wu(i, j);
                    v += xs(r, i) * wv(i, j);
                }
                const double expect = u * (1.0 / (1.0 + std::exp(-v)));
                CHECK(out(r, j) == doctest::Approx(expect).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("gate gradients match finite differences") {
    Rng rng(2);
    Tensor2<double> x = random_tensor(3, 4, rng);
    Tensor2<double> wu = random_tensor(4, 4, rng, 0.5);
    Tensor2<double> wv = random_tensor(4, 4, rng, 0.5);
    Tensor2<double> lw = random_tensor(3, 4, rng);

    nn::GateCache<double> cache;
    (void)nn::gate_forward(x, wu, wv, &cache);
    Tensor2<double> d_x, d_wu(4, 4, 0.0), d_wv(4, 4, 0.0);
    nn::gate_backward(x, wu, wv, cache, lw, d_x, d_wu, d_wv);

    auto loss_at = [&] { return weighted_sum(nn::gate_forward(x, wu, wv), lw); };
    for (Tensor2<double>* p : {&x, &wu, &wv}) {
        Tensor2<double>* g = p == &x ? &d_x : (p == &wu ? &d_wu : &d_wv);
        for (std::size_t i = 0; i < p->data.size(); ++i) {
            const double keep = p->data[i];
            p->data[i] = keep + kFdStep;
            const double up = loss_at();
            p->data[i] = keep - kFdStep;
            const double dn = loss_at();
            p->data[i] = keep;
            check_grad(g->data[i], (up - dn) / (2.0 * kFdStep));
        }
    }
}

TEST_CASE("ssm scan closed forms") {
    Rng rng(3);
    const std::size_t d = 4, len = 6;
    Tensor2<double> xhat = random_tensor(len, d, rng);
    Tensor2<double> zero(d, d, 0.0);
    Tensor2<double> eye = identity(d);

    SUBCASE("A=0 is memoryless") {
        const auto z = nn::ssm_scan_forward(xhat, zero, eye, eye);
        for (std::size_t i = 0; i < z.data.size(); ++i) {
            CHECK(std::fabs(z.data[i] - xhat.data[i]) <= 1e-12);
        }
    }
    SUBCASE("A=B=C=I gives prefix sums") {
        const auto z = nn::ssm_scan_forward(xhat, eye, eye, eye);
        for (std::size_t j = 0; j < d; ++j) {
            double acc = 0.0;
            for (std::size_t t = 0; t < len; ++t) {
                acc += xhat(t, j);
                CHECK(std::fabs(z(t, j) - acc) <= 1e-12);
            }
        }
    }
    SUBCASE("scan is linear in the input when gating is bypassed") {
        Tensor2<double> a = random_tensor(d, d, rng, 0.3);
        Tensor2<double> b = random_tensor(d, d, rng, 0.5);
        Tensor2<double> c = random_tensor(d, d, rng, 0.5);
        Tensor2<double> x2 = random_tensor(len, d, rng);
        const double ca = 1.7, cb = -0.6;
        Tensor2<double> mix(len, d);
        for (std::size_t i = 0; i < mix.data.size(); ++i) {
            mix.data[i] = ca * xhat.data[i] + cb * x2.data[i];
        }
        const auto z1 = nn::ssm_scan_forward(xhat, a, b, c);
        const auto z2 = nn::ssm_scan_forward(x2, a, b, c);
        const auto zm = nn::ssm_scan_forward(mix, a, b, c);
        for (std::size_t i = 0; i < zm.data.size(); ++i) {
            CHECK(std::fabs(zm.data[i] - (ca * z1.data[i] + cb * z2.data[i])) <= 1e-9);
        }
    }
    SUBCASE("non-finite state names the step") {
        Tensor2<double> bad = xhat;
        bad(2, 1) = std::numeric_limits<double>::infinity();
        try {
            (void)nn::ssm_scan_forward(bad, zero, eye, eye);
            FAIL("expected NumericError");
        } catch (const NumericError& e) {
            CHECK(std::string(e.what()).find("t=2") != std::string::npos);
        }
    }
}

TEST_CASE("ssm scan gradients match finite differences") {
    Rng rng(4);
    const std::size_t d = 4, len = 5;
    Tensor2<double> xhat = random_tensor(len, d, rng);
    Tensor2<double> a = random_tensor(d, d, rng, 0.4);
    Tensor2<double> b = random_tensor(d, d, rng, 0.5);
    Tensor2<double> c = random_tensor(d, d, rng, 0.5);
    Tensor2<double> lw = random_tensor(len, d, rng);

    nn::ScanCache<double> cache;
    (void)nn::ssm_scan_forward(xhat, a, b, c, &cache);
    Tensor2<double> d_x, d_a(d, d, 0.0), d_b(d, d, 0.0), d_c(d, d, 0.0);
    nn::ssm_scan_backward(xhat, a, b, c, cache, lw, d_x, d_a, d_b, d_c);

    auto loss_at = [&] { return weighted_sum(nn::ssm_scan_forward(xhat, a, b, c), lw); };
    struct Pair {
        Tensor2<double>* p;
        Tensor2<double>* g;
    };
    for (auto [p, g] : {Pair{&xhat, &d_x}, Pair{&a, &d_a}, Pair{&b, &d_b}, Pair{&c, &d_c}}) {
        for (std::size_t i = 0; i < p->data.size(); ++i) {
            const double keep = p->data[i];
            p->data[i] = keep + kFdStep;
            const double up = loss_at();
            p->data[i] = keep - kFdStep;
            const double dn = loss_at();
            p->data[i] = keep;
            check_grad(g->data[i], (up - dn) / (2.0 * kFdStep));
        }
    }
}

TEST_CASE("rmsnorm forward behavior") {
    Rng rng(5);
    Tensor2<double> gain(1, 6, 1.0);

    SUBCASE("all-ones row keeps unit entries") {
        Tensor2<double> ones(2, 6, 1.0);
        const auto y = nn::rmsnorm_forward(ones, gain);
        for (double v : y.data) CHECK(v == doctest::Approx(1.0).epsilon(1e-5));
    }
    SUBCASE("zero row survives via epsilon") {
        Tensor2<double> z(1, 6, 0.0);
        const auto y = nn::rmsnorm_forward(z, gain);
        for (double v : y.data) CHECK(v == 0.0);
    }
    SUBCASE("random row has unit rms") {
        Tensor2<double> x = random_tensor(1, 6, rng, 3.0);
        const auto y = nn::rmsnorm_forward(x, gain);
        double ms = 0.0;
        for (double v : y.data) ms += v * v;
        ms /= 6.0;
        CHECK(std::sqrt(ms) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("rmsnorm gradients match finite differences") {
    Rng rng(6);
    Tensor2<double> x = random_tensor(3, 5, rng);
    Tensor2<double> gain = random_tensor(1, 5, rng, 0.5);
    Tensor2<double> lw = random_tensor(3, 5, rng);

    std::vector<double> inv;
    (void)nn::rmsnorm_forward(x, gain, &inv);
    Tensor2<double> d_x, d_gain(1, 5, 0.0);
    nn::rmsnorm_backward(x, gain, inv, lw, d_x, d_gain);

    auto loss_at = [&] { return weighted_sum(nn::rmsnorm_forward(x, gain), lw); };
    struct Pair {
        Tensor2<double>* p;
        Tensor2<double>* g;
    };
    for (auto [p, g] : {Pair{&x, &d_x}, Pair{&gain, &d_gain}}) {
        for (std::size_t i = 0; i < p->data.size(); ++i) {
            const double keep = p->data[i];
            p->data[i] = keep + kFdStep;
            const double up = loss_at();
            p->data[i] = keep - kFdStep;
            const double dn = loss_at();
            p->data[i] = keep;
            check_grad(g->data[i], (up - dn) / (2.0 * kFdStep));
        }
    }
}

namespace {

nn::MlpParams<double> make_mlp(const std::vector<int>& dims, Rng& rng, double scale) {
    nn::MlpParams<double> mlp;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        mlp.weights.push_back(random_tensor(dims[l], dims[l + 1], rng, scale));
        mlp.biases.push_back(random_tensor(1, dims[l + 1], rng, scale));
    }
    return mlp;
}

double mlp_single(const Tensor2<double>& input, const nn::MlpParams<double>& mlp, bool train,
                  std::uint64_t seed) {
    const std::uint64_t seeds[1] = {seed};
    return nn::mlp_forward_batch<double>(input, mlp, 0.3, 0.01, train,
                                         std::span<const std::uint64_t>(seeds, 1),
                                         nullptr)[0];
}

}  // namespace

TEST_CASE("mlp closed forms and determinism") {
    Rng rng(7);
    SUBCASE("zero single layer gives 0.5") {
        nn::MlpParams<double> mlp;
        mlp.weights.emplace_back(4, 1, 0.0);
        mlp.biases.emplace_back(1, 1, 0.0);
        Tensor2<double> x = random_tensor(1, 4, rng);
        CHECK(mlp_single(x, mlp, false, 0) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("eval mode is deterministic") {
        auto mlp = make_mlp({6, 5, 1}, rng, 0.7);
        Tensor2<double> x = random_tensor(1, 6, rng);
        CHECK(mlp_single(x, mlp, false, 1) == mlp_single(x, mlp, false, 2));
    }
    SUBCASE("train mode dropout is reproducible by seed") {
        auto mlp = make_mlp({6, 5, 1}, rng, 0.7);
        Tensor2<double> x = random_tensor(1, 6, rng);
        CHECK(mlp_single(x, mlp, true, 99) == mlp_single(x, mlp, true, 99));
    }
}

TEST_CASE("mlp gradients match finite differences") {
    Rng rng(8);
    auto mlp = make_mlp({5, 4, 3, 1}, rng, 0.6);
    Tensor2<double> x = random_tensor(2, 5, rng);
    std::vector<double> labels = {1.0, 0.0};

    nn::MlpCache<double> cache;
    const std::uint64_t seeds[2] = {0, 0};
    auto probs = nn::mlp_forward_batch<double>(x, mlp, 0.0, 0.01, false,
                                               std::span<const std::uint64_t>(seeds, 2),
                                               &cache);
    std::vector<double> d_logit(2);
    for (int i = 0; i < 2; ++i) d_logit[i] = nn::bce_dlogit(probs[i], labels[i], 2);

    nn::MlpParams<double> grads;
    for (const auto& w : mlp.weights) grads.weights.emplace_back(w.rows, w.cols, 0.0);
    for (const auto& b : mlp.biases) grads.biases.emplace_back(b.rows, b.cols, 0.0);
    Tensor2<double> d_input;
    nn::mlp_backward_batch<double>(mlp, cache, 0.01, d_logit, d_input, grads);

    auto loss_at = [&] {
        auto p = nn::mlp_forward_batch<double>(x, mlp, 0.0, 0.01, false,
                                               std::span<const std::uint64_t>(seeds, 2),
                                               nullptr);
        return nn::bce_loss<double>(p, labels);
    };
    std::vector<std::pair<Tensor2<double>*, Tensor2<double>*>> pairs;
    for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
        pairs.emplace_back(&mlp.weights[l], &grads.weights[l]);
        pairs.emplace_back(&mlp.biases[l], &grads.biases[l]);
    }
    pairs.emplace_back(&x, &d_input);
    for (auto [p, g] : pairs) {
        for (std::size_t i = 0; i < p->data.size(); ++i) {
            const double keep = p->data[i];
            p->data[i] = keep + kFdStep;
            const double up = loss_at();
            p->data[i] = keep - kFdStep;
            const double dn = loss_at();
            p->data[i] = keep;
            check_grad(g->data[i], (up - dn) / (2.0 * kFdStep));
        }
    }
}

TEST_CASE("bce loss values") {
    SUBCASE("even odds against a positive label") {
        const double p[1] = {0.5};
        const double y[1] = {1.0};
        CHECK(nn::bce_loss<double>(std::span<const double>(p, 1),
                                   std::span<const double>(y, 1)) ==
              doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }
    SUBCASE("near-perfect prediction") {
        const double p[1] = {1.0 - 1e-7};
        const double y[1] = {1.0};
        CHECK(nn::bce_loss<double>(std::span<const double>(p, 1),
                                   std::span<const double>(y, 1)) ==
              doctest::Approx(1e-7).epsilon(1e-2));
    }
    SUBCASE("random batch matches an independent summation") {
        Rng rng(11);
        std::vector<double> p(37), y(37);
        for (std::size_t i = 0; i < p.size(); ++i) {
            p[i] = rng.uniform(0.01, 0.99);
            y[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
        }
        double expect = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            expect -= y[i] * std::log(p[i]) + (1.0 - y[i]) * std::log1p(-p[i]);
        }
        expect /= double(p.size());
        CHECK(nn::bce_loss<double>(p, y) == doctest::Approx(expect).epsilon(1e-12));
    }
    SUBCASE("length mismatch") {
        std::vector<double> p(3, 0.5), y(2, 0.0);
        CHECK_THROWS_AS((void)nn::bce_loss<double>(p, y), DimensionError);
    }
}

TEST_CASE("adam behavior") {
    SUBCASE("zero gradient leaves parameters unchanged") {
        Tensor2<double> p(2, 2, 1.5);
        Tensor2<double> g(2, 2, 0.0);
        std::vector<Tensor2<double>*> ps = {&p}, gs = {&g};
        nn::AdamState<double> st;
        std::vector<std::pair<std::string, Tensor2<double>*>> named = {{"p", &p}};
        st.init(named);
        for (int i = 0; i < 5; ++i) nn::adam_step(ps, gs, st);
        for (double v : p.data) CHECK(v == 1.5);
    }
    SUBCASE("first step from zero state moves by ~lr against the gradient") {
        Tensor2<double> p(1, 1, 0.0);
        Tensor2<double> g(1, 1, 0.37);
        std::vector<Tensor2<double>*> ps = {&p}, gs = {&g};
        nn::AdamState<double> st;
        st.lr = 5e-4;
        std::vector<std::pair<std::string, Tensor2<double>*>> named = {{"p", &p}};
        st.init(named);
        nn::adam_step(ps, gs, st);
        const double expect = -st.lr * 0.37 / (std::fabs(0.37) + st.eps);
        CHECK(p(0, 0) == doctest::Approx(expect).epsilon(1e-9));
    }
    SUBCASE("constant gradient converges to lr-sized steps") {
        Tensor2<double> p(1, 1, 0.0);
        Tensor2<double> g(1, 1, -2.5);
        std::vector<Tensor2<double>*> ps = {&p}, gs = {&g};
        nn::AdamState<double> st;
        st.lr = 1e-3;
        std::vector<std::pair<std::string, Tensor2<double>*>> named = {{"p", &p}};
        st.init(named);
        double prev = 0.0;
        double step_size = 0.0;
        for (int i = 0; i < 10000; ++i) {
            nn::adam_step(ps, gs, st);
            step_size = p(0, 0) - prev;
            prev = p(0, 0);
        }
        CHECK(std::fabs(step_size) == doctest::Approx(st.lr).epsilon(0.01));
        CHECK(step_size > 0.0);  // gradient is negative
    }
    SUBCASE("non-finite gradient raises and skips the update") {
        Tensor2<double> p(1, 2, 1.0);
        Tensor2<double> g(1, 2, 0.0);
        g(0, 1) = std::nan("");
        std::vector<Tensor2<double>*> ps = {&p}, gs = {&g};
        nn::AdamState<double> st;
        std::vector<std::pair<std::string, Tensor2<double>*>> named = {{"p", &p}};
        st.init(named);
        CHECK_THROWS_AS(nn::adam_step(ps, gs, st), NumericError);
        CHECK(p(0, 0) == 1.0);
        CHECK(st.step == 0);
    }
}
