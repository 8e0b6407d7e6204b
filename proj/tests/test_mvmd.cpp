#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "log2sig/fft.hpp"
#include "log2sig/mvmd.hpp"
#include "log2sig/rng.hpp"

using namespace log2sig;

namespace {

constexpr double kPi = 3.14159265358979323846;

// C=2 two-tone fixture: a=(1,0.8) at 0.05, b=(0.5,1) at 0.25 cycles/sample.
struct TwoTone {
    Matrix f{2, 256};
    Matrix low{2, 256};
    Matrix high{2, 256};

    TwoTone() {
        const double a[2] = {1.0, 0.8};
        const double b[2] = {0.5, 1.0};
        for (std::size_t c = 0; c < 2; ++c) {
            for (std::size_t t = 0; t < 256; ++t) {
                low(c, t) = a[c] * std::cos(2.0 * kPi * 0.05 * double(t));
                high(c, t) = b[c] * std::cos(2.0 * kPi * 0.25 * double(t));
                f(c, t) = low(c, t) + high(c, t);
            }
        }
    }
};

double pearson(const double* x, const double* y, std::size_t n) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

double autocorr_lag1(const double* x, std::size_t n) {
    double m = 0;
    for (std::size_t i = 0; i < n; ++i) m += x[i];
    m /= double(n);
    double num = 0, den = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) num += (x[i] - m) * (x[i + 1] - m);
    for (std::size_t i = 0; i < n; ++i) den += (x[i] - m) * (x[i] - m);
    return den > 0 ? num / den : 0.0;
}

double rel_residual(const Matrix& f, const Matrix& recon) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        num += (f.data[i] - recon.data[i]) * (f.data[i] - recon.data[i]);
        den += f.data[i] * f.data[i];
    }
    return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("analytic signal of a cosine is the complex exponential") {
    const std::size_t T = 100;
    std::vector<double> x(T);
    for (std::size_t t = 0; t < T; ++t) x[t] = std::cos(2.0 * kPi * 0.1 * double(t));
    const auto a = analytic_signal(x);
    for (std::size_t t = 0; t < T; ++t) {
        const Complex expect(std::cos(2.0 * kPi * 0.1 * double(t)),
                             std::sin(2.0 * kPi * 0.1 * double(t)));
        CHECK(std::abs(a[t] - expect) < 1e-9);
        CHECK(std::abs(std::abs(a[t]) - 1.0) < 1e-9);
    }
}

TEST_CASE("analytic signal passes DC through") {
    std::vector<double> x(64, 3.25);
    const auto a = analytic_signal(x);
    for (const Complex& v : a) {
        CHECK(v.real() == doctest::Approx(3.25).epsilon(1e-12));
        CHECK(std::abs(v.imag()) < 1e-10);
    }
}

TEST_CASE("analytic signal real part equals input") {
    Rng rng(7);
    for (std::size_t len : {2u, 17u, 100u, 128u, 255u}) {
        std::vector<double> x(len);
        for (auto& v : x) v = rng.normal();
        const auto a = analytic_signal(x);
        for (std::size_t t = 0; t < len; ++t) {
            CHECK(std::abs(a[t].real() - x[t]) < 1e-10);
        }
    }
}

TEST_CASE("analytic signal rejects scalars") {
    CHECK_THROWS_AS(analytic_signal(std::vector<double>{1.0}), DimensionError);
}

TEST_CASE("constant two-channel signal collapses to a DC mode") {
    Matrix f(2, 64);
    for (std::size_t t = 0; t < 64; ++t) {
        f(0, t) = 4.0;
        f(1, t) = -1.5;
    }
    MvmdConfig cfg;
    cfg.K = 1;
    const ModeTensor u = decompose(f, cfg);
    CHECK(u.omegas[0] < 0.01);
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t t = 0; t < 64; ++t) {
            CHECK(u.modes[0](c, t) == doctest::Approx(f(c, t)).epsilon(0.02));
        }
    }
}

TEST_CASE("two-tone fixture: frequency recovery and correlation") {
    TwoTone fx;
    MvmdConfig cfg;
    cfg.K = 2;
    cfg.alpha = 500.0;
    const ModeTensor u = decompose(fx.f, cfg);

    REQUIRE(u.omegas.size() == 2);
    CHECK(u.omegas[0] == doctest::Approx(0.05).epsilon(0.05));
    CHECK(u.omegas[1] == doctest::Approx(0.25).epsilon(0.05));
    CHECK(u.omegas[0] < u.omegas[1]);

    for (std::size_t c = 0; c < 2; ++c) {
        CHECK(pearson(u.modes[0].row(c), fx.low.row(c), 256) >= 0.95);
        CHECK(pearson(u.modes[1].row(c), fx.high.row(c), 256) >= 0.95);
    }
}

TEST_CASE("two-tone fixture: reconstruction residual") {
    TwoTone fx;
    MvmdConfig cfg;
    cfg.K = 2;

    SUBCASE("soft constraint (tau=0)") {
        cfg.tau = 0.0;
        const ModeTensor u = decompose(fx.f, cfg);
        CHECK(u.final_residual <= 0.05);
        CHECK(rel_residual(fx.f, reconstruct(u)) == doctest::Approx(u.final_residual));
    }
    SUBCASE("dual ascent (tau=0.5) drives the constraint tight") {
        cfg.tau = 0.5;
        const ModeTensor u = decompose(fx.f, cfg);
        CHECK(u.final_residual <= 1e-3);
    }
}

TEST_CASE("reconstruct degenerate cases") {
    SUBCASE("K=1 reconstruction equals the mode") {
        Matrix f(1, 32);
        for (std::size_t t = 0; t < 32; ++t) f(0, t) = std::sin(0.3 * double(t));
        MvmdConfig cfg;
        cfg.K = 1;
        const ModeTensor u = decompose(f, cfg);
        const Matrix r = reconstruct(u);
        for (std::size_t t = 0; t < 32; ++t) CHECK(r(0, t) == u.modes[0](0, t));
    }
    SUBCASE("all-zero tensor") {
        ModeTensor u;
        u.modes.assign(3, Matrix(2, 8, 0.0));
        u.omegas.assign(3, 0.0);
        const Matrix r = reconstruct(u);
        for (double v : r.data) CHECK(v == 0.0);
    }
}

TEST_CASE("decompose input validation") {
    MvmdConfig cfg;
    cfg.K = 3;
    Matrix small(2, 8);
    CHECK_THROWS_AS(decompose(small, cfg), DimensionError);

    Matrix bad(1, 64, 1.0);
    bad(0, 5) = std::nan("");
    cfg.K = 1;
    CHECK_THROWS_AS(decompose(bad, cfg), NumericError);

    MvmdConfig invalid;
    invalid.alpha = -1.0;
    Matrix ok(1, 64, 1.0);
    CHECK_THROWS_AS(decompose(ok, invalid), ConfigError);
}

TEST_CASE("omegas are fixed points of the spectral centroid") {
    TwoTone fx;
    MvmdConfig cfg;
    cfg.K = 2;
    const ModeTensor u = decompose(fx.f, cfg);
    for (int k = 0; k < 2; ++k) {
        const double again = spectral_centroid(u.modes[k]);
        CHECK(std::abs(again - u.omegas[k]) < 1e-6);
    }
}

TEST_CASE("permuting channels permutes modes and keeps omegas") {
    TwoTone fx;
    Matrix swapped(2, 256);
    for (std::size_t t = 0; t < 256; ++t) {
        swapped(0, t) = fx.f(1, t);
        swapped(1, t) = fx.f(0, t);
    }
    MvmdConfig cfg;
    cfg.K = 2;
    const ModeTensor a = decompose(fx.f, cfg);
    const ModeTensor b = decompose(swapped, cfg);
    for (int k = 0; k < 2; ++k) {
        CHECK(std::abs(a.omegas[k] - b.omegas[k]) < 1e-9);
        for (std::size_t t = 0; t < 256; ++t) {
            CHECK(std::abs(a.modes[k](0, t) - b.modes[k](1, t)) < 1e-9);
            CHECK(std::abs(a.modes[k](1, t) - b.modes[k](0, t)) < 1e-9);
        }
    }
}

TEST_CASE("scaling all channels scales modes and keeps omegas") {
    TwoTone fx;
    const double s = 37.5;
    Matrix scaled = fx.f;
    for (double& v : scaled.data) v *= s;
    MvmdConfig cfg;
    cfg.K = 2;
    const ModeTensor a = decompose(fx.f, cfg);
    const ModeTensor b = decompose(scaled, cfg);
    CHECK(a.iters_used == b.iters_used);
    for (int k = 0; k < 2; ++k) {
        CHECK(std::abs(a.omegas[k] - b.omegas[k]) < 1e-9);
        for (std::size_t i = 0; i < a.modes[k].data.size(); ++i) {
            const double want = a.modes[k].data[i] * s;
            CHECK(std::abs(b.modes[k].data[i] - want) <=
                  1e-7 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST_CASE("decompose is deterministic, including random init") {
    TwoTone fx;
    MvmdConfig cfg;
    cfg.K = 2;
    cfg.init = MvmdConfig::Init::Random;
    cfg.seed = 1234;
    const ModeTensor a = decompose(fx.f, cfg);
    const ModeTensor b = decompose(fx.f, cfg);
    CHECK(a.iters_used == b.iters_used);
    for (int k = 0; k < 2; ++k) {
        CHECK(a.omegas[k] == b.omegas[k]);
        CHECK(a.modes[k].data == b.modes[k].data);
    }
}

TEST_CASE("activity-like channels separate spike and trend scales") {
    // Poisson-ish http/email traffic with weekly rhythm plus bursty noise.
    const std::size_t T = 224;
    Matrix f(2, T);
    Rng rng(99);
    for (std::size_t t = 0; t < T; ++t) {
        const double weekly = 1.0 + 0.6 * std::sin(2.0 * kPi * double(t) / 7.0);
        f(0, t) = double(rng.poisson(12.0 * weekly));
        f(1, t) = double(rng.poisson(5.0 * weekly)) + (t % 11 == 0 ? 6.0 : 0.0);
    }
    MvmdConfig cfg;
    cfg.K = 3;
    cfg.alpha = 500.0;
    const ModeTensor u = decompose(f, cfg);

    CHECK(u.omegas[0] < u.omegas[1]);
    CHECK(u.omegas[1] < u.omegas[2]);

    double ac[3];
    for (int k = 0; k < 3; ++k) {
        double sum = 0.0;
        for (std::size_t c = 0; c < 2; ++c) sum += autocorr_lag1(u.modes[k].row(c), T);
        ac[k] = sum / 2.0;
    }
    CHECK(ac[0] > ac[1]);
    CHECK(ac[0] > ac[2]);
}

TEST_CASE("mode tensor csv round trip") {
    TwoTone fx;
    MvmdConfig cfg;
    cfg.K = 2;
    const ModeTensor u = decompose(fx.f, cfg);
    const std::string path = "mvmd_roundtrip.csv";
    write_mode_tensor_csv_file(path, u, days_from_civil(2010, 1, 4));
    const ModeTensor back = read_mode_tensor_csv_file(path);
    REQUIRE(back.mode_count() == 2);
    REQUIRE(back.channels() == 2);
    REQUIRE(back.samples() == 256);
    for (int k = 0; k < 2; ++k) {
        for (std::size_t i = 0; i < u.modes[k].data.size(); ++i) {
            CHECK(back.modes[k].data[i] == doctest::Approx(u.modes[k].data[i]).epsilon(1e-12));
        }
    }
    std::remove(path.c_str());
}
