#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace log2sig {

// One master seed drives every random decision in a run (synthetic data,
// split, resampling, init, dropout). Sub-streams are derived by label so the
// draw order of one stage cannot perturb another.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed), seed_value_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_index(std::uint64_t n) {
        return std::uint64_t(uniform() * double(n)) % n;
    }

    // Box-Muller; explicit so results do not depend on the stdlib's
    // std::normal_distribution algorithm.
    double normal(double mean = 0.0, double stddev = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + stddev * spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return mean + stddev * r * std::cos(theta);
    }

    // Knuth multiplication method; adequate for the rates used here.
    int poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        if (lambda > 60.0) {
            // Split to keep the product method away from double underflow.
            return poisson(lambda / 2.0) + poisson(lambda - lambda / 2.0);
        }
        const double limit = std::exp(-lambda);
        double prod = uniform();
        int count = 0;
        while (prod > limit) {
            ++count;
            prod *= uniform();
        }
        return count;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[uniform_index(i)]);
        }
    }

    Rng derive(std::string_view label) const {
        std::uint64_t h = 1469598103934665603ull;  // FNV-1a
        for (char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        return Rng(splitmix(seed_value_ ^ h));
    }

    Rng derive(std::string_view label, std::uint64_t index) const {
        Rng r = derive(label);
        return Rng(splitmix(r.seed_value_ + 0x9e3779b97f4a7c15ull * (index + 1)));
    }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    std::mt19937_64 engine_;
    std::uint64_t seed_value_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace log2sig
