#include "log2sig/fft.hpp"

#include <cmath>
#include <cstddef>

namespace log2sig {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Iterative Cooley-Tukey, n must be a power of two.
void fft_pow2(std::vector<Complex>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * kPi / double(len) * (inverse ? 1.0 : -1.0);
        const Complex wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            Complex w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const Complex u = a[i + k];
                const Complex v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        for (auto& x : a) x /= double(n);
    }
}

// Bluestein's algorithm: express the length-n DFT as a convolution and
// evaluate it with a power-of-two FFT.
void fft_bluestein(std::vector<Complex>& a, bool inverse) {
    const std::size_t n = a.size();
    const std::size_t m = next_pow2(2 * n - 1);

    std::vector<Complex> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        // k^2 mod 2n keeps the phase argument small for large n.
        const std::size_t k2 = (k * k) % (2 * n);
        const double ang = kPi * double(k2) / double(n);
        chirp[k] = Complex(std::cos(ang), inverse ? std::sin(ang) : -std::sin(ang));
    }

    std::vector<Complex> fa(m, Complex(0.0, 0.0));
    std::vector<Complex> fb(m, Complex(0.0, 0.0));
    for (std::size_t k = 0; k < n; ++k) fa[k] = a[k] * chirp[k];
    fb[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) {
        fb[k] = std::conj(chirp[k]);
        fb[m - k] = fb[k];
    }

    fft_pow2(fa, false);
    fft_pow2(fb, false);
    for (std::size_t k = 0; k < m; ++k) fa[k] *= fb[k];
    fft_pow2(fa, true);

    for (std::size_t k = 0; k < n; ++k) a[k] = fa[k] * chirp[k];
    if (inverse) {
        for (auto& x : a) x /= double(n);
    }
}

}  // namespace

void fft(std::vector<Complex>& data) {
    if (data.size() <= 1) return;
    if (is_pow2(data.size())) {
        fft_pow2(data, false);
    } else {
        fft_bluestein(data, false);
    }
}

void ifft(std::vector<Complex>& data) {
    if (data.size() <= 1) return;
    if (is_pow2(data.size())) {
        fft_pow2(data, true);
    } else {
        fft_bluestein(data, true);
    }
}

}  // namespace log2sig
