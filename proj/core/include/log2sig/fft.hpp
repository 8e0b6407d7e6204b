#pragma once

#include <complex>
#include <vector>

namespace log2sig {

using Complex = std::complex<double>;

// In-place DFT of arbitrary length (radix-2 when the length is a power of
// two, Bluestein otherwise). The inverse is scaled by 1/N so that
// ifft(fft(x)) == x.
void fft(std::vector<Complex>& data);
void ifft(std::vector<Complex>& data);

}  // namespace log2sig
