#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "log2sig/fft.hpp"
#include "log2sig/tensor.hpp"

namespace log2sig {

struct MvmdConfig {
    enum class Init { Zeros, Uniform, Random };
    enum class Boundary { ArForecast, Mirror };

    int K = 3;
    double alpha = 500.0;
    double tol = 1e-3;
    double tau = 0.0;
    int max_iters = 500;
    Init init = Init::Zeros;
    std::uint64_t seed = 0;
    Boundary boundary = Boundary::ArForecast;

    void validate() const;
};

// Decomposition output U (C x K x T), stored as K matrices of C x T so that
// m_k(t) = modes[k] column t. Center frequencies are in cycles/sample,
// sorted ascending, and modes are reordered to match.
struct ModeTensor {
    std::vector<Matrix> modes;
    std::vector<double> omegas;
    int iters_used = 0;
    double final_residual = 0.0;
    bool converged = false;

    int channels() const { return modes.empty() ? 0 : static_cast<int>(modes[0].rows); }
    int mode_count() const { return static_cast<int>(modes.size()); }
    int samples() const { return modes.empty() ? 0 : static_cast<int>(modes[0].cols); }
};

// One-sided spectrum signal: positive-frequency bins doubled, negative bins
// zeroed, DC (and Nyquist for even T) untouched. Re(result) == x.
std::vector<Complex> analytic_signal(const std::vector<double>& x);

// Alternating minimization of the bandwidth objective in the frequency
// domain. Channels are extended by T/2 on both sides (AR forecast by
// default, mirror fallback) and cropped after inversion.
ModeTensor decompose(const Matrix& F, const MvmdConfig& cfg);

// Element-wise sum over modes.
Matrix reconstruct(const ModeTensor& u);

// Energy-weighted mean positive frequency of a (possibly multichannel) mode,
// computed on the same extended spectrum the solver uses. Returns a negative
// value when the mode has no positive-frequency energy.
double spectral_centroid(const Matrix& mode,
                         MvmdConfig::Boundary boundary = MvmdConfig::Boundary::ArForecast);

// CSV dump for the decompose stage: day,channel,mode_index,value.
void write_mode_tensor_csv_file(const std::string& path, const ModeTensor& u, Day start_day);
ModeTensor read_mode_tensor_csv_file(const std::string& path);

}  // namespace log2sig
