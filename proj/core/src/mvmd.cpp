#include "log2sig/mvmd.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "log2sig/csv.hpp"
#include "log2sig/rng.hpp"

namespace log2sig {

void MvmdConfig::validate() const {
    if (K < 1) throw ConfigError("mvmd: K must be >= 1");
    if (!(alpha > 0.0)) throw ConfigError("mvmd: alpha must be > 0");
    if (!(tol > 0.0)) throw ConfigError("mvmd: tol must be > 0");
    if (tau < 0.0) throw ConfigError("mvmd: tau must be >= 0");
    if (max_iters < 1) throw ConfigError("mvmd: max_iters must be >= 1");
}

std::vector<Complex> analytic_signal(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n < 2) throw DimensionError("analytic_signal: need T >= 2");
    std::vector<Complex> spec(n);
    for (std::size_t i = 0; i < n; ++i) spec[i] = Complex(x[i], 0.0);
    fft(spec);
    const std::size_t half = n / 2;
    for (std::size_t m = 1; m < half; ++m) spec[m] *= 2.0;
    if (n % 2 == 1) spec[half] *= 2.0;  // odd length has no Nyquist bin
    for (std::size_t m = half + 1; m < n; ++m) spec[m] = Complex(0.0, 0.0);
    ifft(spec);
    return spec;
}

namespace {

// Least-squares AR(p) fit with a relative ridge so the coefficients are
// exactly scale-invariant. Returns false when the system is degenerate.
bool ar_fit(const double* x, std::size_t n, std::size_t p, std::vector<double>& coeff) {
    if (n <= p + 4) return false;
    std::vector<double> r(p * p, 0.0);
    std::vector<double> b(p, 0.0);
    for (std::size_t t = p; t < n; ++t) {
        for (std::size_t i = 0; i < p; ++i) {
            b[i] += x[t] * x[t - 1 - i];
            for (std::size_t j = i; j < p; ++j) {
                r[i * p + j] += x[t - 1 - i] * x[t - 1 - j];
            }
        }
    }
    double trace = 0.0;
    for (std::size_t i = 0; i < p; ++i) trace += r[i * p + i];
    if (!(trace > 0.0)) return false;
    const double ridge = 1e-8 * trace / double(p);
    for (std::size_t i = 0; i < p; ++i) {
        r[i * p + i] += ridge;
        for (std::size_t j = 0; j < i; ++j) r[i * p + j] = r[j * p + i];
    }

    // Gaussian elimination with partial pivoting.
    coeff = b;
    std::vector<double> a = r;
    std::vector<std::size_t> piv(p);
    std::iota(piv.begin(), piv.end(), 0);
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t best = col;
        for (std::size_t row = col + 1; row < p; ++row) {
            if (std::fabs(a[row * p + col]) > std::fabs(a[best * p + col])) best = row;
        }
        if (std::fabs(a[best * p + col]) < 1e-300) return false;
        if (best != col) {
            for (std::size_t j = 0; j < p; ++j) std::swap(a[col * p + j], a[best * p + j]);
            std::swap(coeff[col], coeff[best]);
        }
        const double pivot = a[col * p + col];
        for (std::size_t row = col + 1; row < p; ++row) {
            const double f = a[row * p + col] / pivot;
            if (f == 0.0) continue;
            for (std::size_t j = col; j < p; ++j) a[row * p + j] -= f * a[col * p + j];
            coeff[row] -= f * coeff[col];
        }
    }
    for (std::size_t col = p; col-- > 0;) {
        for (std::size_t j = col + 1; j < p; ++j) coeff[col] -= a[col * p + j] * coeff[j];
        coeff[col] /= a[col * p + col];
        if (!std::isfinite(coeff[col])) return false;
    }
    return true;
}

bool ar_forecast(const double* x, std::size_t n, const std::vector<double>& coeff,
                 std::size_t steps, double amp_limit, std::vector<double>& out) {
    const std::size_t p = coeff.size();
    std::vector<double> buf(x + n - p, x + n);  // buf.back() is the newest sample
    out.assign(steps, 0.0);
    for (std::size_t s = 0; s < steps; ++s) {
        double v = 0.0;
        for (std::size_t i = 0; i < p; ++i) v += coeff[i] * buf[p - 1 - i];
        if (!std::isfinite(v) || std::fabs(v) > amp_limit) return false;
        out[s] = v;
        buf.erase(buf.begin());
        buf.push_back(v);
    }
    return true;
}

// Extension by floor(T/2) left / ceil(T/2) right; total length 2T. The
// forecast variant continues each channel with a least-squares AR model so
// the only spectral discontinuity sits at the far wrap point instead of the
// crop edges; mirroring is the fallback for short or degenerate channels.
std::vector<double> extend_channel(const double* x, std::size_t t_len,
                                   MvmdConfig::Boundary boundary) {
    const std::size_t left = t_len / 2;
    const std::size_t right = t_len - left;
    std::vector<double> ext(2 * t_len, 0.0);
    for (std::size_t i = 0; i < t_len; ++i) ext[left + i] = x[i];

    auto mirror_left = [&] {
        for (std::size_t i = 0; i < left; ++i) ext[left - 1 - i] = x[i];
    };
    auto mirror_right = [&] {
        for (std::size_t i = 0; i < right; ++i) ext[left + t_len + i] = x[t_len - 1 - i];
    };

    if (boundary == MvmdConfig::Boundary::Mirror) {
        mirror_left();
        mirror_right();
        return ext;
    }

    double amp = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < t_len; ++i) {
        amp = std::max(amp, std::fabs(x[i]));
        mean += x[i];
    }
    mean /= double(t_len);
    double var = 0.0;
    for (std::size_t i = 0; i < t_len; ++i) var += (x[i] - mean) * (x[i] - mean);
    const bool degenerate = !(var > 1e-24 * std::max(1.0, amp * amp) * double(t_len));
    const double limit = 10.0 * amp + 1e-30;
    const std::size_t p = std::min<std::size_t>(std::max<std::size_t>(4, t_len / 8), 24);

    std::vector<double> coeff, wing;
    bool done_right = false, done_left = false;
    if (!degenerate) {
        if (ar_fit(x, t_len, p, coeff) &&
            ar_forecast(x, t_len, coeff, right, limit, wing)) {
            for (std::size_t i = 0; i < right; ++i) ext[left + t_len + i] = wing[i];
            done_right = true;
        }
        std::vector<double> rev(x, x + t_len);
        std::reverse(rev.begin(), rev.end());
        if (ar_fit(rev.data(), t_len, p, coeff) &&
            ar_forecast(rev.data(), t_len, coeff, left, limit, wing)) {
            for (std::size_t i = 0; i < left; ++i) ext[left - 1 - i] = wing[i];
            done_left = true;
        }
    }
    if (!done_right) mirror_right();
    if (!done_left) mirror_left();
    return ext;
}

double centroid_of_half_spectra(const std::vector<std::vector<Complex>>& per_channel,
                                std::size_t n_ext) {
    double num = 0.0, den = 0.0;
    for (const auto& bins : per_channel) {
        for (std::size_t m = 1; m < bins.size(); ++m) {
            const double p = std::norm(bins[m]);
            num += double(m) / double(n_ext) * p;
            den += p;
        }
    }
    if (den <= 1e-300) return -1.0;
    return num / den;
}

}  // namespace

ModeTensor decompose(const Matrix& f, const MvmdConfig& cfg) {
    cfg.validate();
    const std::size_t C = f.rows;
    const std::size_t T = f.cols;
    if (C == 0 || T == 0) throw DimensionError("mvmd: empty input");
    if (static_cast<int>(T) < 4 * cfg.K) {
        throw DimensionError("mvmd: T=" + std::to_string(T) + " too small for K=" +
                             std::to_string(cfg.K) + " (need T >= 4K)");
    }
    if (!f.all_finite()) throw NumericError("mvmd: non-finite input");

    const std::size_t K = static_cast<std::size_t>(cfg.K);
    const std::size_t n_ext = 2 * T;
    const std::size_t half = n_ext / 2;
    const std::size_t bins = half + 1;

    // Analytic half-spectra of the extended channels.
    std::vector<std::vector<Complex>> y_hat(C);
    for (std::size_t c = 0; c < C; ++c) {
        const std::vector<double> ext = extend_channel(f.row(c), T, cfg.boundary);
        std::vector<Complex> spec(ext.size());
        for (std::size_t i = 0; i < ext.size(); ++i) spec[i] = Complex(ext[i], 0.0);
        fft(spec);
        y_hat[c].assign(spec.begin(), spec.begin() + bins);
        for (std::size_t m = 1; m < half; ++m) y_hat[c][m] *= 2.0;
    }

    std::vector<double> freq(bins);
    for (std::size_t m = 0; m < bins; ++m) freq[m] = double(m) / double(n_ext);

    double y_norm = 0.0, y_pos_energy = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t m = 0; m < bins; ++m) {
            const double p = std::norm(y_hat[c][m]);
            y_norm += p;
            if (m > 0) y_pos_energy += p;
        }
    }

    std::vector<double> omega(K, 0.0);
    switch (cfg.init) {
        case MvmdConfig::Init::Zeros: break;
        case MvmdConfig::Init::Uniform:
            for (std::size_t k = 0; k < K; ++k) omega[k] = 0.5 * double(k) / double(K);
            break;
        case MvmdConfig::Init::Random: {
            Rng rng(cfg.seed);
            for (std::size_t k = 0; k < K; ++k) omega[k] = rng.uniform(0.0, 0.5);
            std::sort(omega.begin(), omega.end());
            break;
        }
    }

    std::vector<std::vector<std::vector<Complex>>> u(
        K, std::vector<std::vector<Complex>>(C, std::vector<Complex>(bins, Complex())));
    auto u_prev = u;
    std::vector<std::vector<Complex>> lambda(C, std::vector<Complex>(bins, Complex()));
    std::vector<std::vector<Complex>> sum_modes(C, std::vector<Complex>(bins, Complex()));

    // Zero-initialized omegas make every mode chase the lowest band; a mode
    // that collides with a stronger one is re-seeded at the dominant residual
    // frequency. Bounded so the intervention always terminates.
    int reseed_budget = 2 * cfg.K;
    const double collision_dist = 1.0 / (4.0 * std::sqrt(2.0 * cfg.alpha));

    int iters = 0;
    bool converged = false;
    for (int sweep = 1; sweep <= cfg.max_iters; ++sweep) {
        iters = sweep;
        u_prev = u;

        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t c = 0; c < C; ++c) {
                auto& uk = u[k][c];
                auto& sum_c = sum_modes[c];
                const auto& y_c = y_hat[c];
                const auto& lam_c = lambda[c];
                for (std::size_t m = 0; m < bins; ++m) {
                    const Complex residual = y_c[m] - (sum_c[m] - uk[m]) + lam_c[m] * 0.5;
                    const double w = freq[m] - omega[k];
                    const Complex updated = residual / (1.0 + 2.0 * cfg.alpha * w * w);
                    sum_c[m] += updated - uk[m];
                    uk[m] = updated;
                }
            }
            double num = 0.0, den = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
                for (std::size_t m = 1; m < bins; ++m) {
                    const double p = std::norm(u[k][c][m]);
                    num += freq[m] * p;
                    den += p;
                }
            }
            if (den > 1e-10 * y_pos_energy && den > 1e-300) omega[k] = num / den;
        }

        if (cfg.tau > 0.0) {
            for (std::size_t c = 0; c < C; ++c) {
                for (std::size_t m = 0; m < bins; ++m) {
                    lambda[c][m] += cfg.tau * (y_hat[c][m] - sum_modes[c][m]);
                }
            }
        }

        bool reseeded = false;
        if (reseed_budget > 0 && K > 1) {
            double best_dist = collision_dist;
            std::size_t best_i = 0, best_j = 0;
            bool found = false;
            for (std::size_t i = 0; i < K; ++i) {
                for (std::size_t j = i + 1; j < K; ++j) {
                    const double d = std::fabs(omega[i] - omega[j]);
                    if (d < best_dist) {
                        best_dist = d;
                        best_i = i;
                        best_j = j;
                        found = true;
                    }
                }
            }
            if (found) {
                auto energy = [&](std::size_t k) {
                    double e = 0.0;
                    for (std::size_t c = 0; c < C; ++c) {
                        for (std::size_t m = 0; m < bins; ++m) e += std::norm(u[k][c][m]);
                    }
                    return e;
                };
                const std::size_t mover = energy(best_j) <= energy(best_i) ? best_j : best_i;
                std::size_t peak = 1;
                double peak_power = -1.0;
                for (std::size_t m = 1; m < bins; ++m) {
                    double p = 0.0;
                    for (std::size_t c = 0; c < C; ++c) {
                        p += std::norm(y_hat[c][m] - sum_modes[c][m]);
                    }
                    if (p > peak_power) {
                        peak_power = p;
                        peak = m;
                    }
                }
                omega[mover] = freq[peak];
                --reseed_budget;
                reseeded = true;
            }
        }

        double diff = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t c = 0; c < C; ++c) {
                double delta = 0.0, prev_norm = 0.0;
                for (std::size_t m = 0; m < bins; ++m) {
                    delta += std::norm(u[k][c][m] - u_prev[k][c][m]);
                    prev_norm += std::norm(u_prev[k][c][m]);
                }
                diff += delta / (prev_norm + 1e-12);
            }
        }

        bool constraint_ok = true;
        if (cfg.tau > 0.0) {
            double rnorm = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
                for (std::size_t m = 0; m < bins; ++m) {
                    rnorm += std::norm(y_hat[c][m] - sum_modes[c][m]);
                }
            }
            constraint_ok = y_norm <= 0.0 || std::sqrt(rnorm / y_norm) < cfg.tol;
        }

        if (sweep > 1 && !reseeded && diff < cfg.tol && constraint_ok) {
            converged = true;
            break;
        }
    }

    // Rebuild the one-sided spectrum, invert, crop.
    const std::size_t crop_from = T / 2;
    ModeTensor out;
    out.modes.assign(K, Matrix(C, T, 0.0));
    out.omegas.assign(K, 0.0);
    out.iters_used = iters;
    out.converged = converged;

    std::vector<Complex> full(n_ext);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t c = 0; c < C; ++c) {
            std::fill(full.begin(), full.end(), Complex());
            for (std::size_t m = 0; m < bins; ++m) full[m] = u[k][c][m];
            ifft(full);
            double* dst = out.modes[k].row(c);
            for (std::size_t t = 0; t < T; ++t) dst[t] = full[crop_from + t].real();
        }
    }

    // Report each omega as the spectral centroid of the mode actually
    // delivered, so recomputation from the output is a fixed point.
    for (std::size_t k = 0; k < K; ++k) {
        const double recomputed = spectral_centroid(out.modes[k], cfg.boundary);
        out.omegas[k] = recomputed >= 0.0 ? recomputed : std::clamp(omega[k], 0.0, 0.5);
    }

    std::vector<std::size_t> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return out.omegas[a] < out.omegas[b]; });
    ModeTensor sorted = out;
    for (std::size_t k = 0; k < K; ++k) {
        sorted.modes[k] = out.modes[order[k]];
        sorted.omegas[k] = out.omegas[order[k]];
    }

    const Matrix recon = reconstruct(sorted);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        const double d = f.data[i] - recon.data[i];
        num += d * d;
        den += f.data[i] * f.data[i];
    }
    sorted.final_residual = den > 0.0 ? std::sqrt(num / den) : 0.0;
    return sorted;
}

Matrix reconstruct(const ModeTensor& u) {
    if (u.modes.empty()) throw DimensionError("reconstruct: empty mode tensor");
    Matrix sum(u.modes[0].rows, u.modes[0].cols, 0.0);
    for (const Matrix& m : u.modes) {
        if (!m.same_shape(sum)) throw DimensionError("reconstruct: ragged mode tensor");
        for (std::size_t i = 0; i < sum.data.size(); ++i) sum.data[i] += m.data[i];
    }
    return sum;
}

double spectral_centroid(const Matrix& mode, MvmdConfig::Boundary boundary) {
    const std::size_t T = mode.cols;
    if (T < 2) throw DimensionError("spectral_centroid: need T >= 2");
    const std::size_t n_ext = 2 * T;
    const std::size_t bins = n_ext / 2 + 1;
    std::vector<std::vector<Complex>> spectra(mode.rows);
    for (std::size_t c = 0; c < mode.rows; ++c) {
        const std::vector<double> ext = extend_channel(mode.row(c), T, boundary);
        std::vector<Complex> spec(ext.size());
        for (std::size_t i = 0; i < ext.size(); ++i) spec[i] = Complex(ext[i], 0.0);
        fft(spec);
        spectra[c].assign(spec.begin(), spec.begin() + bins);
        for (std::size_t m = 1; m < bins - 1; ++m) spectra[c][m] *= 2.0;
    }
    return centroid_of_half_spectra(spectra, n_ext);
}

void write_mode_tensor_csv_file(const std::string& path, const ModeTensor& u, Day start_day) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write mode tensor csv: " + path);
    out << "day,channel,mode_index,value\n";
    std::ostringstream v;
    v.precision(17);
    for (int t = 0; t < u.samples(); ++t) {
        for (int c = 0; c < u.channels(); ++c) {
            for (int k = 0; k < u.mode_count(); ++k) {
                v.str("");
                v << u.modes[k](c, t);
                out << format_day(start_day + t) << ',' << c << ',' << k << ',' << v.str()
                    << '\n';
            }
        }
    }
}

ModeTensor read_mode_tensor_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mode tensor csv: " + path);
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line) !=
            std::vector<std::string>{"day", "channel", "mode_index", "value"}) {
        throw SchemaError(path + ": bad mode tensor header");
    }

    struct Cell {
        Day day;
        int channel;
        int mode;
        double value;
    };
    std::vector<Cell> cells;
    Day first_day = 0;
    int max_c = -1, max_k = -1;
    Day max_day = 0;
    bool any = false;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (f.size() != 4) throw SchemaError(path + ": bad mode tensor row '" + line + "'");
        Cell cell{};
        cell.day = parse_day(f[0]);
        cell.channel = std::stoi(f[1]);
        cell.mode = std::stoi(f[2]);
        cell.value = std::stod(f[3]);
        if (!any || cell.day < first_day) first_day = cell.day;
        if (!any || cell.day > max_day) max_day = cell.day;
        max_c = std::max(max_c, cell.channel);
        max_k = std::max(max_k, cell.mode);
        any = true;
        cells.push_back(cell);
    }
    if (!any) throw SchemaError(path + ": empty mode tensor");

    const int T = static_cast<int>(max_day - first_day) + 1;
    ModeTensor u;
    u.modes.assign(max_k + 1, Matrix(max_c + 1, T, 0.0));
    u.omegas.assign(max_k + 1, 0.0);
    for (const Cell& cell : cells) {
        u.modes[cell.mode](cell.channel, cell.day - first_day) = cell.value;
    }
    for (int k = 0; k <= max_k; ++k) {
        const double w = spectral_centroid(u.modes[k]);
        u.omegas[k] = w >= 0.0 ? w : 0.0;
    }
    return u;
}

}  // namespace log2sig
