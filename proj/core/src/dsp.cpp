#include "locagen/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "locagen/geometry.hpp"
#include "locagen/rng.hpp"

namespace locagen::dsp {

void fft_inplace(Spectrum& data, bool inverse) {
    const std::size_t n = data.size();
    if (n == 0) throw std::invalid_argument("fft: empty input");
    if ((n & (n - 1)) != 0) throw std::invalid_argument("fft: length must be a power of two");

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = data[i + k];
                const std::complex<double> v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }

    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& c : data) c *= scale;
    }
}

Spectrum fft_real(const std::vector<double>& signal, std::size_t n) {
    if (signal.empty()) throw std::invalid_argument("fft: empty signal");
    if (n == 0) n = next_pow2(signal.size());
    if (n < signal.size()) throw std::invalid_argument("fft: pad length shorter than signal");
    Spectrum data(n);
    for (std::size_t i = 0; i < signal.size(); ++i) data[i] = {signal[i], 0.0};
    fft_inplace(data, false);
    return data;
}

Spectrum cross_power_spectrum(const Spectrum& xi, const Spectrum& xj) {
    if (xi.size() != xj.size())
        throw std::invalid_argument("cross_power_spectrum: length mismatch");
    Spectrum r(xi.size());
    for (std::size_t k = 0; k < xi.size(); ++k) r[k] = xi[k] * std::conj(xj[k]);
    return r;
}

Spectrum phat_weight(const Spectrum& r, double epsilon) {
    if (epsilon < 0.0) throw std::invalid_argument("phat_weight: epsilon must be >= 0");
    Spectrum out(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
        const double mag = std::abs(r[k]);
        const double denom = std::max(mag, epsilon);
        out[k] = denom > 0.0 ? r[k] / denom : std::complex<double>{0.0, 0.0};
    }
    return out;
}

namespace {

// Hann-taper a copy of the signal. Without the taper, edge transients leak
// across the whole spectrum and PHAT raises that leakage to full weight,
// which can bury the true peak for clean band-limited signals.
std::vector<double> hann_tapered(const std::vector<double>& x) {
    std::vector<double> out(x.size());
    const double denom = x.size() > 1 ? static_cast<double>(x.size() - 1) : 1.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = x[i] * (0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / denom));
    return out;
}

}  // namespace

CrossCorrelation gcc_phat_correlation(const Waveform& xi, const Waveform& xj, int max_lag) {
    if (xi.samples.empty() || xj.samples.empty())
        throw std::invalid_argument("gcc_phat: empty signal");
    if (xi.sample_rate != xj.sample_rate)
        throw std::invalid_argument("gcc_phat: sample rates differ");
    const std::size_t len = std::min(xi.samples.size(), xj.samples.size());
    if (max_lag < 0 || static_cast<std::size_t>(max_lag) >= len)
        throw std::invalid_argument("gcc_phat: max_lag must be in [0, signal length)");

    // Linear (not circular) correlation: pad both to the next power of two
    // covering the sum of lengths.
    const std::size_t n = next_pow2(xi.samples.size() + xj.samples.size());
    Spectrum si = fft_real(hann_tapered(xi.samples), n);
    Spectrum sj = fft_real(hann_tapered(xj.samples), n);
    Spectrum r = cross_power_spectrum(si, sj);

    double max_mag = 0.0;
    for (const auto& c : r) max_mag = std::max(max_mag, std::abs(c));
    if (max_mag == 0.0) throw std::runtime_error("gcc_phat: all-zero input, no correlation peak");

    Spectrum weighted = phat_weight(r, 1e-6 * max_mag);
    fft_inplace(weighted, true);

    // With R = Xi * conj(Xj), correlation at lag L (positive when xj lags)
    // sits at index (-L mod n) of the inverse transform.
    CrossCorrelation corr;
    corr.max_lag = max_lag;
    corr.sample_rate = xi.sample_rate;
    corr.values.resize(2 * static_cast<std::size_t>(max_lag) + 1);
    for (int lag = -max_lag; lag <= max_lag; ++lag) {
        const std::size_t idx = static_cast<std::size_t>((static_cast<long long>(n) - lag) %
                                                         static_cast<long long>(n));
        corr.values[static_cast<std::size_t>(lag + max_lag)] = weighted[idx].real();
    }
    return corr;
}

DelayEstimate gcc_phat(const Waveform& xi, const Waveform& xj, int max_lag,
                       Interp interpolation) {
    const CrossCorrelation corr = gcc_phat_correlation(xi, xj, max_lag);

    int best = -max_lag;
    double best_val = corr.at(best);
    for (int lag = -max_lag + 1; lag <= max_lag; ++lag) {
        const double v = corr.at(lag);
        if (v > best_val) {
            best_val = v;
            best = lag;
        }
    }

    DelayEstimate est;
    est.peak_lag = best;
    est.peak_value = best_val;
    est.sub_sample_fraction = 0.0;

    if (interpolation == Interp::parabolic && best > -max_lag && best < max_lag) {
        const double ym = corr.at(best - 1);
        const double y0 = corr.at(best);
        const double yp = corr.at(best + 1);
        const double denom = ym - 2.0 * y0 + yp;
        if (denom < 0.0) {  // proper maximum
            double delta = 0.5 * (ym - yp) / denom;
            delta = std::clamp(delta, -0.499999, 0.499999);
            est.sub_sample_fraction = delta;
        }
    }

    est.tau_seconds = (static_cast<double>(est.peak_lag) + est.sub_sample_fraction) /
                      corr.sample_rate;
    return est;
}

namespace {

constexpr int kSincTapsPerSide = 32;

double blackman(double u) {
    // u in [-1, 1]
    const double x = 0.5 * (u + 1.0);
    return 0.42 - 0.5 * std::cos(2.0 * kPi * x) + 0.08 * std::cos(4.0 * kPi * x);
}

double sinc(double x) {
    if (x == 0.0) return 1.0;
    const double px = kPi * x;
    return std::sin(px) / px;
}

}  // namespace

Waveform synthesize_delayed(const Waveform& source, double delay_s, double noise_sigma,
                            std::uint64_t seed) {
    if (source.samples.empty()) throw std::invalid_argument("synthesize_delayed: empty signal");
    if (delay_s < 0.0) throw std::invalid_argument("synthesize_delayed: delay must be >= 0");
    const double delay_samples = delay_s * source.sample_rate;
    if (delay_samples >= static_cast<double>(source.samples.size()))
        throw std::invalid_argument("synthesize_delayed: delay exceeds signal length");

    const std::size_t n = source.samples.size();
    Waveform out;
    out.sample_rate = source.sample_rate;
    out.samples.assign(n, 0.0);

    const double int_part = std::floor(delay_samples);
    const double frac = delay_samples - int_part;
    const long long shift = static_cast<long long>(int_part);

    if (frac == 0.0) {
        for (std::size_t i = static_cast<std::size_t>(shift); i < n; ++i)
            out.samples[i] = source.samples[i - static_cast<std::size_t>(shift)];
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            // y[i] = sum_k x[k] * h(i - delay - k), windowed sinc around the tap
            const double center = static_cast<double>(i) - delay_samples;
            const long long k0 = static_cast<long long>(std::ceil(center)) - kSincTapsPerSide;
            const long long k1 = static_cast<long long>(std::floor(center)) + kSincTapsPerSide;
            double acc = 0.0;
            for (long long k = std::max<long long>(k0, 0);
                 k <= std::min<long long>(k1, static_cast<long long>(n) - 1); ++k) {
                const double u = center - static_cast<double>(k);
                acc += source.samples[static_cast<std::size_t>(k)] * sinc(u) *
                       blackman(u / (kSincTapsPerSide + 1.0));
            }
            out.samples[i] = acc;
        }
    }

    if (noise_sigma > 0.0) {
        Rng rng(seed);
        for (auto& s : out.samples) s += rng.normal(0.0, noise_sigma);
    }
    return out;
}

Waveform resample(const Waveform& input, double target_fs) {
    if (!(target_fs > 0.0)) throw std::invalid_argument("resample: target rate must be > 0");
    if (input.samples.empty()) throw std::invalid_argument("resample: empty signal");
    if (target_fs == input.sample_rate) return input;

    const double scale = target_fs / input.sample_rate;
    const double cutoff = std::min(1.0, scale);  // anti-aliasing for downsampling
    const double taps_side = kSincTapsPerSide / cutoff;

    const std::size_t n_in = input.samples.size();
    const std::size_t n_out = static_cast<std::size_t>(
        std::llround(static_cast<double>(n_in) * scale));

    Waveform out;
    out.sample_rate = target_fs;
    out.samples.assign(n_out, 0.0);

    for (std::size_t m = 0; m < n_out; ++m) {
        const double pos = static_cast<double>(m) / scale;
        const long long k0 = static_cast<long long>(std::ceil(pos - taps_side));
        const long long k1 = static_cast<long long>(std::floor(pos + taps_side));
        double acc = 0.0;
        for (long long k = std::max<long long>(k0, 0);
             k <= std::min<long long>(k1, static_cast<long long>(n_in) - 1); ++k) {
            const double u = pos - static_cast<double>(k);
            acc += input.samples[static_cast<std::size_t>(k)] * cutoff * sinc(cutoff * u) *
                   blackman(u / (taps_side + 1.0));
        }
        out.samples[m] = acc;
    }
    return out;
}

Waveform make_chirp(double f0_hz, double f1_hz, double duration_s, double sample_rate,
                    double amplitude) {
    const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
    if (n == 0) throw std::invalid_argument("make_chirp: zero-length signal");
    Waveform w;
    w.sample_rate = sample_rate;
    w.samples.resize(n);
    const double k = (f1_hz - f0_hz) / duration_s;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        w.samples[i] = amplitude * std::sin(2.0 * kPi * (f0_hz * t + 0.5 * k * t * t));
    }
    return w;
}

Waveform make_tone(double freq_hz, double duration_s, double sample_rate, double amplitude) {
    const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
    if (n == 0) throw std::invalid_argument("make_tone: zero-length signal");
    Waveform w;
    w.sample_rate = sample_rate;
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        w.samples[i] = amplitude * std::sin(2.0 * kPi * freq_hz * static_cast<double>(i) /
                                            sample_rate);
    return w;
}

Waveform make_noise_burst(double duration_s, double sample_rate, std::uint64_t seed,
                          double amplitude) {
    const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
    if (n == 0) throw std::invalid_argument("make_noise_burst: zero-length signal");
    Waveform w;
    w.sample_rate = sample_rate;
    w.samples.resize(n);
    Rng rng(seed);
    for (auto& s : w.samples) s = amplitude * rng.normal();
    return w;
}

double rms(const std::vector<double>& samples) {
    if (samples.empty()) return 0.0;
    double acc = 0.0;
    for (double s : samples) acc += s * s;
    return std::sqrt(acc / static_cast<double>(samples.size()));
}

}  // namespace locagen::dsp
