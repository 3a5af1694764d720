#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace locagen::dsp {

// A sampled signal. Amplitudes are dimensionless.
struct Waveform {
    std::vector<double> samples;
    double sample_rate = 0.0;  // Hz
};

using Spectrum = std::vector<std::complex<double>>;

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// In-place radix-2 FFT. Length must be a power of two (use fft_real for
// arbitrary-length real input, which zero-pads). inverse = true applies the
// 1/N scale so that inverse(forward(x)) == x.
void fft_inplace(Spectrum& data, bool inverse);

// Forward transform of a real signal, zero-padded to `n` (next power of two
// of the signal length when n == 0).
Spectrum fft_real(const std::vector<double>& signal, std::size_t n = 0);

// Cross-power spectrum Xi(f) * conj(Xj(f)). Lengths must match.
Spectrum cross_power_spectrum(const Spectrum& xi, const Spectrum& xj);

// Phase transform: each bin divided by max(|R(f)|, epsilon). epsilon is an
// absolute magnitude; bins with |R| < epsilon come out with magnitude < 1.
Spectrum phat_weight(const Spectrum& r, double epsilon);

// Correlation-by-lag slice. values[i] corresponds to lag (i - max_lag);
// positive lag means the second signal arrives later.
struct CrossCorrelation {
    std::vector<double> values;
    int max_lag = 0;
    double sample_rate = 0.0;

    double at(int lag) const { return values[static_cast<std::size_t>(lag + max_lag)]; }
};

struct DelayEstimate {
    double tau_seconds = 0.0;
    int peak_lag = 0;                  // samples
    double sub_sample_fraction = 0.0;  // in (-0.5, 0.5)
    double peak_value = 0.0;
};

enum class Interp { none, parabolic };

// PHAT-weighted cross-correlation restricted to [-max_lag, +max_lag].
CrossCorrelation gcc_phat_correlation(const Waveform& xi, const Waveform& xj, int max_lag);

// Generalized cross-correlation delay estimate. Positive tau means xj lags
// xi, i.e. xj(t) = xi(t - tau) with tau > 0. Parabolic interpolation refines
// the peak through its two neighbours.
DelayEstimate gcc_phat(const Waveform& xi, const Waveform& xj, int max_lag,
                       Interp interpolation = Interp::parabolic);

// Fractional delay by windowed-sinc interpolation, then additive white
// Gaussian noise with absolute standard deviation noise_sigma.
Waveform synthesize_delayed(const Waveform& source, double delay_s, double noise_sigma,
                            std::uint64_t seed);

// Windowed-sinc resampling to target_fs. target_fs == sample_rate is an
// exact identity path.
Waveform resample(const Waveform& input, double target_fs);

// Test excitations.
Waveform make_chirp(double f0_hz, double f1_hz, double duration_s, double sample_rate,
                    double amplitude = 1.0);
Waveform make_tone(double freq_hz, double duration_s, double sample_rate,
                   double amplitude = 1.0);
Waveform make_noise_burst(double duration_s, double sample_rate, std::uint64_t seed,
                          double amplitude = 1.0);

double rms(const std::vector<double>& samples);

}  // namespace locagen::dsp
