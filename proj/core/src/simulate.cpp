#include "locagen/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "locagen/locate.hpp"
#include "locagen/rng.hpp"

namespace locagen::sim {

namespace {

// salts for per-observation random streams
constexpr std::uint64_t kSaltJitter = 0x6a69747465720000ULL;
constexpr std::uint64_t kSaltToaNoise = 0x746f616e6f697aULL;
constexpr std::uint64_t kSaltSource = 0x736f757263650000ULL;
constexpr std::uint64_t kSaltWaveNoise = 0x7761766500000000ULL;
constexpr std::uint64_t kSaltOffsets = 0x6f66667365740000ULL;

Observation observe_event(const SimConfig& config, const ArrayGeometry& physical,
                          const SourcePosition& source, long long index) {
    const auto toa = true_toa(physical, config.medium, source);
    const double fs = config.sampling.sample_rate;

    std::array<double, 3> recorded{};
    Rng noise_rng = stream_rng(config.master_seed, static_cast<std::uint64_t>(index),
                               kSaltToaNoise);
    for (int i = 0; i < 3; ++i) {
        const double phase = config.sampling.phase_offsets[static_cast<std::size_t>(i)];
        recorded[static_cast<std::size_t>(i)] =
            std::ceil((toa[static_cast<std::size_t>(i)] - phase) * fs) / fs + phase;
        if (config.toa_noise_sigma > 0.0)
            recorded[static_cast<std::size_t>(i)] += noise_rng.normal(0.0, config.toa_noise_sigma);
    }

    Observation obs;
    obs.estimated = TdoaPair::from_taus(recorded[1] - recorded[0], recorded[2] - recorded[0]);
    obs.true_tdoa = TdoaPair::from_taus(toa[1] - toa[0], toa[2] - toa[0]);
    obs.source = source;
    obs.sample_index = index;
    return obs;
}

Observation observe_waveform(const SimConfig& config, const ArrayGeometry& physical,
                             const SourcePosition& source, long long index) {
    const auto toa = true_toa(physical, config.medium, source);
    const double fs = config.sampling.sample_rate;
    const auto& wp = config.waveform;

    dsp::Waveform excitation;
    switch (wp.excitation) {
        case WaveformParams::Excitation::chirp:
            excitation = dsp::make_chirp(wp.chirp_f0, wp.chirp_f1, wp.duration, fs, wp.amplitude);
            break;
        case WaveformParams::Excitation::noise_burst:
            excitation = dsp::make_noise_burst(
                wp.duration, fs,
                stream_rng(config.master_seed, static_cast<std::uint64_t>(index), kSaltSource)
                    .next_u64(),
                wp.amplitude);
            break;
        case WaveformParams::Excitation::tone:
            excitation = dsp::make_tone(wp.tone_freq, wp.duration, fs, wp.amplitude);
            break;
    }

    // Each mic samples on its own clock: the signal value at instant
    // n/fs + phase is the excitation delayed by toa, so the effective delay
    // on the sample grid is toa - phase. A common shift keeps delays >= 0.
    std::array<double, 3> effective{};
    double min_eff = 0.0;
    for (int i = 0; i < 3; ++i) {
        effective[static_cast<std::size_t>(i)] =
            toa[static_cast<std::size_t>(i)] -
            config.sampling.phase_offsets[static_cast<std::size_t>(i)];
        min_eff = i == 0 ? effective[0]
                         : std::min(min_eff, effective[static_cast<std::size_t>(i)]);
    }

    const double max_span = physical.max_pair_distance() / config.medium.speed_of_sound;
    const std::size_t pad = static_cast<std::size_t>(std::ceil(max_span * fs)) + 80;
    excitation.samples.resize(excitation.samples.size() + pad, 0.0);

    const double sigma = wp.noise_rel_sigma * dsp::rms(excitation.samples);
    std::array<dsp::Waveform, 3> channels;
    for (int i = 0; i < 3; ++i) {
        const std::uint64_t noise_seed =
            stream_rng(config.master_seed, static_cast<std::uint64_t>(index),
                       kSaltWaveNoise + static_cast<std::uint64_t>(i))
                .next_u64();
        channels[static_cast<std::size_t>(i)] = dsp::synthesize_delayed(
            excitation, effective[static_cast<std::size_t>(i)] - min_eff, sigma, noise_seed);
    }

    const int max_lag =
        static_cast<int>(std::ceil(max_span * fs)) + 3;
    const auto d21 = dsp::gcc_phat(channels[0], channels[1], max_lag, wp.interpolation);
    const auto d31 = dsp::gcc_phat(channels[0], channels[2], max_lag, wp.interpolation);

    // add the clock offsets back so estimates refer to true arrival times
    const double tau21 = d21.tau_seconds + config.sampling.phase_offsets[1] -
                         config.sampling.phase_offsets[0];
    const double tau31 = d31.tau_seconds + config.sampling.phase_offsets[2] -
                         config.sampling.phase_offsets[0];

    Observation obs;
    obs.estimated = TdoaPair::from_taus(tau21, tau31);
    obs.true_tdoa = TdoaPair::from_taus(toa[1] - toa[0], toa[2] - toa[0]);
    obs.source = source;
    obs.sample_index = index;
    return obs;
}

}  // namespace

Observation simulate_observation(const SimConfig& config, const SourcePosition& source,
                                 long long sample_index) {
    config.geometry.validate();
    config.sampling.validate();
    if (config.toa_noise_sigma < 0.0)
        throw std::invalid_argument("simulate_observation: toa_noise_sigma must be >= 0");

    ArrayGeometry physical = config.geometry;
    if (config.placement_tolerance > 0.0) {
        const std::uint64_t jitter_seed =
            stream_rng(config.master_seed, static_cast<std::uint64_t>(sample_index), kSaltJitter)
                .next_u64();
        physical = apply_placement_jitter(config.geometry, config.placement_tolerance,
                                          jitter_seed);
    }

    return config.mode == SimMode::event
               ? observe_event(config, physical, source, sample_index)
               : observe_waveform(config, physical, source, sample_index);
}

SourcePosition sample_source_uniform_disk(double radius, std::uint64_t seed, Vec2 center,
                                          double min_radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("sample_source_uniform_disk: radius <= 0");
    if (min_radius < 0.0 || min_radius >= radius)
        throw std::invalid_argument("sample_source_uniform_disk: bad min_radius");
    Rng rng(seed);
    const double u = rng.uniform01();
    const double r = std::sqrt(u * (radius * radius - min_radius * min_radius) +
                               min_radius * min_radius);
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    return SourcePosition{center.x + r * std::cos(phi), center.y + r * std::sin(phi)};
}

std::vector<Observation> run_batch(const SimConfig& config, long long n, double radius,
                                   int n_threads) {
    if (n < 1) throw std::invalid_argument("run_batch: n must be >= 1");
    std::vector<Observation> out(static_cast<std::size_t>(n));

    auto work = [&](long long begin, long long end) {
        for (long long i = begin; i < end; ++i) {
            const std::uint64_t src_seed =
                stream_rng(config.master_seed, static_cast<std::uint64_t>(i), kSaltSource)
                    .next_u64();
            const SourcePosition source = sample_source_uniform_disk(
                radius, src_seed, config.geometry.centroid(), config.exclusion_radius);
            out[static_cast<std::size_t>(i)] = simulate_observation(config, source, i);
        }
    };

    if (n_threads <= 1) {
        work(0, n);
    } else {
        std::vector<std::thread> workers;
        const long long chunk = (n + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
            const long long begin = t * chunk;
            const long long end = std::min<long long>(begin + chunk, n);
            if (begin >= end) break;
            workers.emplace_back(work, begin, end);
        }
        for (auto& w : workers) w.join();
    }
    return out;
}

std::string OffsetTable::to_csv() const {
    std::string out = "offset2_level,offset3_level,position_error_m\n";
    char line[128];
    for (std::size_t i = 0; i < position_error_m.size(); ++i) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", offset2_level[i],
                      offset3_level[i], position_error_m[i]);
        out += line;
    }
    return out;
}

OffsetTable run_offset_experiment(const SimConfig& config, long long n,
                                  const std::vector<double>& levels, double radius,
                                  int n_threads) {
    if (n < 1) throw std::invalid_argument("run_offset_experiment: n must be >= 1");
    if (levels.empty()) throw std::invalid_argument("run_offset_experiment: no offset levels");
    for (double l : levels)
        if (l < 0.0 || l >= 1.0)
            throw std::invalid_argument("run_offset_experiment: levels must lie in [0, 1)");

    OffsetTable table;
    table.offset2_level.resize(static_cast<std::size_t>(n));
    table.offset3_level.resize(static_cast<std::size_t>(n));
    table.position_error_m.resize(static_cast<std::size_t>(n));

    const double period = 1.0 / config.sampling.sample_rate;

    auto work = [&](long long begin, long long end) {
        for (long long i = begin; i < end; ++i) {
            Rng pick = stream_rng(config.master_seed, static_cast<std::uint64_t>(i), kSaltOffsets);
            const double l2 = levels[pick.uniform_index(levels.size())];
            const double l3 = levels[pick.uniform_index(levels.size())];

            SimConfig trial = config;
            trial.sampling.phase_offsets = {0.0, l2 * period, l3 * period};

            const std::uint64_t src_seed =
                stream_rng(config.master_seed, static_cast<std::uint64_t>(i), kSaltSource)
                    .next_u64();
            const SourcePosition source = sample_source_uniform_disk(
                radius, src_seed, config.geometry.centroid(), config.exclusion_radius);
            const Observation obs = simulate_observation(trial, source, i);

            loc::MultilaterationProblem problem;
            problem.geometry = config.geometry;
            problem.medium = config.medium;
            problem.tdoa = obs.estimated;
            problem.radius_bound = std::max(150.0, 1.5 * radius);
            const auto estimate = loc::multilaterate(problem);

            table.offset2_level[static_cast<std::size_t>(i)] = l2;
            table.offset3_level[static_cast<std::size_t>(i)] = l3;
            table.position_error_m[static_cast<std::size_t>(i)] =
                std::hypot(estimate.position.x - source.x, estimate.position.y - source.y);
        }
    };

    if (n_threads <= 1) {
        work(0, n);
    } else {
        std::vector<std::thread> workers;
        const long long chunk = (n + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
            const long long begin = t * chunk;
            const long long end = std::min<long long>(begin + chunk, n);
            if (begin >= end) break;
            workers.emplace_back(work, begin, end);
        }
        for (auto& w : workers) w.join();
    }
    return table;
}

}  // namespace locagen::sim
