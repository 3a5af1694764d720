#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "locagen/dsp.hpp"
#include "locagen/geometry.hpp"

namespace locagen::sim {

enum class SimMode { event, waveform };

struct WaveformParams {
    enum class Excitation { chirp, noise_burst, tone };
    Excitation excitation = Excitation::chirp;
    double chirp_f0 = 500.0;    // Hz
    double chirp_f1 = 3000.0;   // Hz
    double tone_freq = 1000.0;  // Hz
    double duration = 0.1;      // s
    double amplitude = 1.0;
    double noise_rel_sigma = 0.0;  // per-mic Gaussian noise, relative to signal RMS
    dsp::Interp interpolation = dsp::Interp::none;  // `none` reproduces the quantized model
};

struct SimConfig {
    ArrayGeometry geometry = ArrayGeometry::equilateral(0.1);
    Medium medium{};
    SamplingSpec sampling{};
    double placement_tolerance = 0.0;  // m
    double toa_noise_sigma = 0.0;      // s, Gaussian jitter on recorded arrival times
    SimMode mode = SimMode::event;
    WaveformParams waveform{};
    std::uint64_t master_seed = 0;
    double exclusion_radius = 1.0;  // m, keep sources out of near-singular geometry
};

struct Observation {
    TdoaPair estimated{};
    TdoaPair true_tdoa{};
    SourcePosition source{};
    long long sample_index = 0;
};

// One quantized, noisy observation of a source. Deterministic given
// (config.master_seed, sample_index); batch order never matters.
//
// Event mode records, per mic, the first sampling instant at or after the
// true arrival: recorded = ceil((toa - phase)*fs)/fs + phase, plus optional
// Gaussian jitter. Waveform mode synthesizes per-mic delayed signals and
// estimates the delays with GCC-PHAT.
Observation simulate_observation(const SimConfig& config, const SourcePosition& source,
                                 long long sample_index);

// Uniform draw over the annulus [min_radius, radius] around `center`
// (uniform in area, not in radius).
SourcePosition sample_source_uniform_disk(double radius, std::uint64_t seed,
                                          Vec2 center = {0.0, 0.0}, double min_radius = 0.0);

// n observations with sources drawn uniformly from the configured disk.
// n_threads > 1 fans out across workers; per-index seeding keeps the output
// bit-identical under any schedule.
std::vector<Observation> run_batch(const SimConfig& config, long long n, double radius,
                                   int n_threads = 1);

struct OffsetTable {
    std::vector<double> offset2_level;     // fraction of one sampling period
    std::vector<double> offset3_level;     // fraction of one sampling period
    std::vector<double> position_error_m;  // Euclidean distance to the true source

    std::string to_csv() const;
};

// Sampling-offset experiment: each trial assigns the two non-reference mics
// offset levels drawn from `levels`, places a source in the disk, localizes
// by multilateration and records the Euclidean position error.
OffsetTable run_offset_experiment(const SimConfig& config, long long n,
                                  const std::vector<double>& levels, double radius = 100.0,
                                  int n_threads = 1);

}  // namespace locagen::sim
