#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "locagen/simulate.hpp"

namespace locagen::data {

constexpr int kNumFeatures = 3;  // tau21, tau31, ratio

// One machine-learning sample: estimated-TDOA features plus ground truth.
struct LabeledSample {
    std::array<double, kNumFeatures> features{};  // tau21 (s), tau31 (s), ratio
    double azimuth_deg = 0.0;                     // true azimuth, [0, 360)
    int bin12 = 0;
    int bin24 = 0;
    double source_x = 0.0;  // m
    double source_y = 0.0;  // m
    long long sample_index = 0;
};

// Nearest-multiple bin labels (mod 360): bin12 at 30 degree centers, bin24
// at 15 degree centers.
int bin12_of(double azimuth_deg);
int bin24_of(double azimuth_deg);
inline double bin_center_deg(int bin, int n_bins) { return bin * (360.0 / n_bins); }

LabeledSample to_labeled(const sim::Observation& obs);

// Per-feature standardization fitted on training data. Population (divide
// by N) standard deviation. A feature whose values are all identical is
// flagged constant and transforms to 0.
struct FeatureScaler {
    std::array<double, kNumFeatures> mean{};
    std::array<double, kNumFeatures> std_dev{};
    std::array<bool, kNumFeatures> constant{};

    std::array<double, kNumFeatures> transform(const std::array<double, kNumFeatures>& f) const;
    std::array<double, kNumFeatures> inverse(const std::array<double, kNumFeatures>& f) const;
};

FeatureScaler fit_scaler(const std::vector<LabeledSample>& train);

struct SplitDataset {
    std::vector<LabeledSample> train;
    std::vector<LabeledSample> validation;
    std::uint64_t split_seed = 0;
};

// Shuffle by seed, cut at round(fraction * N).
SplitDataset split(const std::vector<LabeledSample>& samples, double fraction,
                   std::uint64_t seed);

// CSV interchange format, header:
//   index,tau21_s,tau31_s,ratio,azimuth_deg,bin12,bin24,x_m,y_m
// Floating-point fields carry 17 significant digits so that load(save(x))
// round-trips bit-exactly.
void save(const std::vector<LabeledSample>& samples, const std::string& path);
std::vector<LabeledSample> load(const std::string& path);

// FNV-1a hash of the canonical serialization; identifies a dataset in model
// metadata and reports.
std::uint64_t fingerprint(const std::vector<LabeledSample>& samples);

}  // namespace locagen::data
