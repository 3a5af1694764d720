#include "locagen/dataset.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "locagen/rng.hpp"

namespace locagen::data {

int bin12_of(double azimuth_deg) {
    return static_cast<int>(std::llround(normalize_deg(azimuth_deg) / 30.0)) % 12;
}

int bin24_of(double azimuth_deg) {
    return static_cast<int>(std::llround(normalize_deg(azimuth_deg) / 15.0)) % 24;
}

LabeledSample to_labeled(const sim::Observation& obs) {
    LabeledSample s;
    s.features = {obs.estimated.tau21, obs.estimated.tau31, obs.estimated.ratio};
    s.azimuth_deg = obs.source.azimuth_deg();
    s.bin12 = bin12_of(s.azimuth_deg);
    s.bin24 = bin24_of(s.azimuth_deg);
    s.source_x = obs.source.x;
    s.source_y = obs.source.y;
    s.sample_index = obs.sample_index;
    return s;
}

std::array<double, kNumFeatures> FeatureScaler::transform(
    const std::array<double, kNumFeatures>& f) const {
    std::array<double, kNumFeatures> out{};
    for (int i = 0; i < kNumFeatures; ++i) {
        const auto k = static_cast<std::size_t>(i);
        out[k] = constant[k] ? 0.0 : (f[k] - mean[k]) / std_dev[k];
    }
    return out;
}

std::array<double, kNumFeatures> FeatureScaler::inverse(
    const std::array<double, kNumFeatures>& f) const {
    std::array<double, kNumFeatures> out{};
    for (int i = 0; i < kNumFeatures; ++i) {
        const auto k = static_cast<std::size_t>(i);
        out[k] = constant[k] ? mean[k] : f[k] * std_dev[k] + mean[k];
    }
    return out;
}

FeatureScaler fit_scaler(const std::vector<LabeledSample>& train) {
    if (train.size() < 2) throw std::invalid_argument("fit_scaler: need at least 2 samples");
    FeatureScaler scaler;
    const double n = static_cast<double>(train.size());
    for (int f = 0; f < kNumFeatures; ++f) {
        const auto k = static_cast<std::size_t>(f);
        double lo = train.front().features[k];
        double hi = lo;
        double sum = 0.0;
        for (const auto& s : train) {
            const double v = s.features[k];
            sum += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto& s : train) {
            const double d = s.features[k] - mean;
            ss += d * d;
        }
        scaler.mean[k] = mean;
        scaler.constant[k] = lo == hi;
        scaler.std_dev[k] = scaler.constant[k] ? 1.0 : std::sqrt(ss / n);
    }
    return scaler;
}

SplitDataset split(const std::vector<LabeledSample>& samples, double fraction,
                   std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("split: fraction must lie in (0, 1)");
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = rng.uniform_index(i);
        std::swap(order[i - 1], order[j]);
    }
    const std::size_t cut = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(samples.size())));

    SplitDataset out;
    out.split_seed = seed;
    out.train.reserve(cut);
    out.validation.reserve(samples.size() - cut);
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < cut ? out.train : out.validation).push_back(samples[order[i]]);
    return out;
}

namespace {

constexpr const char* kHeader = "index,tau21_s,tau31_s,ratio,azimuth_deg,bin12,bin24,x_m,y_m";

std::string format_row(const LabeledSample& s) {
    char buf[320];
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g,%.17g,%d,%d,%.17g,%.17g",
                  s.sample_index, s.features[0], s.features[1], s.features[2], s.azimuth_deg,
                  s.bin12, s.bin24, s.source_x, s.source_y);
    return buf;
}

}  // namespace

void save(const std::vector<LabeledSample>& samples, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save: cannot open " + path + " for writing");
    out << kHeader << '\n';
    for (const auto& s : samples) out << format_row(s) << '\n';
    if (!out) throw std::runtime_error("save: write failed for " + path);
}

std::vector<LabeledSample> load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load: empty file " + path);
    if (line != kHeader)
        throw std::runtime_error("load: line 1: unexpected header in " + path);

    std::vector<LabeledSample> samples;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        LabeledSample s;
        const int fields = std::sscanf(
            line.c_str(), "%lld,%lg,%lg,%lg,%lg,%d,%d,%lg,%lg", &s.sample_index,
            &s.features[0], &s.features[1], &s.features[2], &s.azimuth_deg, &s.bin12, &s.bin24,
            &s.source_x, &s.source_y);
        if (fields != 9)
            throw std::runtime_error("load: line " + std::to_string(line_no) +
                                     ": expected 9 comma-separated fields");
        samples.push_back(s);
    }
    return samples;
}

std::uint64_t fingerprint(const std::vector<LabeledSample>& samples) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const void* bytes, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(bytes);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& s : samples) {
        const std::string row = format_row(s);
        mix(row.data(), row.size());
    }
    return h;
}

}  // namespace locagen::data
