#include "locagen/geometry.hpp"

#include <stdexcept>

#include "locagen/rng.hpp"

namespace locagen {

ArrayGeometry ArrayGeometry::equilateral(double spacing) {
    if (!(spacing > 0.0)) throw std::invalid_argument("equilateral: spacing must be > 0");
    ArrayGeometry g;
    g.mics = {Vec2{0.0, 0.0}, Vec2{spacing, 0.0},
              Vec2{spacing / 2.0, spacing * std::sqrt(3.0) / 2.0}};
    g.nominal_spacing = spacing;
    g.reference_mic = 0;
    return g;
}

double ArrayGeometry::max_pair_distance() const {
    double m = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) m = std::max(m, pair_distance(i, j));
    return m;
}

void ArrayGeometry::validate() const {
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (!(pair_distance(i, j) > 0.0))
                throw std::invalid_argument("ArrayGeometry: coincident microphones");
    if (reference_mic < 0 || reference_mic > 2)
        throw std::invalid_argument("ArrayGeometry: reference mic index out of range");
}

void SamplingSpec::validate() const {
    if (!(sample_rate > 0.0)) throw std::invalid_argument("SamplingSpec: sample_rate must be > 0");
    for (double off : phase_offsets)
        if (off < 0.0 || off >= 1.0 / sample_rate)
            throw std::invalid_argument("SamplingSpec: phase offset outside [0, 1/fs)");
}

TdoaPair TdoaPair::from_taus(double tau21, double tau31) {
    TdoaPair p;
    p.tau21 = tau21;
    p.tau31 = tau31;
    constexpr double kRatioEpsilon = 1e-9;  // s
    if (std::fabs(tau31) > kRatioEpsilon) {
        p.ratio = tau21 / tau31;
    } else {
        double sign = tau21 > 0.0 ? 1.0 : (tau21 < 0.0 ? -1.0 : 0.0);
        p.ratio = sign * std::min(1e9 * std::fabs(tau21), 1e6);
    }
    return p;
}

std::array<double, 3> true_toa(const ArrayGeometry& geometry, const Medium& medium,
                               const SourcePosition& source) {
    if (!(medium.speed_of_sound > 0.0))
        throw std::invalid_argument("true_toa: speed of sound must be > 0");
    std::array<double, 3> toa{};
    const Vec2 s{source.x, source.y};
    for (int i = 0; i < 3; ++i) {
        const double d = distance(s, geometry.mics[i]);
        if (d == 0.0) throw std::invalid_argument("true_toa: source coincides with a microphone");
        toa[i] = d / medium.speed_of_sound;
    }
    return toa;
}

double doa_from_tdoa(double tau_s, double spacing_m, double speed_mps) {
    if (!(spacing_m > 0.0)) throw std::invalid_argument("doa_from_tdoa: spacing must be > 0");
    const double s = speed_mps * tau_s / spacing_m;
    if (std::fabs(s) > 1.0)
        throw std::invalid_argument("doa_from_tdoa: |c*tau/d| > 1, delay inconsistent with spacing");
    return rad_to_deg(std::asin(s));
}

double quantization_floor(double speed_mps, double sample_rate_hz) {
    if (!(sample_rate_hz > 0.0))
        throw std::invalid_argument("quantization_floor: sample rate must be > 0");
    return speed_mps / sample_rate_hz;
}

long long pair_count(int n_mics) {
    if (n_mics < 2) throw std::invalid_argument("pair_count: need at least 2 microphones");
    return static_cast<long long>(n_mics) * (n_mics - 1) / 2;
}

ArrayGeometry apply_placement_jitter(const ArrayGeometry& geometry, double tolerance_m,
                                     std::uint64_t seed) {
    if (tolerance_m < 0.0)
        throw std::invalid_argument("apply_placement_jitter: tolerance must be >= 0");
    ArrayGeometry out = geometry;
    if (tolerance_m == 0.0) return out;
    Rng rng(seed);
    for (auto& mic : out.mics) {
        // uniform over the disk of radius tolerance
        const double r = tolerance_m * std::sqrt(rng.uniform01());
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        mic.x += r * std::cos(phi);
        mic.y += r * std::sin(phi);
    }
    return out;
}

}  // namespace locagen
