#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace locagen {

constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
inline double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

// Normalize an angle to [0, 360).
inline double normalize_deg(double deg) {
    double r = std::fmod(deg, 360.0);
    return r < 0.0 ? r + 360.0 : r;
}

// Shortest angular distance on the circle, in [0, 180].
inline double circular_distance_deg(double a, double b) {
    double d = std::fabs(normalize_deg(a) - normalize_deg(b));
    return d > 180.0 ? 360.0 - d : d;
}

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const { return std::hypot(x, y); }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// Propagation medium. Speed of sound may be set directly (343 m/s default)
// or derived from air temperature via the linear approximation.
struct Medium {
    double speed_of_sound = 343.0;  // m/s

    static Medium from_temperature(double celsius) {
        return Medium{331.3 + 0.606 * celsius};
    }
};

// A source location in the plane. Azimuth is measured from the horizontal
// at the reference microphone, which by convention sits at the origin.
struct SourcePosition {
    double x = 0.0;  // m
    double y = 0.0;  // m

    double azimuth_deg() const { return normalize_deg(rad_to_deg(std::atan2(y, x))); }
};

// Three-microphone array. `equilateral(d)` places the reference microphone
// at the origin, the second at (d, 0) and the third at (d/2, d*sqrt(3)/2).
struct ArrayGeometry {
    std::array<Vec2, 3> mics{};
    double nominal_spacing = 0.0;  // m
    int reference_mic = 0;

    static ArrayGeometry equilateral(double spacing);

    double pair_distance(int i, int j) const { return distance(mics[i], mics[j]); }

    Vec2 centroid() const {
        return {(mics[0].x + mics[1].x + mics[2].x) / 3.0,
                (mics[0].y + mics[1].y + mics[2].y) / 3.0};
    }

    double max_pair_distance() const;

    // throws std::invalid_argument when any pair of microphones coincides
    void validate() const;
};

// Per-microphone sampling clocks: common rate, per-mic phase offsets in
// [0, 1/fs). Offset 0 means sampling instants at k/fs.
struct SamplingSpec {
    double sample_rate = 48000.0;  // Hz
    std::array<double, 3> phase_offsets{0.0, 0.0, 0.0};  // s

    void validate() const;
};

// The two non-reference time differences of arrival plus the ratio feature.
// The ratio is guarded near tau31 = 0: |tau31| <= 1e-9 s clamps the ratio to
// sign(tau21) * min(1e9 * |tau21|, 1e6) so the feature stays finite.
struct TdoaPair {
    double tau21 = 0.0;  // s, arrival at mic 2 minus arrival at mic 1 (reference)
    double tau31 = 0.0;  // s
    double ratio = 0.0;

    static TdoaPair from_taus(double tau21, double tau31);
};

// Exact time of arrival at each microphone: ||source - mic_i|| / c.
std::array<double, 3> true_toa(const ArrayGeometry& geometry, const Medium& medium,
                               const SourcePosition& source);

// Single-pair direction of arrival: arcsin(c*tau/d) in degrees, [-90, +90].
double doa_from_tdoa(double tau_s, double spacing_m, double speed_mps);

// Smallest resolvable distance for a given sample rate: c/fs.
double quantization_floor(double speed_mps, double sample_rate_hz);

// Number of microphone pairs: n(n-1)/2.
long long pair_count(int n_mics);

// Displace each microphone by an independent uniform draw from the disk of
// radius `tolerance`. The nominal spacing field is left untouched: jitter
// models construction imprecision while estimators keep assuming the
// nominal geometry.
ArrayGeometry apply_placement_jitter(const ArrayGeometry& geometry, double tolerance_m,
                                     std::uint64_t seed);

}  // namespace locagen
