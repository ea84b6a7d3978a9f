#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

namespace psd {

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Small fixed-size vectors (planar positions, sphere embeddings)
// ---------------------------------------------------------------------------

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    /// z-component of the planar cross product.
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(Vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(Vec3 o) { x += o.x; y += o.y; z += o.z; return *this; }
    double dot(Vec3 o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(Vec3 o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm2() const { return x * x + y * y + z * z; }
    double norm() const { return std::sqrt(norm2()); }
    Vec3 normalized() const { return *this / norm(); }
};

inline Vec3 operator*(double s, Vec3 v) { return v * s; }

/// Angle between two nonzero vectors, robust near 0 and pi.
inline double angle_between(Vec3 a, Vec3 b) {
    const double c = a.cross(b).norm();
    const double d = a.dot(b);
    return std::atan2(c, d);
}

// ---------------------------------------------------------------------------
// Deterministic RNG (splitmix-seeded xoshiro-style generator kept minimal:
// identical streams on every platform, unlike std distributions)
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        // splitmix64 expansion of the seed into state
        std::uint64_t s = seed;
        for (auto& word : state_) {
            s += 0x9E3779B97F4A7C15ULL;
            std::uint64_t z = s;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next_u64() {
        // xoshiro256**
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 1e-300) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

private:
    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// ---------------------------------------------------------------------------
// Hashing and full-precision float formatting for the file formats
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 0xCBF29CE484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
    return fnv1a64(s.data(), s.size());
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

/// Shortest-round-trip decimal form of a double ("%.17g", trimmed).
inline std::string format_full(double v) {
    for (int prec = 15; prec <= 17; ++prec) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return std::string(buf);
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

// ---------------------------------------------------------------------------
// Quadrature over sampled series (trapezoid + Richardson refinement)
// ---------------------------------------------------------------------------

/// Cumulative trapezoid of f over nodes x (same length, x increasing).
inline std::vector<double> cumulative_trapezoid(const std::vector<double>& x,
                                                const std::vector<double>& f) {
    std::vector<double> out(x.size(), 0.0);
    for (std::size_t i = 1; i < x.size(); ++i)
        out[i] = out[i - 1] + 0.5 * (f[i] + f[i - 1]) * (x[i] - x[i - 1]);
    return out;
}

/// Trapezoid with Richardson refinement against the every-other-node rule.
/// Returns cumulative values at every node; the half-resolution correction is
/// distributed pairwise, giving one extra order on smooth integrands.
inline std::vector<double> cumulative_trapezoid_refined(const std::vector<double>& x,
                                                        const std::vector<double>& f) {
    const std::size_t n = x.size();
    std::vector<double> fine = cumulative_trapezoid(x, f);
    if (n < 3) return fine;
    std::vector<double> out(n, 0.0);
    double acc = 0.0;
    std::size_t i = 0;
    while (i + 2 < n) {
        const double t_fine = (fine[i + 2] - fine[i]);
        const double t_coarse = 0.5 * (f[i + 2] + f[i]) * (x[i + 2] - x[i]);
        const double refined = t_fine + (t_fine - t_coarse) / 3.0;
        // split the refined pair-integral between the two sub-intervals in
        // proportion to the fine-rule pieces
        const double p1 = fine[i + 1] - fine[i];
        const double p2 = fine[i + 2] - fine[i + 1];
        const double denom = p1 + p2;
        double w = 0.5;
        if (std::abs(denom) > 1e-12 * (std::abs(p1) + std::abs(p2))) w = p1 / denom;
        if (!(w > -1.0 && w < 2.0)) w = 0.5;
        out[i + 1] = acc + refined * w;
        out[i + 2] = acc + refined;
        acc = out[i + 2];
        i += 2;
    }
    if (i + 1 < n) out[i + 1] = acc + (fine[i + 1] - fine[i]);
    return out;
}

/// Least-squares straight line y ~ a + b x; returns {a, b, stderr_of_b}.
inline std::array<double, 3> linear_fit(const std::vector<double>& x,
                                        const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double b = (sxx > 0) ? sxy / sxx : 0.0;
    const double a = my - b * mx;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (a + b * x[i]);
        ss += r * r;
    }
    const double se = (n > 2 && sxx > 0) ? std::sqrt(ss / ((n - 2) * sxx)) : 0.0;
    return {a, b, se};
}

}  // namespace psd
