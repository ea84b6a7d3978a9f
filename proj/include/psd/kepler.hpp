#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "psd/nbody.hpp"
#include "psd/util.hpp"

namespace psd {

// ---------------------------------------------------------------------------
// Osculating two-body elements and Kepler-pair detection. Kepler pairs are
// the asymptotically isolated bound binaries that serve as emergent rods and
// clocks; a pair qualifies when it stays isolated and its elements stop
// drifting.
// ---------------------------------------------------------------------------

struct OrbitalElements {
    double semi_major = 0.0;
    double eccentricity = 0.0;
    double energy = 0.0;           ///< two-body specific orbital energy
    double angular_momentum = 0.0; ///< specific, planar scalar
    bool bound = false;
};

/// Osculating elements of the relative orbit of two bodies (G = 1).
inline OrbitalElements osculating_elements(Vec2 rel_pos, Vec2 rel_vel, double m_a,
                                           double m_b) {
    const double gm = m_a + m_b;  // G = 1
    const double r = rel_pos.norm();
    OrbitalElements el;
    el.energy = 0.5 * rel_vel.norm2() - gm / r;
    el.angular_momentum = rel_pos.cross(rel_vel);
    el.bound = el.energy < 0.0;
    if (el.bound) el.semi_major = -gm / (2.0 * el.energy);
    const double arg =
        1.0 + 2.0 * el.energy * el.angular_momentum * el.angular_momentum / (gm * gm);
    el.eccentricity = std::sqrt(std::max(0.0, arg));
    return el;
}

inline double kepler_period(double semi_major, double gm) {
    return 2.0 * kPi * std::sqrt(semi_major * semi_major * semi_major / gm);
}

/// Build the phase-space state of a two-body orbit at pericentre from
/// elements (relative frame); used by presets and tests.
inline void kepler_state_at_pericenter(double semi_major, double ecc, double gm,
                                       Vec2& rel_pos, Vec2& rel_vel) {
    const double rp = semi_major * (1.0 - ecc);
    const double vp = std::sqrt(gm * (1.0 + ecc) / (semi_major * (1.0 - ecc)));
    rel_pos = {rp, 0.0};
    rel_vel = {0.0, vp};
}

struct KeplerPairReport {
    int i = 0, j = 0;
    double semi_major = 0.0;      ///< window-median osculating a
    double eccentricity = 0.0;    ///< window-median osculating e
    double isolation = 0.0;       ///< max isolation ratio over the window
    double s_start = 0.0;         ///< stability window in arc-length
    double s_end = 0.0;
};

struct KeplerDetectOptions {
    double isolation_threshold = 0.2;
    double drift_tolerance = 0.05;    ///< relative drift of a, e per window
    std::size_t min_window = 50;      ///< minimum samples in a sustained window
    double min_window_fraction = 0.1; ///< ... and fraction of the record
};

/// One trajectory sample carrying physical configuration data.
struct ConfigSample {
    double s = 0.0;  ///< shape-space arc-length
    double t = 0.0;  ///< Newtonian time (oracle runs)
    PhaseState state;
};

namespace detail {

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
}

}  // namespace detail

/// Scan a configuration-space trajectory for sustained, isolated, bound pairs
/// with non-drifting osculating elements. Returns an empty list when nothing
/// qualifies.
inline std::vector<KeplerPairReport> detect_kepler_pairs(
    const std::vector<ConfigSample>& samples,
    const KeplerDetectOptions& opt = {}) {
    std::vector<KeplerPairReport> reports;
    if (samples.empty()) return reports;
    const std::size_t n = samples.size();
    const std::size_t nbody = samples.front().state.config.size();
    const std::size_t need =
        std::max<std::size_t>(opt.min_window,
                              static_cast<std::size_t>(opt.min_window_fraction * n));

    for (std::size_t i = 0; i < nbody; ++i) {
        for (std::size_t j = i + 1; j < nbody; ++j) {
            // per-sample isolation + elements
            std::vector<char> ok(n, 0);
            std::vector<double> a(n, 0.0), e(n, 0.0), iso(n, 0.0);
            for (std::size_t k = 0; k < n; ++k) {
                const auto& st = samples[k].state;
                const Vec2 rp = st.config.positions[j] - st.config.positions[i];
                const Vec2 rv = st.velocities[j] - st.velocities[i];
                const double mi = st.config.masses[i], mj = st.config.masses[j];
                const Vec2 cm = (mi * st.config.positions[i] +
                                 mj * st.config.positions[j]) / (mi + mj);
                double nearest = std::numeric_limits<double>::infinity();
                for (std::size_t o = 0; o < nbody; ++o) {
                    if (o == i || o == j) continue;
                    nearest = std::min(nearest, (st.config.positions[o] - cm).norm());
                }
                iso[k] = rp.norm() / nearest;
                const OrbitalElements el = osculating_elements(rp, rv, mi, mj);
                a[k] = el.semi_major;
                e[k] = el.eccentricity;
                ok[k] = (el.bound && el.eccentricity < 1.0 &&
                         iso[k] < opt.isolation_threshold)
                            ? 1
                            : 0;
            }
            // longest sustained run
            std::size_t best_lo = 0, best_len = 0, run_lo = 0, run_len = 0;
            for (std::size_t k = 0; k <= n; ++k) {
                if (k < n && ok[k]) {
                    if (run_len == 0) run_lo = k;
                    ++run_len;
                } else {
                    if (run_len > best_len) {
                        best_len = run_len;
                        best_lo = run_lo;
                    }
                    run_len = 0;
                }
            }
            if (best_len < need) continue;

            std::vector<double> aw(a.begin() + best_lo, a.begin() + best_lo + best_len);
            std::vector<double> ew(e.begin() + best_lo, e.begin() + best_lo + best_len);
            const double a_med = detail::median(aw);
            const double e_med = detail::median(ew);
            const auto span = [](const std::vector<double>& v) {
                const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
                return *mx - *mn;
            };
            const double a_drift = span(aw) / std::max(std::abs(a_med), 1e-300);
            const double e_drift = span(ew) / std::max(std::abs(e_med), 1e-3);
            if (a_drift > opt.drift_tolerance || e_drift > opt.drift_tolerance)
                continue;

            KeplerPairReport rep;
            rep.i = static_cast<int>(i);
            rep.j = static_cast<int>(j);
            rep.semi_major = a_med;
            rep.eccentricity = e_med;
            rep.isolation = *std::max_element(iso.begin() + best_lo,
                                              iso.begin() + best_lo + best_len);
            rep.s_start = samples[best_lo].s;
            rep.s_end = samples[best_lo + best_len - 1].s;
            reports.push_back(rep);
        }
    }
    return reports;
}

}  // namespace psd
