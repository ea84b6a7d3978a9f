#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "psd/errors.hpp"
#include "psd/nbody.hpp"
#include "psd/shape_space.hpp"
#include "psd/util.hpp"

namespace psd {

// ---------------------------------------------------------------------------
// Complexity of an N-body configuration (G = 1):
//
//   Com = -(1/m_tot^{5/2}) sqrt(I_cm) V_N = l_rms / l_mhl,
//
// with l_rms^2 = (1/m_tot^2) sum m_i m_j r_ij^2 and
// 1/l_mhl = (1/m_tot^2) sum m_i m_j / r_ij. Scale-, rotation-, and
// translation-invariant; its secular growth orients the arrow of time.
// ---------------------------------------------------------------------------

struct ComplexityRecord {
    double com = 0.0;    ///< dimensionless complexity
    double l_rms = 0.0;  ///< mass-weighted root-mean-square length
    double l_mhl = 0.0;  ///< mass-weighted mean harmonic length
    double i_cm = 0.0;   ///< centre-of-mass moment of inertia
    double v_n = 0.0;    ///< Newton potential
};

inline ComplexityRecord complexity(const Configuration& c) {
    c.validate();
    const double mtot = c.total_mass();
    double sum_r2 = 0.0, sum_inv = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j) {
            const double mm = c.masses[i] * c.masses[j];
            const double r2 = (c.positions[i] - c.positions[j]).norm2();
            if (!(r2 > 0.0))
                throw SingularPotentialError("complexity: coincident particles");
            sum_r2 += mm * r2;
            sum_inv += mm / std::sqrt(r2);
        }
    ComplexityRecord rec;
    rec.i_cm = sum_r2 / mtot;
    rec.v_n = -sum_inv;
    rec.l_rms = std::sqrt(sum_r2) / mtot;
    rec.l_mhl = mtot * mtot / sum_inv;
    rec.com = rec.l_rms / rec.l_mhl;
    return rec;
}

/// Eq.-of-state route: Com straight from the first expression,
/// -(1/m_tot^{5/2}) sqrt(I_cm) V_N. Used to cross-check the ratio route.
inline double complexity_from_inertia(const Configuration& c) {
    const double mtot = c.total_mass();
    return -std::sqrt(c.moment_of_inertia()) * newton_potential(c) /
           std::pow(mtot, 2.5);
}

/// Complexity as a function on the shape sphere (unit-inertia shell); uses
/// the affine pair-distance forms of the chart.
inline double complexity_of_shape(Vec3 n, const std::vector<double>& masses) {
    const auto forms = pair_distance_forms(masses);
    const double mtot = masses[0] + masses[1] + masses[2];
    double sum_inv = 0.0;
    for (const auto& f : forms) {
        const double r2 = f.r2(n);
        if (!(r2 > 0.0))
            throw SingularPotentialError("complexity_of_shape: collision point");
        sum_inv += masses[f.i] * masses[f.j] / std::sqrt(r2);
    }
    return sum_inv / std::pow(mtot, 2.5);
}

// ---------------------------------------------------------------------------
// Arrow of time: direction of secular growth of Com along a trajectory.
// Detector: lower envelope (per-window minima) of the Com series over >= 10
// windows, straight-line fit; the arrow is determinate when the slope is
// significant (|slope|/stderr > 3) and the envelope is secularly rising in
// one of the two orientations.
// ---------------------------------------------------------------------------

enum class ArrowVerdict { forward, backward, undetermined };

struct ArrowReport {
    ArrowVerdict verdict = ArrowVerdict::undetermined;
    double slope = 0.0;          ///< lower-envelope growth rate d Com / ds
    double slope_stderr = 0.0;
    double significance = 0.0;   ///< |slope| / stderr
    int windows = 0;
};

inline ArrowReport arrow_of_time(const std::vector<double>& s,
                                 const std::vector<double>& com,
                                 int min_windows = 10) {
    if (s.size() != com.size())
        throw InsufficientDataError("arrow_of_time: length mismatch");
    if (s.size() < 100)
        throw InsufficientDataError("arrow_of_time: need at least 100 samples");

    const int windows = std::max<int>(min_windows, 10);
    std::vector<double> centers(windows), mins(windows);
    const std::size_t n = s.size();
    for (int w = 0; w < windows; ++w) {
        const std::size_t lo = n * w / windows;
        const std::size_t hi = std::max(lo + 1, n * (w + 1) / windows);
        double m = com[lo];
        double cs = 0.0;
        for (std::size_t k = lo; k < hi; ++k) {
            m = std::min(m, com[k]);
            cs += s[k];
        }
        mins[w] = m;
        centers[w] = cs / (hi - lo);
    }

    const auto fit = linear_fit(centers, mins);
    ArrowReport rep;
    rep.slope = fit[1];
    rep.slope_stderr = fit[2];
    rep.windows = windows;

    const double scale = std::max(1e-300, std::abs(mins.front()) + std::abs(mins.back()));
    const double span = std::abs(centers.back() - centers.front());
    const double tiny_slope = 1e-10 * scale / std::max(span, 1e-300);
    if (std::abs(rep.slope) <= tiny_slope) {
        rep.verdict = ArrowVerdict::undetermined;  // flat envelope
        return rep;
    }
    rep.significance = rep.slope_stderr > 0.0
                           ? std::abs(rep.slope) / rep.slope_stderr
                           : std::numeric_limits<double>::infinity();
    if (rep.significance <= 3.0) {
        rep.verdict = ArrowVerdict::undetermined;
        return rep;
    }
    rep.verdict = rep.slope > 0.0 ? ArrowVerdict::forward : ArrowVerdict::backward;
    return rep;
}

inline ArrowVerdict flip(ArrowVerdict v) {
    if (v == ArrowVerdict::forward) return ArrowVerdict::backward;
    if (v == ArrowVerdict::backward) return ArrowVerdict::forward;
    return ArrowVerdict::undetermined;
}

inline const char* arrow_name(ArrowVerdict v) {
    switch (v) {
        case ArrowVerdict::forward: return "forward";
        case ArrowVerdict::backward: return "backward";
        default: return "undetermined";
    }
}

}  // namespace psd
