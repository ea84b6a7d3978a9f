#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "psd/complexity.hpp"
#include "psd/errors.hpp"
#include "psd/trajectory.hpp"
#include "psd/util.hpp"

namespace psd {

// ---------------------------------------------------------------------------
// Ephemeris reconstruction: recover emergent Newtonian time and scale from a
// purely shape-space trajectory — the operational inverse of quotienting.
//
// From kappa = p^2 / R^gk and the arc-length parametrization condition,
//
//   d ln R / ds = omega,        omega = -/+ sqrt(-(1 + 2V/kappa)),
//   dt / ds     = R^2 / p = R^(2 - gk/2) / sqrt(kappa),
//
// with gk = homogeneity + 2. The scale carries one free constant R(0); time
// carries an affine freedom (origin and, through R(0), unit). The
// chronological orientation is fixed by the arrow of time.
// ---------------------------------------------------------------------------

struct EphemerisReconstruction {
    std::vector<double> s;      ///< sample arc-lengths
    std::vector<double> scale;  ///< R(s), linear in the free constant R(0)
    std::vector<double> time;   ///< t(s) in trajectory order, t(0) = t0
    ArrowVerdict orientation = ArrowVerdict::undetermined;
    bool orientation_determined = false;
    /// t(s) of the reversed traversal; only filled when the arrow is
    /// undetermined (both orientations returned).
    std::vector<double> time_reversed;
    /// sample indices where the root argument -(1 + 2V/kappa) was negative
    std::vector<std::size_t> gaps;
};

struct EphemerisOptions {
    double initial_scale = 1.0;
    double initial_time = 0.0;
    double root_violation_tol = 1e-9;
};

/// Scale series: integrates d ln R = omega ds with |omega| recovered from
/// (kappa, V, gk) and the sign taken from the stored branch variable.
/// Root-argument violations are reported as gaps (magnitude clamped to 0).
inline EphemerisReconstruction reconstruct_scale(const TrajectoryRecord& rec,
                                                 const EphemerisOptions& opt = {}) {
    if (rec.samples.size() < 2)
        throw InsufficientDataError("reconstruct_scale: need at least 2 samples");
    EphemerisReconstruction out;
    const std::size_t n = rec.samples.size();
    out.s.resize(n);
    std::vector<double> omega(n);
    for (std::size_t k = 0; k < n; ++k) {
        const TrajectorySample& smp = rec.samples[k];
        out.s[k] = smp.s;
        const double arg = -(1.0 + 2.0 * smp.pot / smp.kappa);
        if (arg < -opt.root_violation_tol) out.gaps.push_back(k);
        const double mag = std::sqrt(std::max(0.0, arg));
        omega[k] = (smp.omega < 0.0 ? -1.0 : 1.0) * mag;
    }
    const std::vector<double> log_scale = cumulative_trapezoid_refined(out.s, omega);
    out.scale.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        out.scale[k] = opt.initial_scale * std::exp(log_scale[k]);
    return out;
}

/// Time series on top of a scale reconstruction: dt = R^(2 - gk/2)/sqrt(kappa) ds,
/// orientation fixed by the arrow of time (both orientations returned when it
/// is undetermined).
inline EphemerisReconstruction reconstruct_time(const TrajectoryRecord& rec,
                                                const EphemerisOptions& opt = {}) {
    EphemerisReconstruction out = reconstruct_scale(rec, opt);
    const std::size_t n = rec.samples.size();
    const double gk = rec.homogeneity + 2.0;
    std::vector<double> rate(n);
    for (std::size_t k = 0; k < n; ++k)
        rate[k] = std::pow(out.scale[k], 2.0 - 0.5 * gk) /
                  std::sqrt(rec.samples[k].kappa);
    const std::vector<double> t = cumulative_trapezoid_refined(out.s, rate);
    out.time.resize(n);
    for (std::size_t k = 0; k < n; ++k) out.time[k] = opt.initial_time + t[k];

    ArrowReport arrow;
    bool have_arrow = false;
    if (n >= 100) {
        arrow = arrow_of_time(rec);
        have_arrow = true;
    }
    out.orientation = have_arrow ? arrow.verdict : ArrowVerdict::undetermined;
    out.orientation_determined = out.orientation != ArrowVerdict::undetermined;
    if (!out.orientation_determined) {
        // both orientations: the reversed traversal re-based at t0
        out.time_reversed.resize(n);
        const double t_max = t[n - 1];
        for (std::size_t k = 0; k < n; ++k)
            out.time_reversed[k] = opt.initial_time + (t_max - t[n - 1 - k]);
    }
    return out;
}

/// Best affine match a*x + b of a series onto a reference; returns the
/// maximum absolute residual divided by the reference span.
inline double affine_match_residual(const std::vector<double>& x,
                                    const std::vector<double>& reference) {
    if (x.size() != reference.size() || x.size() < 2)
        throw InsufficientDataError("affine_match_residual: length mismatch");
    const auto fit = linear_fit(x, reference);
    double max_resid = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k)
        max_resid = std::max(std::abs(reference[k] - (fit[0] + fit[1] * x[k])),
                             max_resid);
    const auto [lo, hi] = std::minmax_element(reference.begin(), reference.end());
    return max_resid / std::max(*hi - *lo, 1e-300);
}

}  // namespace psd
