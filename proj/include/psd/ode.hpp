#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "psd/errors.hpp"

namespace psd {

// ---------------------------------------------------------------------------
// Embedded Dormand-Prince 5(4) integrator over flat double-vector states.
// Shared by the intrinsic curve integrators, the field co-integration, and
// the Newtonian oracle. Deterministic: no threading, fixed reduction order.
// ---------------------------------------------------------------------------

struct OdeOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double initial_step = 0.0;           ///< 0: choose from the interval
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 2'000'000;
    double min_step = 1e-14;             ///< underflow threshold (absolute)
};

enum class OdeStatus { ok, step_underflow, max_steps, halted };

struct OdeOutcome {
    OdeStatus status = OdeStatus::ok;
    double s_end = 0.0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

/// Control commands a post-step callback may return.
enum class StepControl { proceed, halt };

namespace dp5 {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                        e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;
}  // namespace dp5

/// Integrate dy/ds = rhs(s, y) from s0 to s1 (s1 > s0).
///
/// rhs:  void(double s, const std::vector<double>& y, std::vector<double>& dy)
/// post: StepControl(double s, std::vector<double>& y, double h_used)
///       called after each accepted step; may project/renormalize y in place
///       and may halt the run (partial result, status = halted).
template <class Rhs, class PostStep>
OdeOutcome integrate_adaptive(Rhs&& rhs, std::vector<double>& y, double s0,
                              double s1, const OdeOptions& opt, PostStep&& post) {
    using namespace dp5;
    const std::size_t n = y.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
    std::vector<double> tmp(n), y5(n);

    OdeOutcome out;
    double s = s0;
    double h = opt.initial_step > 0.0 ? opt.initial_step
                                      : std::min(opt.max_step, (s1 - s0) / 100.0);
    h = std::min(h, s1 - s0);
    bool have_k1 = false;

    while (s < s1) {
        if (out.accepted + out.rejected >= opt.max_steps) {
            out.status = OdeStatus::max_steps;
            break;
        }
        if (h < opt.min_step) {
            out.status = OdeStatus::step_underflow;
            break;
        }
        h = std::min(h, s1 - s);

        if (!have_k1) rhs(s, y, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
        rhs(s + c2 * h, tmp, k2);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs(s + c3 * h, tmp, k3);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(s + c4 * h, tmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(s + c5 * h, tmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                                 a64 * k4[i] + a65 * k5[i]);
        rhs(s + h, tmp, k6);
        for (std::size_t i = 0; i < n; ++i)
            y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                                b6 * k6[i]);
        rhs(s + h, y5, k7);  // FSAL

        double err = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < n; ++i) {
            const double y4i = y[i] + h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                                           e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc =
                opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
            const double d = (y5[i] - y4i) / sc;
            err += d * d;
            if (!std::isfinite(y5[i])) finite = false;
        }
        err = std::sqrt(err / n);

        if (!finite || err > 1.0) {
            ++out.rejected;
            const double fac = finite ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
            h *= std::min(fac, 0.9);
            have_k1 = true;  // k1 still valid at unchanged (s, y)
            continue;
        }

        s += h;
        y.swap(y5);
        ++out.accepted;
        const StepControl ctl = post(s, y, h);
        // renormalization in post invalidates the FSAL derivative
        have_k1 = false;
        if (ctl == StepControl::halt) {
            out.status = OdeStatus::halted;
            break;
        }
        const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h = std::min(opt.max_step, h * std::clamp(fac, 0.2, 5.0));
    }
    out.s_end = s;
    return out;
}

/// Fixed-step runner using the 5th-order row (for convergence studies).
template <class Rhs, class PostStep>
void integrate_fixed(Rhs&& rhs, std::vector<double>& y, double s0, double s1,
                     std::size_t steps, PostStep&& post) {
    using namespace dp5;
    const std::size_t n = y.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), tmp(n);
    const double h = (s1 - s0) / steps;
    double s = s0;
    for (std::size_t step = 0; step < steps; ++step) {
        rhs(s, y, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
        rhs(s + c2 * h, tmp, k2);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs(s + c3 * h, tmp, k3);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(s + c4 * h, tmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(s + c5 * h, tmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                                 a64 * k4[i] + a65 * k5[i]);
        rhs(s + h, tmp, k6);
        for (std::size_t i = 0; i < n; ++i)
            y[i] += h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        s = s0 + (step + 1) * (s1 - s0) / steps;
        post(s, y, h);
    }
}

/// Cubic Hermite interpolation y(s) between two recorded states with exact
/// derivatives; fourth-order accurate on integrator samples.
inline double hermite(double s, double s0, double y0, double f0, double s1,
                      double y1, double f1) {
    const double h = s1 - s0;
    const double t = (s - s0) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * f0 +
           (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * f1;
}

}  // namespace psd
