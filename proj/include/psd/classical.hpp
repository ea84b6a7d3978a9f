#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "psd/complexity.hpp"
#include "psd/errors.hpp"
#include "psd/ode.hpp"
#include "psd/shape_potential.hpp"
#include "psd/shape_space.hpp"
#include "psd/trajectory.hpp"

namespace psd {

// ---------------------------------------------------------------------------
// Classical equation of state of the unparametrized curve on the shape
// sphere (all rates per unit arc-length):
//
//   dq^a   = u^a(phi)
//   dphi   = -2 cot(theta) sin(phi) + (V_1 sin(phi) - V_2 cos(phi)) / kappa
//   dkappa = -2 u^a V_,a  -/+  gamma_k kappa sqrt(-(1 + 2V/kappa))
//
// with gamma_k = kappa_degree of the potential and V_A the orthonormal-frame
// gradient. The -/+ branch is the sign of the dilatational rate
// omega = D/p; omega obeys the smooth companion equation
//
//   domega = (-gamma_k V + omega u^a V_,a) / kappa,
//
// which keeps omega^2 + 1 + 2V/kappa = 0 invariant and switches the branch
// automatically at turning points.
// ---------------------------------------------------------------------------

struct CurveState {
    ShapePoint q;
    Direction phi;
    double kappa = 0.0;
    double omega = 0.0;  ///< dilatational rate D/p; sign selects the branch

    /// Root argument of the branch term.
    double root_argument(const ShapePotential& pot) const {
        return -(1.0 + 2.0 * pot.value(q.unit()) / kappa);
    }
};

enum class Branch { contracting = -1, expanding = +1 };

/// Build a curve state with omega derived from the constraint
/// omega = branch * sqrt(-(1 + 2V/kappa)).
inline CurveState make_curve_state(const ShapePotential& pot, const ShapePoint& q,
                                   const Direction& phi, double kappa,
                                   Branch branch) {
    if (!(kappa > 0.0)) throw Error("make_curve_state: kappa must be positive");
    CurveState st{q, phi, kappa, 0.0};
    const double arg = st.root_argument(pot);
    if (arg < -1e-12)
        throw BranchDomainError("make_curve_state: 1 + 2V/kappa > 0");
    st.omega = static_cast<int>(branch) * std::sqrt(std::max(0.0, arg));
    return st;
}

struct ClassicalIncrement {
    double dtheta = 0.0;
    double dlon = 0.0;
    double dphi = 0.0;
    double dkappa = 0.0;
};

/// Chart form of the equation of state at a state, with an explicit branch
/// sign (+1 expanding / -1 contracting). Throws BranchDomainError when the
/// root argument is negative beyond tolerance and SingularPotentialError at
/// collision points.
inline ClassicalIncrement classical_rhs(const CurveState& st, const ShapePotential& pot,
                                        int branch_sign) {
    const ChartCoords q = st.q.coords;
    const double sphi = std::sin(st.phi.angle), cphi = std::cos(st.phi.angle);
    const double st_theta = std::sin(q.theta);
    if (std::abs(st_theta) < 1e-14)
        throw Error("classical_rhs: chart form undefined at the poles");
    const double v = pot.value(st.q.unit());
    double v1, v2;
    pot.frame_gradient(q, v1, v2);

    const double arg = -(1.0 + 2.0 * v / st.kappa);
    if (arg < -1e-10)
        throw BranchDomainError("classical_rhs: root argument negative");

    ClassicalIncrement inc;
    inc.dtheta = 2.0 * cphi;                 // u^theta = cos(phi)/sqrt(g_tt)
    inc.dlon = 2.0 * sphi / st_theta;        // u^lon = sin(phi)/sqrt(g_pp)
    inc.dphi = -2.0 * (std::cos(q.theta) / st_theta) * sphi +
               (v1 * sphi - v2 * cphi) / st.kappa;
    const double u_grad = cphi * v1 + sphi * v2;
    inc.dkappa = -2.0 * u_grad -
                 pot.kappa_degree() * st.kappa * branch_sign *
                     std::sqrt(std::max(0.0, arg));
    return inc;
}

// ---------------------------------------------------------------------------
// Intrinsic integration (embedded representation, pole-free)
// ---------------------------------------------------------------------------

struct IntegrateOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double max_step = 0.05;
    std::size_t max_steps = 2'000'000;
    double collision_radius = 1e-3;  ///< stop when min r_ij(n) falls below
    double kappa_floor = 1e-12;
};

struct IntegrateResult {
    TrajectoryRecord record;
    OdeStatus ode_status = OdeStatus::ok;
    double max_tangent_drift = 0.0;      ///< max ||U|-1| before renormalization
    double max_constraint_residual = 0.0;///< max |omega^2 + 1 + 2V/kappa|
};

namespace detail {

/// Embedded state layout: y = [X(3), U(3), kappa, omega].
inline void pack_curve(const CurveState& st, std::vector<double>& y) {
    const Vec3 x = st.q.embedding();
    const Vec3 u = direction_to_embedded(st.q.coords, st.phi);
    y = {x.x, x.y, x.z, u.x, u.y, u.z, st.kappa, st.omega};
}

inline Vec3 get_x(const std::vector<double>& y) { return {y[0], y[1], y[2]}; }
inline Vec3 get_u(const std::vector<double>& y) { return {y[3], y[4], y[5]}; }

inline void classical_embedded_rhs(const ShapePotential& pot,
                                   const std::vector<double>& y,
                                   std::vector<double>& dy) {
    const Vec3 x = get_x(y);
    const Vec3 u = get_u(y);
    const double kappa = y[6], omega = y[7];
    const Vec3 n = 2.0 * x;
    const double v = pot.value(n);
    const Vec3 grad = pot.embedded_gradient(n);  // tangent at X, metric frame
    const double u_grad = u.dot(grad);
    const double gk = pot.kappa_degree();

    const Vec3 dx = u;
    // geodesic curvature of the embedded sphere + projected force
    const Vec3 du = (-u.norm2() / x.norm2()) * x -
                    (1.0 / kappa) * (grad - u_grad * u);
    dy[0] = dx.x; dy[1] = dx.y; dy[2] = dx.z;
    dy[3] = du.x; dy[4] = du.y; dy[5] = du.z;
    dy[6] = -2.0 * u_grad - gk * kappa * omega;
    // The root pinned exactly at zero with a vanishing shape force is the
    // stuck (geodesic) branch of the sqrt-form kappa equation: kappa and
    // omega stay frozen there (kappa = -2V forever).
    if (omega == 0.0 && grad.x == 0.0 && grad.y == 0.0 && grad.z == 0.0)
        dy[7] = 0.0;
    else
        dy[7] = (-gk * v + omega * u_grad) / kappa;
}

inline TrajectorySample curve_sample(double s, const std::vector<double>& y,
                                     const ShapePotential& pot,
                                     const std::vector<double>& masses) {
    TrajectorySample smp;
    smp.s = s;
    const Vec3 x = get_x(y);
    smp.n = x.normalized();
    const ChartCoords q = unit_to_chart(smp.n);
    const Vec3 u = get_u(y);
    smp.dir = (std::sin(q.theta) > 1e-12) ? embedded_to_direction(q, u).angle : 0.0;
    smp.kappa = y[6];
    smp.omega = y[7];
    smp.pot = pot.value(smp.n);
    smp.com = masses.size() == 3 ? complexity_of_shape(smp.n, masses) : 0.0;
    return smp;
}

}  // namespace detail

/// Integrate the classical equation of state over the given arc-length.
/// Samples are recorded at every accepted step; the tangent is renormalized
/// per step. Stops with a partial trajectory near collision points.
inline IntegrateResult integrate_classical(const CurveState& initial,
                                           const ShapePotential& pot,
                                           double arclen,
                                           const IntegrateOptions& opt = {},
                                           const std::vector<double>& masses = {1.0, 1.0, 1.0}) {
    if (arclen < 0.0) throw Error("integrate_classical: arclen must be >= 0");
    IntegrateResult result;
    result.record.kind = TrajectoryKind::classical;
    result.record.masses = masses;
    result.record.homogeneity = pot.homogeneity();

    std::vector<double> y;
    detail::pack_curve(initial, y);
    result.record.samples.push_back(detail::curve_sample(0.0, y, pot, masses));
    if (arclen == 0.0) return result;

    const auto* gravity = dynamic_cast<const GravityShapePotential*>(&pot);
    RunStatus status = RunStatus::completed;

    auto rhs = [&](double, const std::vector<double>& yy, std::vector<double>& dy) {
        detail::classical_embedded_rhs(pot, yy, dy);
    };
    auto post = [&](double s, std::vector<double>& yy, double) {
        // renormalize |X| = 1/2 and U to a unit tangent
        Vec3 x = detail::get_x(yy);
        Vec3 u = detail::get_u(yy);
        result.max_tangent_drift =
            std::max(result.max_tangent_drift, std::abs(u.norm() - 1.0));
        x = x.normalized() * kSphereRadius;
        u = u - (u.dot(x) / x.norm2()) * x;
        u = u.normalized();
        yy[0] = x.x; yy[1] = x.y; yy[2] = x.z;
        yy[3] = u.x; yy[4] = u.y; yy[5] = u.z;

        TrajectorySample smp = detail::curve_sample(s, yy, pot, masses);
        result.record.samples.push_back(smp);
        const double resid =
            std::abs(smp.omega * smp.omega + 1.0 + 2.0 * smp.pot / smp.kappa);
        result.max_constraint_residual = std::max(result.max_constraint_residual, resid);

        if (smp.kappa < opt.kappa_floor) {
            status = RunStatus::degenerate_stop;
            return StepControl::halt;
        }
        if (gravity && gravity->min_pair_distance(smp.n) < opt.collision_radius) {
            status = RunStatus::singularity_stop;
            return StepControl::halt;
        }
        return StepControl::proceed;
    };

    OdeOptions ode_opt;
    ode_opt.rel_tol = opt.rel_tol;
    ode_opt.abs_tol = opt.abs_tol;
    ode_opt.max_step = opt.max_step;
    ode_opt.max_steps = opt.max_steps;
    const OdeOutcome outcome = integrate_adaptive(rhs, y, 0.0, arclen, ode_opt, post);

    result.ode_status = outcome.status;
    if (outcome.status == OdeStatus::step_underflow)
        status = RunStatus::singularity_stop;
    else if (outcome.status == OdeStatus::max_steps)
        status = RunStatus::truncated;
    result.record.status = status;
    return result;
}

/// Final state of an integration as a CurveState.
inline CurveState final_curve_state(const TrajectoryRecord& rec) {
    if (rec.samples.empty()) throw InsufficientDataError("final_curve_state: empty");
    const TrajectorySample& smp = rec.samples.back();
    CurveState st;
    st.q.coords = unit_to_chart(smp.n);
    st.phi.angle = smp.dir;
    st.kappa = smp.kappa;
    st.omega = smp.omega;
    return st;
}

}  // namespace psd
