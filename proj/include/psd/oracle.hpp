#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "psd/classical.hpp"
#include "psd/complexity.hpp"
#include "psd/errors.hpp"
#include "psd/nbody.hpp"
#include "psd/ode.hpp"
#include "psd/shape_potential.hpp"
#include "psd/shape_space.hpp"
#include "psd/trajectory.hpp"
#include "psd/util.hpp"

namespace psd {

// ---------------------------------------------------------------------------
// Newtonian configuration-space oracle: high-order integration of planar
// 3-body gravity, projected sample by sample to the shape sphere and
// reparametrized by accumulated shape arc-length. Used to cross-validate the
// intrinsic equation of state, and as the source of "physical" trajectories
// for Kepler-pair and ephemeris tests.
// ---------------------------------------------------------------------------

struct OracleOptions {
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 4'000'000;
    double collision_radius = 1e-5;   ///< physical min r_ij before stopping
    double target_arclength = 0.0;    ///< stop once s reaches this (0: run t_span)
};

struct OracleResult {
    TrajectoryRecord record;          ///< kind = oracle; phase per sample
    OdeStatus ode_status = OdeStatus::ok;
    double energy_drift = 0.0;        ///< max |E(t) - E(0)|
    std::vector<Vec3> tangents;       ///< unit shape tangent dX/ds per sample
};

namespace detail {

/// Shape kinematics of a phase-space state: unit vector n, its time
/// derivative, scale R, dilatational momentum D.
struct ShapeKinematics {
    Vec3 n;
    Vec3 n_dot;
    double inertia = 0.0;
    double dil = 0.0;  ///< D = sum m (x-cm).(v-vcm)
};

inline ShapeKinematics shape_kinematics(const PhaseState& st) {
    const JacobiVectors z = jacobi_vectors(st.config);
    const JacobiVectors zd = jacobi_vectors_of(st.config, st.velocities);
    const double inertia = z.inertia();
    if (!(inertia > 0.0)) throw ZeroInertiaError("shape_kinematics: zero inertia");

    const std::complex<double> c = std::conj(z.z1) * z.z2;
    const std::complex<double> cd =
        std::conj(zd.z1) * z.z2 + std::conj(z.z1) * zd.z2;
    const Vec3 w{std::norm(z.z1) - std::norm(z.z2), 2.0 * c.real(), 2.0 * c.imag()};
    const double re11 = (std::conj(z.z1) * zd.z1).real();
    const double re22 = (std::conj(z.z2) * zd.z2).real();
    const Vec3 w_dot{2.0 * (re11 - re22), 2.0 * cd.real(), 2.0 * cd.imag()};
    const double i_dot = 2.0 * (re11 + re22);

    ShapeKinematics kin;
    kin.inertia = inertia;
    kin.dil = 0.5 * i_dot;
    kin.n = w / inertia;
    kin.n_dot = w_dot / inertia - (i_dot / inertia) * kin.n;
    return kin;
}

}  // namespace detail

/// Extract the intrinsic curve state matching a phase-space state:
/// q = project(x), phi from the projected shape velocity, kappa = p^2/R^gk,
/// omega = D/p. Throws UndefinedDirectionError for purely radial motion.
inline CurveState oracle_initial_curve_state(const PhaseState& st,
                                             const ShapePotential& pot) {
    const auto kin = detail::shape_kinematics(st);
    const double speed = kin.n_dot.norm() / 2.0;  // |dq/dt|_g
    if (!(speed > 0.0))
        throw UndefinedDirectionError("oracle_initial_curve_state: zero shape momentum");
    const double scale = std::sqrt(kin.inertia);
    const double p = scale * scale * speed;
    CurveState out;
    out.q.coords = unit_to_chart(kin.n);
    const Vec3 u = kin.n_dot / kin.n_dot.norm();
    out.phi = embedded_to_direction(out.q.coords, u);
    out.kappa = p * p / std::pow(scale, pot.kappa_degree());
    out.omega = kin.dil / p;
    return out;
}

/// Integrate Newtonian gravity (G = 1) for t_span, projecting every accepted
/// step to the shape sphere; the record is indexed by accumulated arc-length
/// and carries t, R, kappa, omega, and the full phase state per sample.
inline OracleResult newtonian_oracle(const PhaseState& initial, double t_span,
                                     const OracleOptions& opt = {}) {
    initial.config.validate();
    if (initial.velocities.size() != initial.config.size())
        throw ConfigError("newtonian_oracle: velocity count mismatch");
    const std::size_t n = initial.config.size();
    const std::vector<double>& masses = initial.config.masses;
    const GravityShapePotential pot(masses);

    OracleResult result;
    result.record.kind = TrajectoryKind::oracle;
    result.record.masses = masses;
    result.record.homogeneity = pot.homogeneity();

    // state: positions (2n), velocities (2n), arc-length s
    std::vector<double> y(4 * n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        y[2 * i] = initial.config.positions[i].x;
        y[2 * i + 1] = initial.config.positions[i].y;
        y[2 * n + 2 * i] = initial.velocities[i].x;
        y[2 * n + 2 * i + 1] = initial.velocities[i].y;
    }
    y[4 * n] = 0.0;

    auto unpack = [&](const std::vector<double>& yy) {
        PhaseState st;
        st.config.masses = masses;
        st.config.positions.resize(n);
        st.velocities.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            st.config.positions[i] = {yy[2 * i], yy[2 * i + 1]};
            st.velocities[i] = {yy[2 * n + 2 * i], yy[2 * n + 2 * i + 1]};
        }
        return st;
    };

    auto rhs = [&](double, const std::vector<double>& yy, std::vector<double>& dy) {
        // velocities
        for (std::size_t i = 0; i < 2 * n; ++i) dy[i] = yy[2 * n + i];
        // accelerations
        for (std::size_t i = 0; i < 2 * n; ++i) dy[2 * n + i] = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 xi{yy[2 * i], yy[2 * i + 1]};
            for (std::size_t j = i + 1; j < n; ++j) {
                const Vec2 xj{yy[2 * j], yy[2 * j + 1]};
                const Vec2 d = xj - xi;
                const double r2 = d.norm2();
                const double inv_r3 = 1.0 / (r2 * std::sqrt(r2));
                dy[2 * n + 2 * i] += masses[j] * d.x * inv_r3;
                dy[2 * n + 2 * i + 1] += masses[j] * d.y * inv_r3;
                dy[2 * n + 2 * j] -= masses[i] * d.x * inv_r3;
                dy[2 * n + 2 * j + 1] -= masses[i] * d.y * inv_r3;
            }
        }
        // shape-space speed ds/dt
        const auto kin = detail::shape_kinematics(unpack(yy));
        dy[4 * n] = kin.n_dot.norm() / 2.0;
    };

    const double e0 = initial.energy();
    RunStatus status = RunStatus::completed;

    auto record_sample = [&](double t, const std::vector<double>& yy) {
        const PhaseState st = unpack(yy);
        const auto kin = detail::shape_kinematics(st);
        TrajectorySample smp;
        smp.s = yy[4 * n];
        smp.t = t;
        smp.n = kin.n;
        smp.scale = std::sqrt(kin.inertia);
        const double speed = kin.n_dot.norm() / 2.0;
        Vec3 u{};
        if (speed > 0.0) {
            u = kin.n_dot / kin.n_dot.norm();
            const ChartCoords q = unit_to_chart(kin.n);
            smp.dir = (std::sin(q.theta) > 1e-12) ? embedded_to_direction(q, u).angle : 0.0;
            const double p = kin.inertia * speed;
            smp.kappa = p * p / std::pow(smp.scale, pot.kappa_degree());
            smp.omega = kin.dil / p;
        }
        smp.pot = pot.value(kin.n);
        smp.com = complexity_of_shape(kin.n, masses);
        smp.phase = st;
        result.record.samples.push_back(std::move(smp));
        result.tangents.push_back(u);
        result.energy_drift =
            std::max(result.energy_drift, std::abs(st.energy() - e0));
    };

    record_sample(0.0, y);

    auto post = [&](double t, std::vector<double>& yy, double) {
        record_sample(t, yy);
        const PhaseState st = unpack(yy);
        double rmin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                rmin = std::min(rmin,
                                (st.config.positions[i] - st.config.positions[j]).norm());
        if (rmin < opt.collision_radius) {
            status = RunStatus::singularity_stop;
            return StepControl::halt;
        }
        if (opt.target_arclength > 0.0 && yy[4 * n] >= opt.target_arclength)
            return StepControl::halt;
        return StepControl::proceed;
    };

    OdeOptions ode_opt;
    ode_opt.rel_tol = opt.rel_tol;
    ode_opt.abs_tol = opt.abs_tol;
    ode_opt.max_step = opt.max_step;
    ode_opt.max_steps = opt.max_steps;
    const OdeOutcome outcome = integrate_adaptive(rhs, y, 0.0, t_span, ode_opt, post);

    result.ode_status = outcome.status;
    if (outcome.status == OdeStatus::step_underflow)
        status = RunStatus::singularity_stop;
    else if (outcome.status == OdeStatus::max_steps)
        status = RunStatus::truncated;
    result.record.status = status;
    return result;
}

// ---------------------------------------------------------------------------
// Relational (E = P = J = 0) random initial data
// ---------------------------------------------------------------------------

struct RelationalDataOptions {
    double min_separation = 0.35;  ///< on the sampled scale
    double min_kinetic = 1e-2;     ///< before the E = 0 rescale
    int max_attempts = 256;
};

/// Draw a random planar 3-body state on the relational shell: total momentum
/// and angular momentum removed exactly, velocities rescaled to E = 0.
inline PhaseState random_relational_state(std::uint64_t seed,
                                          const std::vector<double>& masses = {1.0, 1.0, 1.0},
                                          const RelationalDataOptions& opt = {}) {
    Rng rng(seed);
    for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
        PhaseState st;
        st.config.masses = masses;
        for (std::size_t i = 0; i < masses.size(); ++i) {
            st.config.positions.push_back({rng.normal(), rng.normal()});
            st.velocities.push_back({rng.normal(), rng.normal()});
        }
        // centre of mass frame
        const Vec2 cm = st.config.center_of_mass();
        const double mtot = st.config.total_mass();
        Vec2 vcm{};
        for (std::size_t i = 0; i < masses.size(); ++i)
            vcm += masses[i] * st.velocities[i];
        vcm = vcm / mtot;
        for (std::size_t i = 0; i < masses.size(); ++i) {
            st.config.positions[i] -= cm;
            st.velocities[i] -= vcm;
        }
        // separation floor
        double rmin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < masses.size(); ++i)
            for (std::size_t j = i + 1; j < masses.size(); ++j)
                rmin = std::min(rmin,
                                (st.config.positions[i] - st.config.positions[j]).norm());
        if (rmin < opt.min_separation) continue;
        // remove rigid rotation: v -= omega x r with omega = J / I
        const double omega = st.angular_momentum() / st.config.moment_of_inertia();
        for (std::size_t i = 0; i < masses.size(); ++i) {
            const Vec2 r = st.config.positions[i];
            st.velocities[i] -= omega * Vec2{-r.y, r.x};
        }
        // rescale to E = 0
        const double t_kin = st.kinetic_energy();
        if (t_kin < opt.min_kinetic) continue;
        const double lambda = std::sqrt(-newton_potential(st.config) / t_kin);
        for (auto& v : st.velocities) v = lambda * v;
        // guard against a residual zero shape momentum
        const auto kin = detail::shape_kinematics(st);
        if (kin.n_dot.norm() < 1e-6) continue;
        return st;
    }
    throw Error("random_relational_state: no admissible draw");
}

// ---------------------------------------------------------------------------
// Oracle vs intrinsic comparison
// ---------------------------------------------------------------------------

/// Hermite interpolation of a sampled curve (X on the sphere + kappa) at
/// arc-length s; derivative data comes from stored tangents and the
/// equation-of-state rates.
class CurveInterpolator {
public:
    CurveInterpolator(const TrajectoryRecord& rec, std::vector<Vec3> tangents,
                      const ShapePotential& pot)
        : rec_(rec), tangents_(std::move(tangents)), pot_(pot) {
        if (rec_.samples.size() != tangents_.size())
            throw Error("CurveInterpolator: tangent/sample count mismatch");
    }

    double s_max() const { return rec_.samples.back().s; }

    void eval(double s, Vec3& n_out, double& kappa_out) const {
        const auto& smp = rec_.samples;
        auto it = std::lower_bound(smp.begin(), smp.end(), s,
                                   [](const TrajectorySample& a, double v) {
                                       return a.s < v;
                                   });
        if (it == smp.begin()) ++it;
        if (it == smp.end()) --it;
        const std::size_t k1 = static_cast<std::size_t>(it - smp.begin());
        const std::size_t k0 = k1 - 1;
        const TrajectorySample& a = smp[k0];
        const TrajectorySample& b = smp[k1];
        // embedding X = n/2, dX/ds = unit tangent
        const Vec3 xa = a.n * kSphereRadius, xb = b.n * kSphereRadius;
        const Vec3& ua = tangents_[k0];
        const Vec3& ub = tangents_[k1];
        Vec3 x{hermite(s, a.s, xa.x, ua.x, b.s, xb.x, ub.x),
               hermite(s, a.s, xa.y, ua.y, b.s, xb.y, ub.y),
               hermite(s, a.s, xa.z, ua.z, b.s, xb.z, ub.z)};
        n_out = x.normalized();
        kappa_out = hermite(s, a.s, a.kappa, dkappa(a, ua), b.s, b.kappa, dkappa(b, ub));
    }

private:
    double dkappa(const TrajectorySample& smp, Vec3 u) const {
        const Vec3 grad = pot_.embedded_gradient(smp.n);
        return -2.0 * u.dot(grad) - pot_.kappa_degree() * smp.kappa * smp.omega;
    }

    const TrajectoryRecord& rec_;
    std::vector<Vec3> tangents_;
    const ShapePotential& pot_;
};

struct OracleCompareReport {
    double sup_chart_error = 0.0;  ///< sup angular separation on the unit sphere
    double sup_kappa_rel_error = 0.0;
    double arc_compared = 0.0;
    std::size_t points = 0;
};

/// Reconstruct in-memory unit tangents for an intrinsic record.
inline std::vector<Vec3> intrinsic_tangents(const TrajectoryRecord& rec) {
    std::vector<Vec3> out;
    out.reserve(rec.samples.size());
    for (const auto& smp : rec.samples)
        out.push_back(direction_to_embedded(unit_to_chart(smp.n), Direction{smp.dir}));
    return out;
}

/// Pointwise comparison of the intrinsic trajectory against the projected,
/// arc-length-reparametrized oracle over [0, arclen].
inline OracleCompareReport compare_intrinsic_to_oracle(const OracleResult& oracle,
                                                       const TrajectoryRecord& intrinsic,
                                                       const ShapePotential& pot,
                                                       double arclen) {
    const CurveInterpolator interp(oracle.record, oracle.tangents, pot);
    OracleCompareReport rep;
    const double s_hi = std::min({arclen, interp.s_max(),
                                  intrinsic.samples.back().s});
    rep.arc_compared = s_hi;
    for (const auto& smp : intrinsic.samples) {
        if (smp.s > s_hi) break;
        Vec3 n_oracle;
        double kappa_oracle;
        interp.eval(smp.s, n_oracle, kappa_oracle);
        rep.sup_chart_error =
            std::max(rep.sup_chart_error, angle_between(smp.n, n_oracle));
        rep.sup_kappa_rel_error =
            std::max(rep.sup_kappa_rel_error,
                     std::abs(smp.kappa - kappa_oracle) / std::abs(kappa_oracle));
        ++rep.points;
    }
    return rep;
}

}  // namespace psd
