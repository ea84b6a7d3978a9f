#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "psd/classical.hpp"
#include "psd/complexity.hpp"
#include "psd/errors.hpp"
#include "psd/ode.hpp"
#include "psd/shape_field.hpp"
#include "psd/shape_potential.hpp"
#include "psd/shape_space.hpp"
#include "psd/trajectory.hpp"

namespace psd {

// ---------------------------------------------------------------------------
// de Broglie-Bohm equation of state on the shape sphere. The state couples
// the curve variables (Q, phi, kappa) to the Madelung fields (R, S) of
// Psi = R e^{iS}; all rates are per unit arc-length:
//
//   dQ^a   = u^a(phi)
//   dphi   = chart geodesic term + V_T,a(Q) force at 1/kappa
//   dkappa = -2 u^a V_T,a(Q) + Ktilde
//   dR(q)  = -(1/sqrt kappa) ( g^{ab} R_,a S_,b + (1/2) R Lap S )
//   dS(q)  = -(1/sqrt kappa) ( (1/2) g^{ab} S_,a S_,b + V_T )
//
// with V_T = V + eps * V_Q and V_Q = -Lap R / (2R). Ktilde choices:
//   * classical_default: the branch term of the classical equation of state
//     with V -> V_T, so the system reduces to it when V_Q -> 0;
//   * guidance: Ktilde = 0, the unique choice transporting p_a = S_,a
//     exactly (the branch term is precisely the guidance violation).
//
// Discretization: spectral Galerkin. The fields advance as band-limited
// coefficient vectors, and the curve feels the band-limited projection of
// V_T, so the discrete system inherits the continuum structure (norm
// conservation, guidance transport) up to time-integration error.
// ---------------------------------------------------------------------------

enum class KTildeMode { classical_default, guidance };

struct QuantumParams {
    double epsilon = 1.0;             ///< multiplier on V_Q (classical-limit studies)
    KTildeMode ktilde = KTildeMode::classical_default;
    double r_floor_rel = 1e-12;       ///< node floor, relative to max R
};

struct QuantumCurveState {
    ShapePoint q;        ///< actual configuration Q
    Direction phi;
    double kappa = 0.0;
    double omega = 0.0;  ///< branch variable for the default Ktilde
    ShapeField amplitude;  ///< R(q) >= 0
    ShapeField phase;      ///< S(q), globally unwrapped

    void validate() const {
        if (!(kappa > 0.0)) throw Error("QuantumCurveState: kappa must be positive");
        amplitude.require_compatible(phase);
        if (amplitude.min() < -1e-12 * amplitude.max_abs())
            throw Error("QuantumCurveState: amplitude must be non-negative");
    }
};

// ---------------------------------------------------------------------------
// restrict_wavefunction: sample a configuration-space wave function on the
// gauge-fixed representatives of the grid
// ---------------------------------------------------------------------------

using WavefunctionSampler = std::function<std::complex<double>(const Configuration&)>;

/// Jacobi vectors of a unit shape vector in the representative gauge
/// (z1 real >= 0 on the I = 1 shell).
inline JacobiVectors jacobi_from_unit(Vec3 n) {
    const double z1_abs = std::sqrt(std::max(0.0, 0.5 * (1.0 + n.x)));
    JacobiVectors z;
    if (z1_abs > 1e-9) {
        z.z1 = z1_abs;
        z.z2 = std::complex<double>(n.y, n.z) / (2.0 * z1_abs);
    } else {
        z.z1 = 0.0;
        z.z2 = std::sqrt(std::max(0.0, 0.5 * (1.0 - n.x)));
    }
    return z;
}

inline Configuration representative_of_unit(Vec3 n, const std::vector<double>& masses) {
    return representative_from_jacobi(jacobi_from_unit(n), masses);
}

struct RestrictOptions {
    double orbit_tolerance = 1e-8;  ///< single-valuedness along Sim orbits
    int orbit_checks = 24;
    std::uint64_t check_seed = 2024;
};

/// Restriction of a configuration-space wave function to shape space:
/// samples Psi_N on gauge-fixed representatives, checks single-valuedness
/// along similarity orbits, unwraps the phase, and normalizes the amplitude.
inline std::pair<ShapeField, ShapeField> restrict_wavefunction(
    const WavefunctionSampler& psi_n, std::shared_ptr<const SphereTransform> transform,
    const std::vector<double>& masses, const RestrictOptions& opt = {}) {
    const SphereGrid& grid = transform->grid();

    // orbit single-valuedness spot checks on random grid points
    Rng rng(opt.check_seed);
    for (int c = 0; c < opt.orbit_checks; ++c) {
        const int j = static_cast<int>(rng.uniform() * grid.n_lat);
        const int i = static_cast<int>(rng.uniform() * grid.n_lon);
        const Vec3 n = chart_to_unit({grid.theta[j], grid.lon[i]});
        const Configuration rep = representative_of_unit(n, masses);
        const std::complex<double> base = psi_n(rep);
        Configuration moved = rep;
        const double lam = std::exp(rng.uniform(-1.5, 1.5));
        const double rot = rng.uniform(0.0, 2.0 * kPi);
        const Vec2 shift{rng.normal(), rng.normal()};
        for (auto& p : moved.positions) {
            const Vec2 r{std::cos(rot) * p.x - std::sin(rot) * p.y,
                         std::sin(rot) * p.x + std::cos(rot) * p.y};
            p = lam * r + shift;
        }
        const std::complex<double> trans = psi_n(moved);
        if (std::abs(trans - base) >
            opt.orbit_tolerance * (std::abs(base) + opt.orbit_tolerance))
            throw NotProjectableError(
                "restrict_wavefunction: Psi_N varies along a similarity orbit");
    }

    // sample on the grid
    std::vector<std::complex<double>> psi(grid.size());
    for (int j = 0; j < grid.n_lat; ++j)
        for (int i = 0; i < grid.n_lon; ++i) {
            const Vec3 n = chart_to_unit({grid.theta[j], grid.lon[i]});
            psi[static_cast<std::size_t>(j) * grid.n_lon + i] =
                psi_n(representative_of_unit(n, masses));
        }

    std::vector<double> amp(grid.size()), phase(grid.size());
    for (std::size_t k = 0; k < psi.size(); ++k) amp[k] = std::abs(psi[k]);

    // phase unwrap: along each latitude ring, then stitch rings through the
    // lon = 0 column; reject nonzero winding (multi-valued S)
    auto wrap = [](double d) {
        while (d > kPi) d -= 2.0 * kPi;
        while (d < -kPi) d += 2.0 * kPi;
        return d;
    };
    std::vector<double> raw(grid.size());
    for (std::size_t k = 0; k < psi.size(); ++k) raw[k] = std::arg(psi[k]);
    double col_prev = raw[0];
    double col_acc = raw[0];
    for (int j = 0; j < grid.n_lat; ++j) {
        const std::size_t row = static_cast<std::size_t>(j) * grid.n_lon;
        if (j > 0) {
            col_acc += wrap(raw[row] - col_prev);
            col_prev = raw[row];
        }
        double acc = col_acc;
        phase[row] = acc;
        double winding = 0.0;
        for (int i = 1; i < grid.n_lon; ++i) {
            const double d = wrap(raw[row + i] - raw[row + i - 1]);
            winding += d;
            acc += d;
            phase[row + i] = acc;
        }
        winding += wrap(raw[row] - raw[row + grid.n_lon - 1]);
        if (std::abs(winding) > 1e-6)
            throw NotProjectableError(
                "restrict_wavefunction: nonzero phase winding on a latitude ring");
    }

    ShapeField r_field(transform, std::move(amp));
    ShapeField s_field(transform, std::move(phase));
    const double norm = r_field.inner(r_field);
    if (!(norm > 0.0))
        throw NotProjectableError("restrict_wavefunction: vanishing amplitude");
    r_field *= 1.0 / std::sqrt(norm);
    return {std::move(r_field), std::move(s_field)};
}

// ---------------------------------------------------------------------------
// quantum potential
// ---------------------------------------------------------------------------

struct QuantumPotentialResult {
    ShapeField field;              ///< -Lap R / (2 R), masked at nodes
    std::vector<std::size_t> masked;  ///< grid indices where R fell below floor
};

/// V_Q = -Lap R / (2R). Nodes (R below floor * max R) are masked to zero and
/// reported. A Laplacian below the spectral noise floor yields an exactly
/// zero field, making the classical reduction exact for constant amplitudes.
inline QuantumPotentialResult quantum_potential(const ShapeField& amplitude,
                                                double floor_rel = 1e-12) {
    QuantumPotentialResult out{ShapeField::zeros(amplitude.transform), {}};
    const ShapeField lap = laplace_beltrami(amplitude);
    const double rmax = amplitude.max_abs();
    const int lmax = amplitude.transform->lmax();
    const double noise_floor =
        200.0 * 2.22e-16 * 4.0 * lmax * (lmax + 1.0) * std::max(rmax, 1e-300);
    if (lap.max_abs() <= noise_floor) return out;  // exact zero field

    const double floor = floor_rel * rmax;
    for (std::size_t k = 0; k < amplitude.values.size(); ++k) {
        if (amplitude.values[k] < floor) {
            out.masked.push_back(k);
            out.field.values[k] = 0.0;
        } else {
            out.field.values[k] = -lap.values[k] / (2.0 * amplitude.values[k]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// guidance residual
// ---------------------------------------------------------------------------

struct GuidanceResidual {
    double d1 = 0.0;   ///< frame components of p_a - S_,a at Q
    double d2 = 0.0;
    double norm = 0.0; ///< metric norm |delta|
};

inline GuidanceResidual guidance_residual_at(const SphereTransform& t,
                                             const std::vector<double>& s_coeffs,
                                             const ChartCoords& q, const Direction& phi,
                                             double kappa) {
    double s1, s2;
    coeff_gradient_at(t, s_coeffs, q, s1, s2);
    GuidanceResidual g;
    const double p = std::sqrt(kappa);
    g.d1 = p * std::cos(phi.angle) - s1;
    g.d2 = p * std::sin(phi.angle) - s2;
    g.norm = std::hypot(g.d1, g.d2);
    return g;
}

inline GuidanceResidual guidance_residual(const QuantumCurveState& st) {
    return guidance_residual_at(*st.phase.transform, st.phase.coeffs(), st.q.coords,
                                st.phi, st.kappa);
}

/// Guidance-satisfying (phi, kappa) at Q from the phase field: the direction
/// of grad S and kappa = |grad S|^2.
inline void guidance_init(const ShapeField& s_field, const ChartCoords& q,
                          Direction& phi, double& kappa) {
    const auto coeffs = s_field.coeffs();
    double s1, s2;
    coeff_gradient_at(*s_field.transform, coeffs, q, s1, s2);
    const double norm2 = s1 * s1 + s2 * s2;
    if (!(norm2 > 0.0))
        throw UndefinedDirectionError("guidance_init: vanishing phase gradient");
    phi.angle = std::atan2(s2, s1);
    kappa = norm2;
}

// ---------------------------------------------------------------------------
// quantum equation of state (spectral Galerkin)
// ---------------------------------------------------------------------------

namespace detail {

/// Precomputed data + scratch for the coefficient-space field rhs.
struct QuantumWorkspace {
    std::shared_ptr<const SphereTransform> transform;
    std::vector<double> v_coeffs;  ///< band-limited V
    std::vector<double> v_grid;    ///< its grid samples

    QuantumWorkspace(std::shared_ptr<const SphereTransform> t, const ShapePotential& pot)
        : transform(std::move(t)) {
        const SphereGrid& g = transform->grid();
        std::vector<double> samples(g.size());
        for (int j = 0; j < g.n_lat; ++j)
            for (int i = 0; i < g.n_lon; ++i)
                samples[static_cast<std::size_t>(j) * g.n_lon + i] =
                    pot.value(chart_to_unit({g.theta[j], g.lon[i]}));
        v_coeffs = transform->analysis(samples);
        v_grid = transform->synthesis(v_coeffs);
    }

    // scratch buffers reused across rhs calls
    std::vector<double> amp, lap_s_grid, lap_a_grid, at, al, st, sl;
    std::vector<double> d_amp_grid, d_phase_grid, vq_grid;
};

struct FieldRhsOutput {
    std::vector<double> dc_amp;    ///< coefficient increments of R
    std::vector<double> dc_phase;  ///< coefficient increments of S
    std::vector<double> vq_coeffs; ///< band-limited V_Q (empty when zero)
    double vq_sup = 0.0;
    bool vq_zero = true;
    std::size_t masked = 0;
};

/// Field-space rhs on coefficient vectors.
inline void field_rhs(QuantumWorkspace& ws, const std::vector<double>& c_amp,
                      const std::vector<double>& c_phase, double kappa,
                      double epsilon, double r_floor_rel, FieldRhsOutput& out) {
    const SphereTransform& t = *ws.transform;
    const std::size_t size = t.grid().size();
    const double inv_r2 = 1.0 / (kSphereRadius * kSphereRadius);

    ws.amp = t.synthesis(c_amp);
    ws.lap_s_grid = t.synthesis(t.laplacian_coeffs(c_phase));
    ws.lap_a_grid = t.synthesis(t.laplacian_coeffs(c_amp));
    t.synthesis_gradient(c_amp, ws.at, ws.al);
    t.synthesis_gradient(c_phase, ws.st, ws.sl);

    // quantum potential on the grid; a Laplacian below the spectral noise
    // floor counts as exactly zero
    double rmax = 0.0;
    for (double v : ws.amp) rmax = std::max(rmax, std::abs(v));
    double lap_max = 0.0;
    for (double v : ws.lap_a_grid) lap_max = std::max(lap_max, std::abs(v));
    const int lmax = t.lmax();
    const double noise_floor =
        200.0 * 2.22e-16 * 4.0 * lmax * (lmax + 1.0) * std::max(rmax, 1e-300);

    ws.vq_grid.assign(size, 0.0);
    out.masked = 0;
    out.vq_zero = (lap_max * inv_r2 <= noise_floor);
    out.vq_sup = 0.0;
    if (!out.vq_zero) {
        const double floor = r_floor_rel * rmax;
        for (std::size_t k = 0; k < size; ++k) {
            if (std::abs(ws.amp[k]) < floor) {
                ++out.masked;
            } else {
                ws.vq_grid[k] = -inv_r2 * ws.lap_a_grid[k] / (2.0 * ws.amp[k]);
            }
            out.vq_sup = std::max(out.vq_sup, std::abs(ws.vq_grid[k]));
        }
    }

    const double inv_sqrt_kappa = 1.0 / std::sqrt(std::max(kappa, 1e-14));
    ws.d_amp_grid.resize(size);
    ws.d_phase_grid.resize(size);
    for (std::size_t k = 0; k < size; ++k) {
        const double grad_rs = inv_r2 * (ws.at[k] * ws.st[k] + ws.al[k] * ws.sl[k]);
        const double grad_ss = inv_r2 * (ws.st[k] * ws.st[k] + ws.sl[k] * ws.sl[k]);
        const double v_t = ws.v_grid[k] + epsilon * ws.vq_grid[k];
        ws.d_amp_grid[k] =
            -inv_sqrt_kappa * (grad_rs + 0.5 * ws.amp[k] * inv_r2 * ws.lap_s_grid[k]);
        ws.d_phase_grid[k] = -inv_sqrt_kappa * (0.5 * grad_ss + v_t);
    }
    out.dc_amp = t.analysis(ws.d_amp_grid);
    out.dc_phase = t.analysis(ws.d_phase_grid);
    out.vq_coeffs = out.vq_zero ? std::vector<double>() : t.analysis(ws.vq_grid);
}

/// Curve-variable rates given the band-limited total potential at Q.
struct CurveRates {
    Vec3 dx, du;
    double dkappa = 0.0;
};

inline CurveRates curve_rates(Vec3 x, Vec3 u, double kappa, Vec3 grad_vt,
                              double vt_at_q, double kappa_degree,
                              KTildeMode mode, int branch_sign) {
    const double u_grad = u.dot(grad_vt);
    CurveRates r;
    r.dx = u;
    r.du = (-u.norm2() / x.norm2()) * x - (1.0 / kappa) * (grad_vt - u_grad * u);
    double ktilde = 0.0;
    if (mode == KTildeMode::classical_default) {
        const double arg = -(1.0 + 2.0 * vt_at_q / kappa);
        ktilde = -kappa_degree * kappa * branch_sign * std::sqrt(std::max(0.0, arg));
    }
    r.dkappa = -2.0 * u_grad + ktilde;
    return r;
}

}  // namespace detail

struct QuantumIncrement {
    double dtheta = 0.0;
    double dlon = 0.0;
    double dphi = 0.0;
    double dkappa = 0.0;
    ShapeField d_amplitude;
    ShapeField d_phase;
    double vq_at_q = 0.0;
    double vq_sup = 0.0;
};

/// Full quantum equation-of-state increment at a state (chart form for the
/// curve variables, band-limited fields on the grid). branch_sign only
/// matters for the default Ktilde. The curve feels the band-limited
/// projection of V_T, consistent with the field discretization.
inline QuantumIncrement quantum_rhs(const QuantumCurveState& st,
                                    const ShapePotential& pot,
                                    const QuantumParams& params = {},
                                    int branch_sign = +1) {
    st.validate();
    detail::QuantumWorkspace ws(st.amplitude.transform, pot);
    detail::FieldRhsOutput f;
    detail::field_rhs(ws, st.amplitude.coeffs(), st.phase.coeffs(), st.kappa,
                      params.epsilon, params.r_floor_rel, f);

    const ChartCoords q = st.q.coords;
    const SphereTransform& t = *st.amplitude.transform;

    double v1, v2;
    coeff_gradient_at(t, ws.v_coeffs, q, v1, v2);
    double v_t_at_q = t.point_eval(ws.v_coeffs, q.theta, q.lon);
    double vq_at_q = 0.0;
    if (!f.vq_zero) {
        double q1, q2;
        coeff_gradient_at(t, f.vq_coeffs, q, q1, q2);
        v1 += params.epsilon * q1;
        v2 += params.epsilon * q2;
        vq_at_q = t.point_eval(f.vq_coeffs, q.theta, q.lon);
        v_t_at_q += params.epsilon * vq_at_q;
    }

    const double sphi = std::sin(st.phi.angle), cphi = std::cos(st.phi.angle);
    const double sin_theta = std::sin(q.theta);
    if (std::abs(sin_theta) < 1e-14)
        throw Error("quantum_rhs: chart form undefined at the poles");

    QuantumIncrement inc;
    inc.dtheta = 2.0 * cphi;
    inc.dlon = 2.0 * sphi / sin_theta;
    inc.dphi = -2.0 * (std::cos(q.theta) / sin_theta) * sphi +
               (v1 * sphi - v2 * cphi) / st.kappa;
    const double u_grad = cphi * v1 + sphi * v2;
    double ktilde = 0.0;
    if (params.ktilde == KTildeMode::classical_default) {
        const double arg = -(1.0 + 2.0 * v_t_at_q / st.kappa);
        ktilde = -pot.kappa_degree() * st.kappa * branch_sign *
                 std::sqrt(std::max(0.0, arg));
    }
    inc.dkappa = -2.0 * u_grad + ktilde;
    inc.d_amplitude = ShapeField(st.amplitude.transform, t.synthesis(f.dc_amp));
    inc.d_phase = ShapeField(st.amplitude.transform, t.synthesis(f.dc_phase));
    inc.vq_at_q = vq_at_q;
    inc.vq_sup = f.vq_sup;
    return inc;
}

// ---------------------------------------------------------------------------
// co-integration of curve and fields
// ---------------------------------------------------------------------------

struct QuantumIntegrateOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
    double cfl = 0.7;                ///< step cap factor against the field stiffness
    std::size_t max_steps = 400'000;
    double kappa_floor = 1e-10;
    double record_every = 0.0;       ///< 0: every accepted step
};

struct QuantumIntegrateResult {
    TrajectoryRecord record;
    OdeStatus ode_status = OdeStatus::ok;
    QuantumCurveState final_state;
    double max_norm_drift = 0.0;
    double max_delta = 0.0;          ///< max guidance residual along the run
};

/// Advance the coupled (curve, fields) state in arc-length; samples carry
/// Com(Q), sup|V_Q|, the guidance residual and the norm drift.
inline QuantumIntegrateResult integrate_quantum(const QuantumCurveState& initial,
                                                const ShapePotential& pot,
                                                double arclen,
                                                const QuantumParams& params = {},
                                                const QuantumIntegrateOptions& opt = {},
                                                const std::vector<double>& masses = {1.0, 1.0, 1.0}) {
    initial.validate();
    if (arclen < 0.0) throw Error("integrate_quantum: arclen must be >= 0");
    auto transform = initial.amplitude.transform;
    const std::size_t ncoeff = static_cast<std::size_t>(transform->coeff_count());
    detail::QuantumWorkspace ws(transform, pot);

    // state: [X(3), U(3), kappa | R coeffs | S coeffs]
    std::vector<double> y(7 + 2 * ncoeff);
    {
        const Vec3 x = initial.q.embedding();
        const Vec3 u = direction_to_embedded(initial.q.coords, initial.phi);
        y[0] = x.x; y[1] = x.y; y[2] = x.z;
        y[3] = u.x; y[4] = u.y; y[5] = u.z;
        y[6] = initial.kappa;
        const auto ca = initial.amplitude.coeffs();
        const auto cs = initial.phase.coeffs();
        std::copy(ca.begin(), ca.end(), y.begin() + 7);
        std::copy(cs.begin(), cs.end(), y.begin() + 7 + ncoeff);
    }
    int branch_sign = initial.omega >= 0.0 ? +1 : -1;
    if (params.ktilde == KTildeMode::guidance) branch_sign = 0;

    QuantumIntegrateResult result;
    result.record.kind = TrajectoryKind::quantum;
    result.record.masses = masses;
    result.record.homogeneity = pot.homogeneity();

    // Parseval: int R^2 dmu = (1/4) sum c^2
    auto norm_of = [&](const double* c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < ncoeff; ++k) acc += c[k] * c[k];
        return 0.25 * acc;
    };
    const double norm0 = norm_of(y.data() + 7);

    detail::FieldRhsOutput fbuf;
    std::vector<double> ca_scratch(ncoeff), cs_scratch(ncoeff);
    auto rhs = [&](double, const std::vector<double>& yy, std::vector<double>& dy) {
        const Vec3 x{yy[0], yy[1], yy[2]};
        const Vec3 u{yy[3], yy[4], yy[5]};
        const double kappa = std::max(yy[6], 1e-14);
        std::copy(yy.begin() + 7, yy.begin() + 7 + ncoeff, ca_scratch.begin());
        std::copy(yy.begin() + 7 + ncoeff, yy.end(), cs_scratch.begin());
        detail::field_rhs(ws, ca_scratch, cs_scratch, kappa, params.epsilon,
                          params.r_floor_rel, fbuf);

        const Vec3 n = x.normalized();
        const ChartCoords q = unit_to_chart(n);
        Vec3 grad = coeff_gradient_embedded(*transform, ws.v_coeffs, q);
        double v_t = transform->point_eval(ws.v_coeffs, q.theta, q.lon);
        if (!fbuf.vq_zero) {
            grad += params.epsilon *
                    coeff_gradient_embedded(*transform, fbuf.vq_coeffs, q);
            v_t += params.epsilon *
                   transform->point_eval(fbuf.vq_coeffs, q.theta, q.lon);
        }
        const auto cr = detail::curve_rates(x, u, kappa, grad, v_t,
                                            pot.kappa_degree(), params.ktilde,
                                            branch_sign);
        dy[0] = cr.dx.x; dy[1] = cr.dx.y; dy[2] = cr.dx.z;
        dy[3] = cr.du.x; dy[4] = cr.du.y; dy[5] = cr.du.z;
        dy[6] = cr.dkappa;
        std::copy(fbuf.dc_amp.begin(), fbuf.dc_amp.end(), dy.begin() + 7);
        std::copy(fbuf.dc_phase.begin(), fbuf.dc_phase.end(), dy.begin() + 7 + ncoeff);
    };

    RunStatus status = RunStatus::completed;
    double last_record = -1.0;

    auto record_sample = [&](double s, const std::vector<double>& yy) {
        TrajectorySample smp;
        smp.s = s;
        const Vec3 x{yy[0], yy[1], yy[2]};
        smp.n = x.normalized();
        const ChartCoords q = unit_to_chart(smp.n);
        const Vec3 u{yy[3], yy[4], yy[5]};
        smp.dir = (std::sin(q.theta) > 1e-12) ? embedded_to_direction(q, u).angle : 0.0;
        smp.kappa = yy[6];
        smp.pot = transform->point_eval(ws.v_coeffs, q.theta, q.lon);
        smp.com = masses.size() == 3 ? complexity_of_shape(smp.n, masses) : 0.0;

        std::copy(yy.begin() + 7, yy.begin() + 7 + ncoeff, ca_scratch.begin());
        std::copy(yy.begin() + 7 + ncoeff, yy.end(), cs_scratch.begin());
        smp.norm_drift = norm_of(ca_scratch.data()) - norm0;

        // quantum potential diagnostics from the coefficient state
        const auto lap = transform->laplacian_coeffs(ca_scratch);
        const auto lap_grid = transform->synthesis(lap);
        const auto amp_grid = transform->synthesis(ca_scratch);
        const double inv_r2 = 1.0 / (kSphereRadius * kSphereRadius);
        double rmax = 0.0, lap_max = 0.0;
        for (double v : amp_grid) rmax = std::max(rmax, std::abs(v));
        for (double v : lap_grid) lap_max = std::max(lap_max, std::abs(v));
        const int lmax = transform->lmax();
        const double noise_floor =
            200.0 * 2.22e-16 * 4.0 * lmax * (lmax + 1.0) * std::max(rmax, 1e-300);
        double vq_at_q = 0.0;
        double vq_sup = 0.0;
        if (lap_max * inv_r2 > noise_floor) {
            std::vector<double> vq(amp_grid.size(), 0.0);
            const double floor = params.r_floor_rel * rmax;
            for (std::size_t k = 0; k < amp_grid.size(); ++k) {
                if (std::abs(amp_grid[k]) >= floor)
                    vq[k] = -inv_r2 * lap_grid[k] / (2.0 * amp_grid[k]);
                vq_sup = std::max(vq_sup, std::abs(vq[k]));
            }
            vq_at_q = transform->point_eval(transform->analysis(vq), q.theta, q.lon);
        }
        smp.vq_sup = vq_sup;

        const GuidanceResidual gr = guidance_residual_at(
            *transform, cs_scratch, q, Direction{smp.dir}, smp.kappa);
        smp.delta = gr.norm;
        const double v_t = smp.pot + params.epsilon * vq_at_q;
        const double arg = -(1.0 + 2.0 * v_t / std::max(smp.kappa, 1e-14));
        smp.omega = branch_sign * std::sqrt(std::max(0.0, arg));
        result.record.samples.push_back(std::move(smp));
        result.max_norm_drift =
            std::max(result.max_norm_drift, std::abs(smp.norm_drift));
        result.max_delta = std::max(result.max_delta, gr.norm);
        return arg;
    };

    record_sample(0.0, y);

    if (arclen > 0.0) {
        auto post = [&](double s, std::vector<double>& yy, double) {
            Vec3 x{yy[0], yy[1], yy[2]};
            Vec3 u{yy[3], yy[4], yy[5]};
            x = x.normalized() * kSphereRadius;
            u = (u - (u.dot(x) / x.norm2()) * x).normalized();
            yy[0] = x.x; yy[1] = x.y; yy[2] = x.z;
            yy[3] = u.x; yy[4] = u.y; yy[5] = u.z;

            if (opt.record_every <= 0.0 || s - last_record >= opt.record_every ||
                s >= arclen) {
                const double root_arg = record_sample(s, yy);
                last_record = s;
                if (params.ktilde == KTildeMode::classical_default &&
                    branch_sign < 0 && root_arg <= 0.0)
                    branch_sign = +1;
            }
            if (yy[6] < opt.kappa_floor) {
                status = RunStatus::degenerate_stop;
                return StepControl::halt;
            }
            return StepControl::proceed;
        };

        OdeOptions ode_opt;
        ode_opt.rel_tol = opt.rel_tol;
        ode_opt.abs_tol = opt.abs_tol;
        const int lmax = transform->lmax();
        const double stiff0 = 2.0 * lmax * (lmax + 1.0);

        // the field stiffness scales like 1/sqrt(kappa): integrate in
        // segments so the step cap tracks the current kappa
        OdeOutcome outcome;
        std::size_t steps_used = 0;
        double s_cur = 0.0;
        while (s_cur < arclen) {
            const double kappa_now = std::max(y[6], opt.kappa_floor);
            ode_opt.max_step =
                std::min(arclen - s_cur, opt.cfl * 2.8 * std::sqrt(kappa_now) / stiff0);
            ode_opt.initial_step = ode_opt.max_step / 4.0;
            ode_opt.max_steps = opt.max_steps - steps_used;
            const double segment_end =
                std::min(arclen, s_cur + std::max(200.0 * ode_opt.max_step, 1e-3));
            outcome = integrate_adaptive(rhs, y, s_cur, segment_end, ode_opt, post);
            steps_used += outcome.accepted + outcome.rejected;
            s_cur = outcome.s_end;
            if (outcome.status != OdeStatus::ok || steps_used >= opt.max_steps) break;
        }
        result.ode_status = outcome.status;
        if (outcome.status == OdeStatus::step_underflow)
            status = RunStatus::singularity_stop;
        else if (outcome.status == OdeStatus::max_steps || steps_used >= opt.max_steps)
            status = (outcome.status == OdeStatus::ok && s_cur >= arclen)
                         ? status
                         : RunStatus::truncated;
    }
    result.record.status = status;

    // final state (fields synthesized back to grid values)
    result.final_state.q.coords = unit_to_chart(Vec3{y[0], y[1], y[2]}.normalized());
    const ChartCoords qf = result.final_state.q.coords;
    const Vec3 uf{y[3], y[4], y[5]};
    result.final_state.phi =
        (std::sin(qf.theta) > 1e-12) ? embedded_to_direction(qf, uf) : Direction{0.0};
    result.final_state.kappa = y[6];
    result.final_state.omega = result.record.samples.back().omega;
    std::copy(y.begin() + 7, y.begin() + 7 + ncoeff, ca_scratch.begin());
    std::copy(y.begin() + 7 + ncoeff, y.end(), cs_scratch.begin());
    result.final_state.amplitude = ShapeField(transform, transform->synthesis(ca_scratch));
    result.final_state.phase = ShapeField(transform, transform->synthesis(cs_scratch));
    return result;
}

// ---------------------------------------------------------------------------
// subsystem diagnostics
// ---------------------------------------------------------------------------

struct SubsystemPartition {
    int first = 0;   ///< pair member
    int second = 1;  ///< pair member
    int single = 2;
};

struct SubsystemReport {
    double factorization_residual = 0.0;  ///< relative L2 best-product residual
    double scale_log_rate = 0.0;          ///< d ln R_I / ds along the state's tangent
    double k_subsystem = 0.0;             ///< -gamma_k kappa (D_I / p_I)
    bool guidance_regime = false;
};

/// K_I from the classical transport formulae; D_I/p_I = d ln R_I / ds.
inline double k_subsystem(double kappa, double kappa_degree, double dlog_scale) {
    return -kappa_degree * kappa * dlog_scale;
}

namespace detail {

/// Rotation taking the standard chart to the partition-adapted chart
/// (pair as the first Jacobi vector). Rows of the returned array are the
/// adapted axes expressed in standard coordinates.
inline std::array<Vec3, 3> adapted_axes(const SubsystemPartition& part,
                                        const std::vector<double>& masses) {
    std::array<int, 3> order = {part.first, part.second, part.single};
    std::vector<double> perm_masses = {masses[order[0]], masses[order[1]],
                                       masses[order[2]]};
    std::array<Vec3, 3> rows;
    for (int axis = 0; axis < 3; ++axis) {
        Vec3 ne{};
        (axis == 0 ? ne.x : (axis == 1 ? ne.y : ne.z)) = 1.0;
        const Configuration rep_adapted = representative_of_unit(ne, perm_masses);
        // undo the relabeling: particle order[i] gets representative position i
        Configuration cfg;
        cfg.masses = masses;
        cfg.positions.resize(3);
        for (int i = 0; i < 3; ++i) cfg.positions[order[i]] = rep_adapted.positions[i];
        rows[axis] = project(cfg, false).unit();
    }
    rows[0] = rows[0].normalized();
    rows[1] = (rows[1] - rows[1].dot(rows[0]) * rows[0]).normalized();
    rows[2] = (rows[2] - rows[2].dot(rows[0]) * rows[0] -
               rows[2].dot(rows[1]) * rows[1])
                  .normalized();
    return rows;
}

}  // namespace detail

struct SubsystemOptions {
    double factorization_threshold = 0.05;
    double scale_rate_threshold = 0.05;
    int rank1_lat = 48;
    int rank1_lon = 96;
    int rank1_iters = 128;
};

/// Factorization error, subsystem scale drift, and the K_I estimate for a
/// candidate pair+singleton partition of the quantum state. Report-only.
inline SubsystemReport subsystem_diagnostics(const QuantumCurveState& st,
                                             const SubsystemPartition& part,
                                             const std::vector<double>& masses = {1.0, 1.0, 1.0},
                                             const ShapePotential* pot = nullptr,
                                             const SubsystemOptions& opt = {}) {
    st.validate();
    const auto axes = detail::adapted_axes(part, masses);
    const SphereTransform& t = *st.amplitude.transform;
    const auto ca = t.analysis(st.amplitude.values);
    const auto cs = t.analysis(st.phase.values);

    // weighted complex field matrix over the adapted chart (alpha, psi)
    const int na = opt.rank1_lat, np = opt.rank1_lon;
    std::vector<double> xa, wa;
    gauss_legendre(na, xa, wa);
    std::vector<std::complex<double>> g(static_cast<std::size_t>(na) * np);
    double total = 0.0;
    for (int ia = 0; ia < na; ++ia) {
        const double ca_ = xa[ia];
        const double sa = std::sqrt(1.0 - ca_ * ca_);
        for (int ip = 0; ip < np; ++ip) {
            const double psi = 2.0 * kPi * ip / np;
            const Vec3 n = ca_ * axes[0] + sa * std::cos(psi) * axes[1] +
                           sa * std::sin(psi) * axes[2];
            const ChartCoords q = unit_to_chart(n);
            const double r = t.point_eval(ca, q.theta, q.lon);
            const double s = t.point_eval(cs, q.theta, q.lon);
            const double w = std::sqrt(wa[ia] * (2.0 * kPi / np));
            g[static_cast<std::size_t>(ia) * np + ip] = w * std::polar(std::abs(r), s);
            total += std::norm(g[static_cast<std::size_t>(ia) * np + ip]);
        }
    }
    // top singular value via power iteration
    std::vector<std::complex<double>> v(np, {1.0 / std::sqrt(double(np)), 0.0});
    std::vector<std::complex<double>> u(na);
    double sigma = 0.0;
    for (int iter = 0; iter < opt.rank1_iters; ++iter) {
        for (int ia = 0; ia < na; ++ia) {
            std::complex<double> acc = 0.0;
            for (int ip = 0; ip < np; ++ip)
                acc += g[static_cast<std::size_t>(ia) * np + ip] * v[ip];
            u[ia] = acc;
        }
        double un = 0.0;
        for (auto& ui : u) un += std::norm(ui);
        un = std::sqrt(un);
        if (un == 0.0) break;
        for (auto& ui : u) ui /= un;
        for (int ip = 0; ip < np; ++ip) {
            std::complex<double> acc = 0.0;
            for (int ia = 0; ia < na; ++ia)
                acc += std::conj(g[static_cast<std::size_t>(ia) * np + ip]) * u[ia];
            v[ip] = acc;
        }
        double vn = 0.0;
        for (auto& vi : v) vn += std::norm(vi);
        vn = std::sqrt(vn);
        if (vn == 0.0) break;
        sigma = vn;
        for (auto& vi : v) vi /= vn;
    }
    SubsystemReport rep;
    rep.factorization_residual =
        total > 0.0 ? std::sqrt(std::max(0.0, 1.0 - sigma * sigma / total)) : 0.0;

    // subsystem scale rate along the state's tangent:
    // R_I(n) = sqrt((1 + n . axes[0]) / 2) on the unit-inertia shell
    const Vec3 u_emb = direction_to_embedded(st.q.coords, st.phi);
    const Vec3 n0 = st.q.unit();
    const double n1 = n0.dot(axes[0]);
    rep.scale_log_rate = axes[0].dot(u_emb) / std::max(1.0 + n1, 1e-12);
    const double gk = pot ? pot->kappa_degree() : 1.0;
    rep.k_subsystem = k_subsystem(st.kappa, gk, rep.scale_log_rate);
    rep.guidance_regime =
        rep.factorization_residual < opt.factorization_threshold &&
        std::abs(rep.scale_log_rate) < opt.scale_rate_threshold;
    return rep;
}

}  // namespace psd
