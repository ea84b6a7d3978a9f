#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "psd/errors.hpp"
#include "psd/nbody.hpp"
#include "psd/util.hpp"

namespace psd {

// ---------------------------------------------------------------------------
// Shape space of the planar 3-body problem.
//
// Mass-weighted Jacobi vectors turn the centre-of-mass-reduced kinetic metric
// into the flat metric on C^2; quotienting rotations and dilatations is the
// Hopf map C^2 \ {0} -> S^2. In the chart used here
//
//   n1 = (|z1|^2 - |z2|^2)/I,  n2 = 2 Re(conj(z1) z2)/I,  n3 = 2 Im(conj(z1) z2)/I,
//
// the quotient kinematic metric is the round metric of radius 1/2, collinear
// shapes sit on the equator n3 = 0, and (for equal masses) the two equilateral
// shapes are the poles. All squared inter-particle distances on the unit-
// inertia representative are affine in n:  r_ij^2 = a_ij + b_ij . n.
// ---------------------------------------------------------------------------

inline constexpr double kSphereRadius = 0.5;

/// Mass-weighted Jacobi vectors of a planar 3-body configuration as complex
/// numbers; translations drop out, |z1|^2 + |z2|^2 = I_cm.
struct JacobiVectors {
    std::complex<double> z1;
    std::complex<double> z2;

    double inertia() const { return std::norm(z1) + std::norm(z2); }
};

inline JacobiVectors jacobi_vectors(const Configuration& c) {
    c.validate();
    if (c.size() != 3)
        throw ConfigError("jacobi_vectors: planar 3-body chart requires N = 3");
    const double m1 = c.masses[0], m2 = c.masses[1], m3 = c.masses[2];
    const double m12 = m1 + m2;
    const double mu1 = m1 * m2 / m12;
    const double mu2 = m3 * m12 / (m1 + m2 + m3);
    const Vec2 r1 = c.positions[1] - c.positions[0];
    const Vec2 cm12 = (m1 * c.positions[0] + m2 * c.positions[1]) / m12;
    const Vec2 r2 = c.positions[2] - cm12;
    return {std::sqrt(mu1) * std::complex<double>(r1.x, r1.y),
            std::sqrt(mu2) * std::complex<double>(r2.x, r2.y)};
}

/// Same map applied to velocities (it is linear in the positions).
inline JacobiVectors jacobi_vectors_of(const Configuration& c,
                                       const std::vector<Vec2>& vectors) {
    Configuration tmp = c;
    tmp.positions = vectors;
    return jacobi_vectors(tmp);
}

/// Unit embedding vector of the shape sphere (radius-1 convention; the metric
/// sphere has radius 1/2, embedding point X = n/2).
inline Vec3 hopf_unit(const JacobiVectors& z, double inertia_floor = 0.0) {
    const double inertia = z.inertia();
    if (!(inertia > inertia_floor) || !(inertia > 0.0))
        throw ZeroInertiaError("hopf_unit: zero total moment of inertia");
    const std::complex<double> cross = std::conj(z.z1) * z.z2;
    return Vec3{(std::norm(z.z1) - std::norm(z.z2)) / inertia,
                2.0 * cross.real() / inertia, 2.0 * cross.imag() / inertia};
}

// ---------------------------------------------------------------------------
// Charts
// ---------------------------------------------------------------------------

/// Identifier of the active chart. The library uses the standard colatitude/
/// longitude chart about the n3 (orientation/area) axis; the equator is the
/// collinear locus.
enum class Chart { standard };

inline const char* chart_name(Chart c) { return c == Chart::standard ? "standard" : "?"; }

struct ChartCoords {
    double theta = 0.0;  ///< colatitude in [0, pi]
    double lon = 0.0;    ///< longitude in [0, 2*pi)
};

inline Vec3 chart_to_unit(const ChartCoords& q) {
    const double st = std::sin(q.theta);
    return {st * std::cos(q.lon), st * std::sin(q.lon), std::cos(q.theta)};
}

inline ChartCoords unit_to_chart(Vec3 n) {
    n = n.normalized();
    ChartCoords q;
    q.theta = std::acos(std::clamp(n.z, -1.0, 1.0));
    q.lon = std::atan2(n.y, n.x);
    if (q.lon < 0.0) q.lon += 2.0 * kPi;
    if (std::abs(n.x) < 1e-300 && std::abs(n.y) < 1e-300) q.lon = 0.0;
    return q;
}

/// A point of shape space: chart coordinates plus (optionally) the gauge-fixed
/// representative configuration (centre of mass at origin, I_cm = 1, first
/// Jacobi vector rotated real-positive).
struct ShapePoint {
    Chart chart = Chart::standard;
    ChartCoords coords;
    std::optional<Configuration> representative;

    Vec3 unit() const { return chart_to_unit(coords); }
    /// Embedding point on the metric sphere of radius 1/2.
    Vec3 embedding() const { return unit() * kSphereRadius; }
};

// ---------------------------------------------------------------------------
// Pair-distance forms r_ij^2 = a + b . n on the unit-inertia shell
// ---------------------------------------------------------------------------

struct PairDistanceForm {
    int i = 0, j = 0;
    double a = 0.0;
    Vec3 b;

    double r2(Vec3 n) const { return a + b.dot(n); }
};

inline std::array<PairDistanceForm, 3> pair_distance_forms(
    const std::vector<double>& masses) {
    const double m1 = masses[0], m2 = masses[1], m3 = masses[2];
    const double m12 = m1 + m2;
    const double mu1 = m1 * m2 / m12;
    const double mu2 = m3 * m12 / (m1 + m2 + m3);
    const double smu = std::sqrt(mu1 * mu2);

    std::array<PairDistanceForm, 3> f{};
    f[0] = {0, 1, 0.5 / mu1, Vec3{0.5 / mu1, 0.0, 0.0}};

    const double c2 = m2 / m12;  // x3 - x1 = z2/sqrt(mu2) + c2 z1/sqrt(mu1)
    f[1] = {0, 2, 0.5 / mu2 + c2 * c2 * 0.5 / mu1,
            Vec3{c2 * c2 * 0.5 / mu1 - 0.5 / mu2, c2 / smu, 0.0}};

    const double c1 = m1 / m12;  // x3 - x2 = z2/sqrt(mu2) - c1 z1/sqrt(mu1)
    f[2] = {1, 2, 0.5 / mu2 + c1 * c1 * 0.5 / mu1,
            Vec3{c1 * c1 * 0.5 / mu1 - 0.5 / mu2, -c1 / smu, 0.0}};
    return f;
}

// ---------------------------------------------------------------------------
// project: Configuration -> ShapePoint
// ---------------------------------------------------------------------------

/// Build the gauge-fixed representative directly from Jacobi vectors.
inline Configuration representative_from_jacobi(JacobiVectors z,
                                                const std::vector<double>& masses) {
    const double inertia = z.inertia();
    if (!(inertia > 0.0))
        throw ZeroInertiaError("representative: zero total moment of inertia");
    const double scale = 1.0 / std::sqrt(inertia);
    z.z1 *= scale;
    z.z2 *= scale;
    // Rotational gauge: first Jacobi vector real-positive (second one at its
    // zero). Deterministic and idempotent.
    std::complex<double> phase;
    if (std::abs(z.z1) > 1e-14)
        phase = std::conj(z.z1) / std::abs(z.z1);
    else if (std::abs(z.z2) > 0.0)
        phase = std::conj(z.z2) / std::abs(z.z2);
    else
        phase = 1.0;
    z.z1 *= phase;
    z.z2 *= phase;

    const double m1 = masses[0], m2 = masses[1], m3 = masses[2];
    const double m12 = m1 + m2;
    const double mu1 = m1 * m2 / m12;
    const double mu2 = m3 * m12 / (m1 + m2 + m3);
    const std::complex<double> r1 = z.z1 / std::sqrt(mu1);
    const std::complex<double> r2 = z.z2 / std::sqrt(mu2);
    // positions with pair-(1,2) CM at the origin, then recentre the full CM
    std::complex<double> x1 = -(m2 / m12) * r1;
    std::complex<double> x2 = (m1 / m12) * r1;
    std::complex<double> x3 = r2;
    const double mtot = m1 + m2 + m3;
    const std::complex<double> cm = (m1 * x1 + m2 * x2 + m3 * x3) / mtot;
    x1 -= cm;
    x2 -= cm;
    x3 -= cm;

    Configuration rep;
    rep.positions = {{x1.real(), x1.imag()}, {x2.real(), x2.imag()}, {x3.real(), x3.imag()}};
    rep.masses = masses;
    return rep;
}

/// Quotient a configuration by translations, rotations, and dilatations.
/// Throws ZeroInertiaError on totally coincident input.
inline ShapePoint project(const Configuration& c, bool with_representative = true) {
    const JacobiVectors z = jacobi_vectors(c);
    const Vec3 n = hopf_unit(z);
    ShapePoint p;
    p.chart = Chart::standard;
    p.coords = unit_to_chart(n);
    if (with_representative) p.representative = representative_from_jacobi(z, c.masses);
    return p;
}

// ---------------------------------------------------------------------------
// Metric, directions, arc length
// ---------------------------------------------------------------------------

struct Metric2 {
    double g_tt = 0.0;  ///< g_{theta theta}
    double g_pp = 0.0;  ///< g_{lon lon}
};

/// Kinematic shape-sphere metric. In the Jacobi/Hopf chart it is the round
/// metric of radius 1/2 for every mass distribution (Fubini-Study quotient);
/// the masses enter through where shapes land on the sphere, not through g.
struct ShapeMetric {
    std::vector<double> masses;
    Chart chart = Chart::standard;

    Metric2 g(const ChartCoords& q) const {
        const double st = std::sin(q.theta);
        return {kSphereRadius * kSphereRadius, kSphereRadius * kSphereRadius * st * st};
    }

    Metric2 g_inv(const ChartCoords& q) const {
        const Metric2 m = g(q);
        return {1.0 / m.g_tt, 1.0 / m.g_pp};
    }

    /// Coordinate derivatives dg_ab/dq^c; only dg_pp/dtheta is nonzero.
    double dg_pp_dtheta(const ChartCoords& q) const {
        return 2.0 * kSphereRadius * kSphereRadius * std::sin(q.theta) * std::cos(q.theta);
    }

    double norm(const ChartCoords& q, double dtheta, double dlon) const {
        const Metric2 m = g(q);
        return std::sqrt(m.g_tt * dtheta * dtheta + m.g_pp * dlon * dlon);
    }
};

/// ds = sqrt(g_ab dq^a dq^b); zero iff dq = 0.
inline double arc_length_element(const ShapeMetric& metric, const ChartCoords& q,
                                 double dtheta, double dlon) {
    if (!std::isfinite(dtheta) || !std::isfinite(dlon))
        throw Error("arc_length_element: non-finite increment");
    return metric.norm(q, dtheta, dlon);
}

/// Direction of the curve at a shape point: the angle of the unit tangent in
/// the orthonormal chart frame (e_theta, e_lon); phi = 0 points along +theta.
struct Direction {
    double angle = 0.0;
};

/// Orthonormal frame vectors at a chart point, as radius-1 embedding vectors.
inline void chart_frame(const ChartCoords& q, Vec3& e_theta, Vec3& e_lon) {
    const double st = std::sin(q.theta), ct = std::cos(q.theta);
    const double cl = std::cos(q.lon), sl = std::sin(q.lon);
    e_theta = {ct * cl, ct * sl, -st};
    e_lon = {-sl, cl, 0.0};
}

/// Unit tangent from covector components (p_theta, p_lon):
/// u^a = g^{ab} p_b / sqrt(g^{cd} p_c p_d). Scale of p drops out.
inline Direction unit_tangent(const ShapeMetric& metric, const ChartCoords& q,
                              double p_theta, double p_lon) {
    const Metric2 gi = metric.g_inv(q);
    const double f1 = std::sqrt(gi.g_tt) * p_theta;  // orthonormal components
    const double f2 = std::sqrt(gi.g_pp) * p_lon;
    const double norm = std::hypot(f1, f2);
    if (!(norm > 0.0))
        throw UndefinedDirectionError("unit_tangent: zero shape momentum");
    return Direction{std::atan2(f2, f1)};
}

/// Chart components (u^theta, u^lon) of the unit tangent with direction phi.
inline void direction_components(const ShapeMetric& metric, const ChartCoords& q,
                                 const Direction& dir, double& u_theta, double& u_lon) {
    const Metric2 m = metric.g(q);
    u_theta = std::cos(dir.angle) / std::sqrt(m.g_tt);
    u_lon = std::sin(dir.angle) / std::sqrt(m.g_pp);
}

/// Embedded unit tangent (Euclidean-unit, tangent to the radius-1/2 sphere).
inline Vec3 direction_to_embedded(const ChartCoords& q, const Direction& dir) {
    Vec3 et, el;
    chart_frame(q, et, el);
    return std::cos(dir.angle) * et + std::sin(dir.angle) * el;
}

/// Direction angle of an embedded tangent vector at q (chart interior only).
inline Direction embedded_to_direction(const ChartCoords& q, Vec3 u) {
    Vec3 et, el;
    chart_frame(q, et, el);
    const double c1 = u.dot(et), c2 = u.dot(el);
    const double norm = std::hypot(c1, c2);
    if (!(norm > 0.0))
        throw UndefinedDirectionError("embedded_to_direction: zero tangent");
    return Direction{std::atan2(c2, c1)};
}

/// Great-circle distance between two shape points in the kinematic metric.
inline double shape_distance(Vec3 n_a, Vec3 n_b) {
    return kSphereRadius * angle_between(n_a, n_b);
}

}  // namespace psd
