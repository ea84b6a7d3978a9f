#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "psd/shape_space.hpp"

using namespace psd;

namespace {

Configuration equal_mass(std::initializer_list<Vec2> pos) {
    Configuration c;
    c.positions = pos;
    c.masses = {1.0, 1.0, 1.0};
    return c;
}

Configuration apply_similarity(const Configuration& c, double scale, double rot,
                               Vec2 shift) {
    Configuration out = c;
    const double cr = std::cos(rot), sr = std::sin(rot);
    for (auto& p : out.positions) {
        const Vec2 r{cr * p.x - sr * p.y, sr * p.x + cr * p.y};
        p = scale * r + shift;
    }
    return out;
}

Configuration random_config(Rng& rng, double spread = 1.0) {
    Configuration c;
    c.masses = {1.0, 1.0, 1.0};
    for (int i = 0; i < 3; ++i)
        c.positions.push_back({spread * rng.normal(), spread * rng.normal()});
    return c;
}

}  // namespace

TEST_CASE("equilateral triangles project to a pole") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = std::exp(rng.uniform(-3.0, 3.0));
        Configuration c = equal_mass({{0.0, 0.0},
                                      {a, 0.0},
                                      {0.5 * a, 0.5 * std::sqrt(3.0) * a}});
        c = apply_similarity(c, 1.0, rng.uniform(0.0, 2.0 * kPi),
                             {rng.normal(), rng.normal()});
        const ShapePoint p = project(c);
        REQUIRE(std::abs(std::abs(p.unit().z) - 1.0) < 1e-12);
    }
    // mirrored triangle lands on the opposite pole
    const ShapePoint up = project(equal_mass(
        {{0.0, 0.0}, {1.0, 0.0}, {0.5, 0.5 * std::sqrt(3.0)}}));
    const ShapePoint down = project(equal_mass(
        {{0.0, 0.0}, {1.0, 0.0}, {0.5, -0.5 * std::sqrt(3.0)}}));
    REQUIRE(up.unit().z == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(down.unit().z == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("collinear shapes sit on the equator") {
    // particle 2 at the midpoint of 1 and 3; frozen chart value derived from
    // the Jacobi/Hopf map: n = (-1/2, sqrt(3)/2, 0)
    const Configuration c =
        equal_mass({{-1.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}});
    const ShapePoint p = project(c);
    REQUIRE(p.coords.theta == Catch::Approx(kPi / 2).margin(1e-12));
    REQUIRE(p.unit().x == Catch::Approx(-0.5).margin(1e-12));
    REQUIRE(p.unit().y == Catch::Approx(std::sqrt(3.0) / 2).margin(1e-12));

    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const double t = rng.uniform(0.1, 0.9);
        Configuration col = equal_mass({{0.0, 0.0}, {t, 0.0}, {1.0, 0.0}});
        col = apply_similarity(col, std::exp(rng.uniform(-2, 2)),
                               rng.uniform(0, 2 * kPi), {rng.normal(), rng.normal()});
        REQUIRE(std::abs(project(col).unit().z) < 1e-12);
    }
}

TEST_CASE("project is invariant under 100 random similarity transforms") {
    Rng rng(42);
    const Configuration base = random_config(rng);
    const Vec3 n0 = project(base).unit();
    for (int trial = 0; trial < 100; ++trial) {
        const double scale = std::exp(rng.uniform(-6.9, 6.9));  // ~[1e-3, 1e3]
        const double rot = rng.uniform(0.0, 2.0 * kPi);
        const Vec2 shift{1e3 * rng.normal(), 1e3 * rng.normal()};
        const Vec3 n = project(apply_similarity(base, scale, rot, shift)).unit();
        REQUIRE((n - n0).norm() < 1e-10);
    }
}

TEST_CASE("project is idempotent on the gauge-fixed representative") {
    Rng rng(3);
    for (int trial = 0; trial < 25; ++trial) {
        const Configuration c = random_config(rng);
        const ShapePoint p = project(c);
        REQUIRE(p.representative.has_value());
        REQUIRE(p.representative->moment_of_inertia() == Catch::Approx(1.0).margin(1e-12));
        const ShapePoint p2 = project(*p.representative);
        REQUIRE((p2.unit() - p.unit()).norm() < 1e-12);
        // gauge fixing is itself idempotent
        const ShapePoint p3 = project(*p2.representative);
        for (int i = 0; i < 3; ++i) {
            REQUIRE(p3.representative->positions[i].x ==
                    Catch::Approx(p2.representative->positions[i].x).margin(1e-12));
            REQUIRE(p3.representative->positions[i].y ==
                    Catch::Approx(p2.representative->positions[i].y).margin(1e-12));
        }
    }
}

TEST_CASE("project rejects coincident configurations") {
    const Configuration c = equal_mass({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}});
    REQUIRE_THROWS_AS(project(c), ZeroInertiaError);
}

TEST_CASE("relabeling acts as a fixed rotation of the sphere") {
    // Equivariance: for equal masses a particle permutation corresponds to an
    // orthogonal map of the sphere. Fit the map on four probe shapes, then
    // check it on random ones.
    const std::array<int, 3> perm = {1, 2, 0};
    auto permute = [&](const Configuration& c) {
        Configuration out = c;
        for (int i = 0; i < 3; ++i) out.positions[i] = c.positions[perm[i]];
        return out;
    };

    Rng rng(5);
    std::array<Vec3, 3> from, to;
    for (int k = 0; k < 3; ++k) {
        Configuration c = random_config(rng);
        from[k] = project(c).unit();
        to[k] = project(permute(c)).unit();
    }
    // linear map M with M*from[k] = to[k]; solve 3x3 by Cramer per row
    auto solve_row = [&](int row) {
        const Vec3 f0 = from[0], f1 = from[1], f2 = from[2];
        const double det = f0.dot(f1.cross(f2));
        REQUIRE(std::abs(det) > 1e-6);
        auto comp = [&](Vec3 v) { return row == 0 ? v.x : (row == 1 ? v.y : v.z); };
        const Vec3 rhs{comp(to[0]), comp(to[1]), comp(to[2])};
        // M_row . f_k = rhs_k  =>  M_row = (f matrix)^{-T} rhs
        const Vec3 c0 = f1.cross(f2), c1 = f2.cross(f0), c2 = f0.cross(f1);
        return Vec3{(rhs.x * c0.x + rhs.y * c1.x + rhs.z * c2.x) / det,
                    (rhs.x * c0.y + rhs.y * c1.y + rhs.z * c2.y) / det,
                    (rhs.x * c0.z + rhs.y * c1.z + rhs.z * c2.z) / det};
    };
    const Vec3 m0 = solve_row(0), m1 = solve_row(1), m2 = solve_row(2);

    // orthogonality of the fitted map
    REQUIRE(m0.norm() == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(m1.norm() == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(m2.norm() == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(std::abs(m0.dot(m1)) < 1e-9);
    REQUIRE(std::abs(m0.dot(m2)) < 1e-9);
    REQUIRE(std::abs(m1.dot(m2)) < 1e-9);

    for (int trial = 0; trial < 50; ++trial) {
        const Configuration c = random_config(rng);
        const Vec3 n = project(c).unit();
        const Vec3 expected{m0.dot(n), m1.dot(n), m2.dot(n)};
        const Vec3 actual = project(permute(c)).unit();
        REQUIRE((expected - actual).norm() < 1e-9);
    }
}

TEST_CASE("metric is positive definite across the chart") {
    ShapeMetric metric{{1.0, 1.0, 1.0}};
    Rng rng(9);
    for (int trial = 0; trial < 10000; ++trial) {
        ChartCoords q{std::acos(rng.uniform(-1.0, 1.0)), rng.uniform(0.0, 2 * kPi)};
        const Metric2 m = metric.g(q);
        REQUIRE(m.g_tt > 0.0);
        REQUIRE(m.g_pp > 0.0);
    }
    // equal-mass chart metric is the round sphere of radius 1/2
    ChartCoords q{1.1, 2.2};
    REQUIRE(metric.g(q).g_tt == Catch::Approx(0.25).margin(1e-15));
    REQUIRE(metric.g(q).g_pp ==
            Catch::Approx(0.25 * std::sin(1.1) * std::sin(1.1)).margin(1e-15));
}

TEST_CASE("unit_tangent normalization and ray property") {
    ShapeMetric metric{{1.0, 1.0, 1.0}};
    Rng rng(13);
    for (int trial = 0; trial < 1000; ++trial) {
        ChartCoords q{std::acos(rng.uniform(-0.99, 0.99)), rng.uniform(0.0, 2 * kPi)};
        const double p_t = rng.normal(), p_l = rng.normal();
        if (std::hypot(p_t, p_l) < 1e-12) continue;
        const Direction d = unit_tangent(metric, q, p_t, p_l);
        double u_t, u_l;
        direction_components(metric, q, d, u_t, u_l);
        const Metric2 m = metric.g(q);
        REQUIRE(m.g_tt * u_t * u_t + m.g_pp * u_l * u_l ==
                Catch::Approx(1.0).margin(1e-12));
        // positive rescaling of p leaves the direction unchanged
        const double lambda = std::exp(rng.uniform(-5.0, 5.0));
        const Direction d2 = unit_tangent(metric, q, lambda * p_t, lambda * p_l);
        REQUIRE(d2.angle == Catch::Approx(d.angle).margin(1e-12));
    }
    REQUIRE_THROWS_AS(unit_tangent(metric, ChartCoords{1.0, 1.0}, 0.0, 0.0),
                      UndefinedDirectionError);
    // p along d/dtheta gives phi = 0 by convention
    const Direction d = unit_tangent(metric, ChartCoords{1.0, 0.5}, 0.7, 0.0);
    REQUIRE(d.angle == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("arc length element") {
    ShapeMetric metric{{1.0, 1.0, 1.0}};
    const ChartCoords q{0.8, 1.5};
    REQUIRE(arc_length_element(metric, q, 0.0, 0.0) == 0.0);
    // round metric of radius 1/2: ds = dtheta / 2 along a meridian
    REQUIRE(arc_length_element(metric, q, 0.02, 0.0) ==
            Catch::Approx(0.01).margin(1e-15));

    // accumulated ds along a discretized great circle matches the geodesic
    // distance oracle (angle/2), and beats the chord
    const Vec3 a = Vec3{1.0, 0.2, -0.3}.normalized();
    const Vec3 b = Vec3{-0.2, 1.0, 0.5}.normalized();
    const double ang = angle_between(a, b);
    const Vec3 axis = a.cross(b).normalized();
    const Vec3 e2 = axis.cross(a).normalized();
    const int segments = 4000;
    double acc = 0.0;
    ChartCoords prev = unit_to_chart(a);
    for (int k = 1; k <= segments; ++k) {
        const double t = ang * k / segments;
        const Vec3 n = std::cos(t) * a + std::sin(t) * e2;
        const ChartCoords cur = unit_to_chart(n);
        double dlon = cur.lon - prev.lon;
        if (dlon > kPi) dlon -= 2 * kPi;
        if (dlon < -kPi) dlon += 2 * kPi;
        ChartCoords mid{0.5 * (cur.theta + prev.theta), 0.0};
        acc += arc_length_element(metric, mid, cur.theta - prev.theta, dlon);
        prev = cur;
    }
    const double geodesic = shape_distance(a, b);
    REQUIRE(acc == Catch::Approx(geodesic).epsilon(1e-6));
    const double chord = ((a - b) * kSphereRadius).norm();
    REQUIRE(acc >= chord - 1e-9);
}
