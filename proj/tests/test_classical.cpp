#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "psd/classical.hpp"

using namespace psd;

namespace {

CurveState generic_state(const ShapePotential& pot, double theta, double lon,
                         double dir, double kappa_fraction, Branch branch) {
    ShapePoint q;
    q.coords = {theta, lon};
    const double kappa = -2.0 * pot.value(q.unit()) * kappa_fraction;
    return make_curve_state(pot, q, Direction{dir}, kappa, branch);
}

}  // namespace

TEST_CASE("chart-form rhs matches the embedded evolution") {
    const GravityShapePotential pot({1.0, 1.0, 1.0});
    const CurveState st = generic_state(pot, 1.1, 0.7, 0.9, 0.75, Branch::expanding);

    const ClassicalIncrement inc = classical_rhs(st, pot, +1);

    // finite-difference of the embedded integration over a tiny arc
    IntegrateOptions opt;
    opt.rel_tol = 1e-12;
    opt.abs_tol = 1e-14;
    const double ds = 1e-5;
    opt.max_step = ds / 4;
    const auto res = integrate_classical(st, pot, ds, opt);
    const TrajectorySample& last = res.record.samples.back();
    const ChartCoords q1 = last.coords();

    REQUIRE((q1.theta - st.q.coords.theta) / ds ==
            Catch::Approx(inc.dtheta).margin(1e-5));
    REQUIRE((q1.lon - st.q.coords.lon) / ds == Catch::Approx(inc.dlon).margin(1e-5));
    REQUIRE((last.dir - st.phi.angle) / ds == Catch::Approx(inc.dphi).margin(1e-5));
    // finite-difference truncation dominates for dkappa (kappa'' ~ 50)
    REQUIRE((last.kappa - st.kappa) / ds == Catch::Approx(inc.dkappa).margin(2e-3));
}

TEST_CASE("constant potential with kappa = -2V gives great circles") {
    const ConstantShapePotential pot(-1.5);
    const CurveState st = generic_state(pot, 1.2, 0.4, 0.7, 1.0, Branch::expanding);

    // rhs: dkappa vanishes at the root (the branch term is zero there)
    const ClassicalIncrement inc = classical_rhs(st, pot, +1);
    REQUIRE(inc.dkappa == Catch::Approx(0.0).margin(1e-12));

    IntegrateOptions opt;
    opt.rel_tol = 1e-11;
    opt.abs_tol = 1e-13;
    const auto res = integrate_classical(st, pot, kPi, opt);
    REQUIRE(res.record.status == RunStatus::completed);

    // analytic great circle through the initial point
    const Vec3 a = st.q.unit();
    const Vec3 b = direction_to_embedded(st.q.coords, st.phi);
    double max_dev = 0.0;
    for (const auto& smp : res.record.samples) {
        const Vec3 exact = std::cos(2.0 * smp.s) * a + std::sin(2.0 * smp.s) * b;
        max_dev = std::max(max_dev, (smp.n - exact).norm() * kSphereRadius);
    }
    REQUIRE(max_dev < 1e-8);
    REQUIRE(res.max_tangent_drift < 1e-10);
}

TEST_CASE("branch sign mirrors the kappa rate about the gradient term") {
    const GravityShapePotential pot({1.0, 1.0, 1.0});
    const CurveState st = generic_state(pot, 1.0, 2.0, -0.3, 0.8, Branch::contracting);
    const ClassicalIncrement plus = classical_rhs(st, pot, +1);
    const ClassicalIncrement minus = classical_rhs(st, pot, -1);
    double v1, v2;
    pot.frame_gradient(st.q.coords, v1, v2);
    const double grad_term =
        -2.0 * (std::cos(st.phi.angle) * v1 + std::sin(st.phi.angle) * v2);
    REQUIRE(plus.dkappa + minus.dkappa == Catch::Approx(2.0 * grad_term).margin(1e-12));
    REQUIRE(plus.dtheta == minus.dtheta);
    REQUIRE(plus.dphi == minus.dphi);
}

TEST_CASE("rhs error paths") {
    const GravityShapePotential pot({1.0, 1.0, 1.0});
    // root argument negative: kappa above -2V
    ShapePoint q;
    q.coords = {1.3, 0.2};
    CurveState bad{q, Direction{0.0}, 1e3, 0.0};
    REQUIRE_THROWS_AS(classical_rhs(bad, pot, +1), BranchDomainError);
    REQUIRE_THROWS_AS(make_curve_state(pot, q, Direction{0.0}, 1e3, Branch::expanding),
                      BranchDomainError);
    // pole: chart form undefined
    ShapePoint pole;
    pole.coords = {0.0, 0.0};
    CurveState at_pole{pole, Direction{0.0}, 5.0, 0.0};
    REQUIRE_THROWS_AS(classical_rhs(at_pole, pot, +1), Error);
    // collision point on the equator: singular potential
    const Vec3 coll{-1.0, 0.0, 0.0};  // r_12 = 0 for equal masses
    REQUIRE_THROWS_AS(pot.value(coll), SingularPotentialError);
}

TEST_CASE("zero arclength returns the initial state only") {
    const GravityShapePotential pot({1.0, 1.0, 1.0});
    const CurveState st = generic_state(pot, 1.3, 1.0, 0.2, 0.7, Branch::expanding);
    const auto res = integrate_classical(st, pot, 0.0);
    REQUIRE(res.record.samples.size() == 1);
    REQUIRE(res.record.samples[0].kappa == st.kappa);
}

TEST_CASE("fixed-step convergence at the integrator order") {
    const GravityShapePotential pot({1.0, 1.0, 1.0});
    const CurveState st = generic_state(pot, 1.35, 2.4, 1.1, 0.85, Branch::expanding);

    // reference: very tight adaptive run
    IntegrateOptions tight;
    tight.rel_tol = 1e-13;
    tight.abs_tol = 1e-15;
    tight.max_step = 1e-3;
    const double arc = 0.3;
    const auto ref = integrate_classical(st, pot, arc, tight);
    const Vec3 ref_n = ref.record.samples.back().n;
    const double ref_kappa = ref.record.samples.back().kappa;

    auto fixed_err = [&](std::size_t steps) {
        std::vector<double> y;
        detail::pack_curve(st, y);
        integrate_fixed(
            [&](double, const std::vector<double>& yy, std::vector<double>& dy) {
                detail::classical_embedded_rhs(pot, yy, dy);
            },
            y, 0.0, arc, steps,
            [](double, std::vector<double>&, double) { return StepControl::proceed; });
        const Vec3 n = Vec3{y[0], y[1], y[2]}.normalized();
        return (n - ref_n).norm() + std::abs(y[6] - ref_kappa) / ref_kappa;
    };

    const double e1 = fixed_err(60);
    const double e2 = fixed_err(120);
    const double order = std::log2(e1 / e2);
    REQUIRE(order > 4.2);
    REQUIRE(order < 6.0);
}

TEST_CASE("halving the adaptive tolerance reduces the oracle-free error") {
    const GravityShapePotential pot({1.0, 1.0, 1.0});
    const CurveState st = generic_state(pot, 1.25, 5.2, -0.8, 0.8, Branch::expanding);
    IntegrateOptions tight;
    tight.rel_tol = 1e-13;
    tight.abs_tol = 1e-15;
    const auto ref = integrate_classical(st, pot, 0.5, tight);
    const Vec3 ref_n = ref.record.samples.back().n;

    auto err_at = [&](double tol) {
        IntegrateOptions o;
        o.rel_tol = tol;
        o.abs_tol = tol * 1e-3;
        const auto r = integrate_classical(st, pot, 0.5, o);
        return (r.record.samples.back().n - ref_n).norm();
    };
    const double e_loose = err_at(1e-6);
    const double e_tight = err_at(1e-8);
    REQUIRE(e_tight < 0.3 * e_loose);
}

TEST_CASE("the curve is reparametrization invariant") {
    const GravityShapePotential pot({1.0, 1.0, 1.0});
    const CurveState st = generic_state(pot, 1.15, 3.9, 0.5, 0.9, Branch::expanding);
    const double arc = 0.8;

    IntegrateOptions fine;
    fine.rel_tol = 1e-12;
    fine.abs_tol = 1e-14;
    fine.max_step = 3e-4;
    const auto base = integrate_classical(st, pot, arc, fine);

    // integrate the same equation of state under a smooth positive
    // reparametrization dy/dtau = lambda(y) f(y); the point-set curve must
    // be unchanged
    std::vector<double> y;
    detail::pack_curve(st, y);
    y.push_back(0.0);  // accumulated true arc-length
    std::vector<Vec3> pts;
    pts.push_back(st.q.unit());
    auto rhs = [&](double, const std::vector<double>& yy, std::vector<double>& dy) {
        std::vector<double> base_y(yy.begin(), yy.begin() + 8);
        std::vector<double> base_dy(8);
        detail::classical_embedded_rhs(pot, base_y, base_dy);
        const double lambda = 1.0 + 0.5 * std::sin(3.0 * yy[0] + yy[6] / 4.0);
        for (int i = 0; i < 8; ++i) dy[i] = lambda * base_dy[i];
        dy[8] = lambda;  // d(arc)/d(tau)
    };
    bool done = false;
    auto post = [&](double, std::vector<double>& yy, double) {
        Vec3 x{yy[0], yy[1], yy[2]};
        Vec3 u{yy[3], yy[4], yy[5]};
        x = x.normalized() * kSphereRadius;
        u = (u - (u.dot(x) / x.norm2()) * x).normalized();
        yy[0] = x.x; yy[1] = x.y; yy[2] = x.z;
        yy[3] = u.x; yy[4] = u.y; yy[5] = u.z;
        pts.push_back(x.normalized());
        if (yy[8] >= arc) {
            done = true;
            return StepControl::halt;
        }
        return StepControl::proceed;
    };
    OdeOptions oo;
    oo.rel_tol = 1e-12;
    oo.abs_tol = 1e-14;
    oo.max_step = 3e-4;
    integrate_adaptive(rhs, y, 0.0, 10.0, oo, post);
    REQUIRE(done);

    // one-sided Hausdorff distances between the dense polylines
    auto dist_to_polyline = [](Vec3 p, const std::vector<Vec3>& line) {
        double best = 1e9;
        for (std::size_t k = 0; k + 1 < line.size(); ++k) {
            const Vec3 a = line[k], b = line[k + 1];
            const Vec3 ab = b - a;
            double t = (p - a).dot(ab) / std::max(ab.norm2(), 1e-300);
            t = std::clamp(t, 0.0, 1.0);
            best = std::min(best, (p - (a + t * ab)).norm());
        }
        return best;
    };
    std::vector<Vec3> base_pts;
    for (const auto& smp : base.record.samples) base_pts.push_back(smp.n);
    double hausdorff = 0.0;
    for (std::size_t k = 0; k < pts.size(); k += 3)
        hausdorff = std::max(hausdorff, dist_to_polyline(pts[k], base_pts));
    for (std::size_t k = 0; k < base_pts.size(); k += 3)
        hausdorff = std::max(hausdorff, dist_to_polyline(base_pts[k], pts));
    REQUIRE(hausdorff * kSphereRadius < 1e-7);
}

TEST_CASE("tangent stays normalized along generic runs") {
    const GravityShapePotential pot({1.0, 1.0, 1.0});
    const CurveState st = generic_state(pot, 1.0, 0.3, 0.95, 0.9, Branch::contracting);
    IntegrateOptions opt;
    opt.rel_tol = 1e-10;
    opt.abs_tol = 1e-13;
    const auto res = integrate_classical(st, pot, 1.5, opt);
    REQUIRE(res.record.status == RunStatus::completed);
    REQUIRE(res.max_tangent_drift < 1e-10);
    REQUIRE(res.max_constraint_residual < 1e-8);
    // the contracting branch must have switched to expansion somewhere
    REQUIRE(res.record.samples.front().omega < 0.0);
    REQUIRE(res.record.samples.back().omega > 0.0);
}
