#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "psd/oracle.hpp"

using namespace psd;

TEST_CASE("relational random data sits on the E = P = J = 0 shell") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 17ull, 95ull}) {
        const PhaseState st = random_relational_state(seed);
        REQUIRE(std::abs(st.total_momentum().x) < 1e-12);
        REQUIRE(std::abs(st.total_momentum().y) < 1e-12);
        REQUIRE(std::abs(st.angular_momentum()) < 1e-10);
        REQUIRE(std::abs(st.energy()) < 1e-10 * std::abs(newton_potential(st.config)));
    }
}

TEST_CASE("curve-state extraction satisfies the zero-energy constraint") {
    const GravityShapePotential pot({1.0, 1.0, 1.0});
    for (std::uint64_t seed : {4ull, 9ull, 23ull, 31ull}) {
        const PhaseState st = random_relational_state(seed);
        const CurveState cs = oracle_initial_curve_state(st, pot);
        REQUIRE(cs.kappa > 0.0);
        const double resid =
            cs.omega * cs.omega + 1.0 + 2.0 * pot.value(cs.q.unit()) / cs.kappa;
        REQUIRE(std::abs(resid) < 1e-10);
    }
}

TEST_CASE("oracle energy drift stays tiny") {
    const PhaseState st = random_relational_state(7);
    OracleOptions opt;
    opt.target_arclength = 1.2;
    const OracleResult res = newtonian_oracle(st, 50.0, opt);
    REQUIRE(res.record.samples.size() > 100);
    REQUIRE(res.energy_drift < 1e-9);
    // arc-length column is monotone
    for (std::size_t k = 1; k < res.record.samples.size(); ++k)
        REQUIRE(res.record.samples[k].s >= res.record.samples[k - 1].s);
}

TEST_CASE("kepler binary with a distant companion obeys the third law") {
    // binary of masses 1+1, a = 0.5, e = 0.3, third body far away and slow
    const double a = 0.5, e = 0.3, gm = 2.0;
    Vec2 rp, rv;
    kepler_state_at_pericenter(a, e, gm, rp, rv);
    PhaseState st;
    st.config.masses = {1.0, 1.0, 1.0};
    st.config.positions = {{-0.5 * rp.x, -0.5 * rp.y},
                           {0.5 * rp.x, 0.5 * rp.y},
                           {200.0, 120.0}};
    st.velocities = {{-0.5 * rv.x, -0.5 * rv.y}, {0.5 * rv.x, 0.5 * rv.y}, {0.25, 0.0}};

    const double period = kepler_period(a, gm);
    const OracleResult res = newtonian_oracle(st, 2.3 * period);
    REQUIRE(res.record.status == RunStatus::completed);

    // pericentre passages of the pair separation r(t)
    std::vector<double> minima;
    const auto& smp = res.record.samples;
    auto pair_r = [&](std::size_t k) {
        return (smp[k].phase->config.positions[1] - smp[k].phase->config.positions[0])
            .norm();
    };
    for (std::size_t k = 1; k + 1 < smp.size(); ++k) {
        const double r0 = pair_r(k - 1), r1 = pair_r(k), r2 = pair_r(k + 1);
        if (r1 <= r0 && r1 <= r2) {
            // parabola through the three bracketing samples
            const double t0 = smp[k - 1].t, t1 = smp[k].t, t2 = smp[k + 1].t;
            const double d0 = t0 - t1, d2 = t2 - t1;
            const double den = d0 * d0 * d2 - d2 * d2 * d0;
            const double a2 = ((r0 - r1) * d2 - (r2 - r1) * d0) / den;
            const double b = ((r2 - r1) * d0 * d0 - (r0 - r1) * d2 * d2) / den;
            if (a2 > 0) minima.push_back(t1 - 0.5 * b / a2);
        }
    }
    REQUIRE(minima.size() >= 2);
    const double measured = minima[1] - minima[0];
    REQUIRE(measured == Catch::Approx(period).epsilon(1e-6));

    // the projected curve is a closed-ish loop on the sphere: shape returns
    // near its start after one period
    std::size_t k_period = 0;
    for (std::size_t k = 0; k < smp.size(); ++k)
        if (smp[k].t <= minima[1]) k_period = k;
    REQUIRE(angle_between(smp[0].n, smp[k_period].n) < 1e-3);
}

TEST_CASE("intrinsic equation of state reproduces the projected oracle") {
    const GravityShapePotential pot({1.0, 1.0, 1.0});
    for (std::uint64_t seed : {11ull, 42ull, 77ull}) {
        const PhaseState st = random_relational_state(seed);
        OracleOptions oopt;
        oopt.target_arclength = 1.05;
        const OracleResult oracle = newtonian_oracle(st, 200.0, oopt);
        if (oracle.record.samples.back().s < 1.0) continue;  // stopped early
        // keep the window clear of close encounters
        double rmin = 1e9;
        for (const auto& s : oracle.record.samples)
            rmin = std::min(rmin, pot.min_pair_distance(s.n));
        if (rmin < 0.15) continue;

        const CurveState init = oracle_initial_curve_state(st, pot);
        IntegrateOptions iopt;
        iopt.rel_tol = 1e-11;
        iopt.abs_tol = 1e-13;
        const auto intr = integrate_classical(init, pot, 1.0, iopt);
        REQUIRE(intr.record.status == RunStatus::completed);

        const OracleCompareReport rep =
            compare_intrinsic_to_oracle(oracle, intr.record, pot, 1.0);
        INFO("seed " << seed << " sup chart error " << rep.sup_chart_error
                     << " kappa rel " << rep.sup_kappa_rel_error);
        REQUIRE(rep.points > 100);
        REQUIRE(rep.sup_chart_error < 1e-6);
        REQUIRE(rep.sup_kappa_rel_error < 1e-6);
    }
}

TEST_CASE("oracle stops on collision with partial data") {
    // head-on free fall of a close pair: collision within the horizon
    PhaseState st;
    st.config.masses = {1.0, 1.0, 1.0};
    st.config.positions = {{-0.05, 0.0}, {0.05, 0.0}, {10.0, 0.0}};
    st.velocities = {{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.3}};
    const OracleResult res = newtonian_oracle(st, 10.0);
    REQUIRE(res.record.status == RunStatus::singularity_stop);
    REQUIRE(!res.record.samples.empty());
}
