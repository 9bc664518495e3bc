#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "vtube/errors.hpp"
#include "vtube/time_lp.hpp"

using namespace vtube;

namespace {

std::vector<Eigen::MatrixXd> scalar_ramp_segment() {
    Eigen::MatrixXd cp(1, 4);
    cp << 0.0, 1.0, 2.0, 3.0;
    return {cp};
}

TimeLp lp_for(const std::vector<Eigen::MatrixXd>& cps, double v) {
    const int dims = static_cast<int>(cps.front().rows());
    return build_lp(cps, Eigen::VectorXd::Constant(dims, v));
}

}  // namespace

TEST_CASE("single ramp segment retimes to the analytic optimum") {
    // p * dp = 3 per control interval, v = 1 -> dt >= 3, optimum 3.
    const TimeAllocation sol = solve_lp(lp_for(scalar_ramp_segment(), 1.0));
    CHECK(sol.dt(0) == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(sol.total == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(sol.gap <= 1e-8);
}

TEST_CASE("stationary segments collapse to the minimum duration") {
    Eigen::MatrixXd cp = Eigen::MatrixXd::Constant(3, 6, 1.0);
    const TimeLp lp = lp_for({cp, cp, cp}, 1.0);
    const TimeAllocation sol = solve_lp(lp);
    for (int m = 0; m < 3; ++m) CHECK(sol.dt(m) == doctest::Approx(lp.t_min));
    CHECK(sol.total == doctest::Approx(3 * lp.t_min));
}

TEST_CASE("mirror-symmetric segments get equal durations") {
    Eigen::MatrixXd a(1, 4), b(1, 4);
    a << 0.0, 1.0, 2.0, 3.0;
    b << 3.0, 4.0, 5.0, 6.0;
    const TimeAllocation sol = solve_lp(lp_for({a, b}, 2.0));
    CHECK(sol.dt(0) == doctest::Approx(sol.dt(1)).epsilon(1e-9));
}

TEST_CASE("zero velocity limit is a configuration error") {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(1);
    CHECK_THROWS_AS(build_lp(scalar_ramp_segment(), v), ConfigError);
}

TEST_CASE("optimal values match an independent tableau solver") {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> base_dt;
        const auto cps = gen::chain_consistent_points(rng, 4, 5, 3, base_dt);
        const TimeLp lp = lp_for(cps, 1.5);
        const TimeAllocation sol = solve_lp(lp);

        oracle::TableauLp ref;
        ref.c = Eigen::VectorXd::Ones(lp.segments);
        ref.a = lp.a1;
        ref.b = lp.b1;
        ref.eq = lp.a2;
        ref.eq_rhs = Eigen::VectorXd::Zero(lp.a2.rows());
        ref.lower = Eigen::VectorXd::Constant(lp.segments, lp.t_min);
        double ref_objective = 0.0;
        oracle::tableau_simplex(ref, &ref_objective);
        CHECK(sol.total == doctest::Approx(ref_objective).epsilon(1e-7));
        CHECK(sol.gap <= 1e-8);

        // Feasibility of the returned vertex.
        CHECK((lp.a1 * sol.dt - lp.b1).maxCoeff() <= 1e-7);
        CHECK((lp.a2 * sol.dt).cwiseAbs().maxCoeff() <= 1e-7);
    }
}

TEST_CASE("inconsistent joint velocities are reported infeasible") {
    // Two segments whose joint velocity directions disagree make the
    // cross-multiplied equality rows unsatisfiable for positive durations.
    Eigen::MatrixXd a(2, 4), b(2, 4);
    a << 0, 1, 2, 3, 0, 0, 0, 0;   // end velocity along +x
    b << 3, 3, 4, 5, 0, 1, 2, 3;   // start velocity along +y
    CHECK_THROWS_AS(solve_lp(lp_for({a, b}, 1.0)), InfeasibleError);
}

TEST_CASE("parametric assembly reproduces boundary data bit-exactly") {
    std::mt19937 rng(5);
    std::vector<TimeLp> lps;
    std::vector<double> base_dt;
    for (int k = 0; k < 3; ++k) {
        std::mt19937 rng_k(100 + k);
        std::vector<double> dt_k;
        auto cps = gen::chain_consistent_points(rng_k, 3, 5, 3, dt_k);
        lps.push_back(lp_for(cps, 2.0));
    }
    const ParametricTimeLp plp = assemble_parametric(lps);
    for (int k = 0; k < 3; ++k) {
        Eigen::VectorXd theta = Eigen::VectorXd::Zero(3);
        theta(k) = 1.0;
        const TimeLp at = plp.at(theta);
        CHECK((at.b1 - lps[k].b1).cwiseAbs().maxCoeff() == 0.0);
        CHECK((at.a2 - lps[k].a2).cwiseAbs().maxCoeff() == 0.0);
    }

    Eigen::VectorXd mid(3);
    mid << 0.5, 0.5, 0.0;
    const TimeLp at = plp.at(mid);
    CHECK((at.b1 - 0.5 * (lps[0].b1 + lps[1].b1)).cwiseAbs().maxCoeff() < 1e-15);

    // Affinity of b1 rows in theta.
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd ta(3), tb(3);
        for (int i = 0; i < 3; ++i) {
            ta(i) = u(rng);
            tb(i) = u(rng);
        }
        ta /= ta.sum();
        tb /= tb.sum();
        const Eigen::VectorXd midpoint = 0.5 * (ta + tb);
        const Eigen::VectorXd lhs = plp.at(midpoint).b1;
        const Eigen::VectorXd rhs = 0.5 * (plp.at(ta).b1 + plp.at(tb).b1);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }

    CHECK_THROWS_AS(plp.at(Eigen::Vector3d(0.5, 0.6, 0.2)), std::domain_error);
    CHECK_THROWS_AS(plp.at(Eigen::Vector3d(-0.2, 0.6, 0.6)), std::domain_error);
}

TEST_CASE("assembly rejects mismatched boundary shapes") {
    std::mt19937 rng(6);
    std::vector<double> dt;
    auto a = gen::chain_consistent_points(rng, 3, 5, 3, dt);
    auto b = gen::chain_consistent_points(rng, 4, 5, 3, dt);
    CHECK_THROWS_AS(assemble_parametric({lp_for(a, 1.0), lp_for(b, 1.0)}), AssemblyError);
}

namespace {

/// Shared parametric family built from three boundaries with one base
/// allocation (as the spatial stage produces).
ParametricTimeLp shared_family(int segments, double v) {
    std::mt19937 rng(77);
    std::vector<double> base_dt;
    auto first = gen::chain_consistent_points(rng, segments, 5, 3, base_dt);
    std::vector<TimeLp> lps{lp_for(first, v)};
    for (int k = 1; k < 3; ++k) {
        // Same joint velocity ratios: scale and shift the base points.
        std::vector<Eigen::MatrixXd> cps;
        for (const auto& cp : first) {
            Eigen::MatrixXd t = cp * (1.0 + 0.35 * k);
            t.row(1).array() += 0.8 * k;
            cps.push_back(t);
        }
        lps.push_back(lp_for(cps, v));
    }
    return assemble_parametric(lps);
}

}  // namespace

TEST_CASE("interpolated instances match LPs rebuilt from interpolated points") {
    std::mt19937 rng(99);
    std::vector<double> base_dt;
    auto base = gen::chain_consistent_points(rng, 3, 5, 3, base_dt);
    std::vector<std::vector<Eigen::MatrixXd>> boundary_cps;
    std::vector<TimeLp> lps;
    for (int k = 0; k < 3; ++k) {
        std::vector<Eigen::MatrixXd> cps;
        for (const auto& cp : base) {
            Eigen::MatrixXd t = cp * (1.0 + 0.25 * k);
            t.row(0).array() += 0.5 * k;
            cps.push_back(t);
        }
        boundary_cps.push_back(cps);
        lps.push_back(lp_for(cps, 1.0));
    }
    const ParametricTimeLp plp = assemble_parametric(lps);

    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd theta(3);
        for (int i = 0; i < 3; ++i) theta(i) = u(rng);
        theta /= theta.sum();
        // Build from scratch at the interpolated control points.
        std::vector<Eigen::MatrixXd> cps;
        for (std::size_t m = 0; m < base.size(); ++m) {
            Eigen::MatrixXd cp = Eigen::MatrixXd::Zero(3, 6);
            for (int k = 0; k < 3; ++k) cp += theta(k) * boundary_cps[k][m];
            cps.push_back(cp);
        }
        const TimeLp direct = lp_for(cps, 1.0);
        CHECK((plp.at(theta).b1 - direct.b1).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(plp.value(theta) == doctest::Approx(solve_lp(direct).total).epsilon(1e-9));
    }
}

TEST_CASE("value function is midpoint-convex and velocity-monotone") {
    const ParametricTimeLp plp = shared_family(4, 1.0);
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd ta(3), tb(3);
        for (int i = 0; i < 3; ++i) {
            ta(i) = u(rng);
            tb(i) = u(rng);
        }
        ta /= ta.sum();
        tb /= tb.sum();
        const double mid = plp.value(0.5 * (ta + tb));
        CHECK(mid <= 0.5 * (plp.value(ta) + plp.value(tb)) + 1e-7);
    }

    const ParametricTimeLp fast = shared_family(4, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd theta(3);
        for (int i = 0; i < 3; ++i) theta(i) = u(rng);
        theta /= theta.sum();
        CHECK(fast.value(theta) <= plp.value(theta) + 1e-9);
    }
}

TEST_CASE("retimed allocations respect the velocity bound on samples") {
    std::mt19937 rng(404);
    std::vector<double> base_dt;
    const auto cps = gen::chain_consistent_points(rng, 3, 5, 3, base_dt);
    const double v = 1.2;
    const TimeAllocation sol = solve_lp(lp_for(cps, v));

    // Hull property: sampled derivative of each segment stays within v.
    for (std::size_t m = 0; m < cps.size(); ++m) {
        for (int i = 0; i <= 1000; ++i) {
            const double t = sol.dt(m) * i / 1000.0;
            Eigen::MatrixXd q(3, 5);
            for (int k = 0; k < 5; ++k)
                q.col(k) = 5.0 / sol.dt(m) * (cps[m].col(k + 1) - cps[m].col(k));
            const Eigen::VectorXd vel = oracle::de_casteljau(q, t, sol.dt(m));
            CHECK(vel.cwiseAbs().maxCoeff() <= v + 1e-6);
        }
    }

    // C1 joint continuity of the retimed trajectory.
    for (std::size_t m = 0; m + 1 < cps.size(); ++m) {
        const Eigen::VectorXd end =
            5.0 / sol.dt(m) * (cps[m].col(5) - cps[m].col(4));
        const Eigen::VectorXd start =
            5.0 / sol.dt(m + 1) * (cps[m + 1].col(1) - cps[m + 1].col(0));
        CHECK((end - start).norm() < 1e-6);
    }
}
