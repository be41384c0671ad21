#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "twostep/iterate.hpp"
#include "twostep/problems.hpp"

using namespace twostep;

namespace {

NonlinearProblem quadratic() { return find_entry("quadratic").problem; }

} // namespace

TEST(TwoStepNewton, QuadraticExample) {
    const auto tr = two_step_newton(quadratic(), Vector{1.2});
    EXPECT_EQ(tr.termination, Termination::converged);
    EXPECT_LE(tr.steps.back().rho_x, 1e-14);
    EXPECT_LE(tr.steps.back().n, 4);
    EXPECT_EQ(tr.problem, "quadratic");
}

TEST(TwoStepNewton, MatchesScalarReferenceRecurrence) {
    const auto ref = oracle::scalar_two_step([](double x) { return x * x - 1; },
                                             [](double x) { return 2 * x; }, 1.5, 3);
    const auto tr = two_step_newton(quadratic(), Vector{1.5});
    ASSERT_GE(tr.steps.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k)
        EXPECT_NEAR(tr.steps[k].x[0], ref[k], 1e-15);
}

TEST(TwoStepNewton, StartingAtTheRoot) {
    const auto tr = two_step_newton(quadratic(), Vector{1.0});
    ASSERT_EQ(tr.steps.size(), 1u);
    EXPECT_EQ(tr.steps[0].y, tr.steps[0].x);
    EXPECT_EQ(tr.steps[0].n, 0);
    EXPECT_EQ(tr.termination, Termination::converged);
}

TEST(TwoStepNewton, OscillatoryExampleConverges) {
    const auto tr = two_step_newton(find_entry("wang-osc").problem, Vector{0.15});
    EXPECT_EQ(tr.termination, Termination::converged);
    EXPECT_LE(std::abs(tr.steps.back().x[0]), 1e-14);
}

TEST(TwoStepNewton, SingularJacobianIsReported) {
    const auto tr = two_step_newton(quadratic(), Vector{0.0});
    EXPECT_EQ(tr.termination, Termination::singular_jacobian);
    EXPECT_FALSE(tr.steps.back().y_valid);
}

TEST(TwoStepNewton, DivergenceIsReported) {
    NonlinearProblem p;
    p.name = "atan";
    p.dim = 1;
    p.eval = [](const Vector& x) { return Vector{std::atan(x[0])}; };
    p.jacobian = [](const Vector& x) { return Matrix{{1.0 / (1.0 + x[0] * x[0])}}; };
    p.root = Vector{0.0};
    const auto tr = two_step_newton(p, Vector{3.0});
    EXPECT_EQ(tr.termination, Termination::diverged);
}

TEST(TwoStepNewton, MaxIterIsReported) {
    const auto tr = two_step_newton(quadratic(), Vector{40.0}, {2, 1e-14, 1e-14});
    EXPECT_EQ(tr.termination, Termination::max_iter);
    EXPECT_EQ(tr.steps.size(), 3u);
}

TEST(TwoStepNewton, RejectsBadInput) {
    EXPECT_THROW(two_step_newton(quadratic(), Vector{1, 2}), DomainError);
    EXPECT_THROW(two_step_newton(quadratic(), Vector{NAN}), DomainError);
    EXPECT_THROW(two_step_newton(quadratic(), Vector{1.2}, {0, 1e-14, 1e-14}), DomainError);
}

TEST(TwoStepNewton, WorksWithFiniteDifferenceJacobian) {
    auto p = find_entry("sys2").problem;
    p.jacobian = nullptr;
    const auto tr = two_step_newton(p, Vector{1.1, 0.95});
    EXPECT_EQ(tr.termination, Termination::converged);
    EXPECT_LE(tr.steps.back().rho_x, 1e-12);
}

TEST(TwoStepNewton, RootlessProblemHasNanDistances) {
    auto p = quadratic();
    p.root.reset();
    const auto tr = two_step_newton(p, Vector{1.2});
    EXPECT_FALSE(tr.has_root_distances());
    EXPECT_THROW(estimate_order(tr), MissingRoot);
}

TEST(TwoStepNewton, AffineCovariance) {
    const auto base = find_entry("sys2").problem;
    const Matrix a{{3.0, -1.0}, {0.5, 2.0}};
    NonlinearProblem scaled = base;
    scaled.eval = [&](const Vector& x) { return a * base.eval(x); };
    scaled.jacobian = [&](const Vector& x) { return a * base.jacobian(x); };
    const auto t1 = two_step_newton(base, Vector{1.3, 0.8});
    const auto t2 = two_step_newton(scaled, Vector{1.3, 0.8});
    const std::size_t n = std::min(t1.steps.size(), t2.steps.size());
    ASSERT_GE(n, 3u);
    for (std::size_t k = 0; k < n; ++k)
        EXPECT_LE(distance(t1.steps[k].x, t2.steps[k].x), 1e-10);
}

TEST(TwoStepNewton, ReusedFactorizationMatchesFreshOne) {
    const auto& p = find_entry("sys2").problem;
    const auto tr = two_step_newton(p, Vector{1.4, 0.7});
    for (std::size_t k = 0; k + 1 < tr.steps.size(); ++k) {
        const auto& st = tr.steps[k];
        const Vector fresh = st.y - solve_linear(p.jacobian(st.x), p.eval(st.y));
        EXPECT_LE(distance(fresh, tr.steps[k + 1].x), 1e-12);
    }
}

TEST(TwoStepNewton, MonotoneDecayAndInterleavingInsideCertifiedBalls) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const auto& e : suite()) {
        const double r = solve_radius(RadiusCondition::T52, e.recommended_family).r;
        const Vector& root = *e.problem.root;
        for (int trial = 0; trial < 10; ++trial) {
            Vector dir(e.problem.dim);
            for (auto& v : dir)
                v = u(rng);
            const double len = 0.99 * r * std::abs(u(rng)) + 1e-3 * r;
            const Vector x0 = root + (len / norm2(dir)) * dir;
            const auto tr = two_step_newton(e.problem, x0);
            ASSERT_EQ(tr.termination, Termination::converged) << e.problem.name;
            for (std::size_t k = 0; k < tr.steps.size(); ++k) {
                const auto& st = tr.steps[k];
                if (st.rho_x <= 1e-13)
                    break;
                EXPECT_LE(st.rho_y, st.rho_x) << e.problem.name << " n=" << k;
                if (k + 1 < tr.steps.size())
                    EXPECT_LT(tr.steps[k + 1].rho_x, st.rho_x) << e.problem.name << " n=" << k;
            }
        }
    }
}

TEST(EstimateOrder, Examples) {
    const std::vector<double> errs{1e-1, 1e-3, 1e-9};
    const auto o = estimate_order(errs);
    EXPECT_NEAR(o.order, 3.0, 1e-12);
    EXPECT_TRUE(o.ok);
    const std::vector<double> two{1e-1, 1e-3};
    EXPECT_THROW(estimate_order(two), InsufficientData);
}

TEST(EstimateOrder, QuadraticIsThirdOrder) {
    const auto o = estimate_order(two_step_newton(quadratic(), Vector{1.5}));
    EXPECT_TRUE(o.ok) << o.order;
    EXPECT_NEAR(o.order, 3.0, 0.5);
}

TEST(EstimateOrder, StopsAtTheFloorAndSkipsGrowth) {
    const std::vector<double> errs{1e-1, 1e-2, 1e-4, 1e-14, 1e-15};
    EXPECT_NEAR(estimate_order(errs).order, 2.0, 1e-12);
    const std::vector<double> growing{1e-1, 1e-1, 1e-1};
    EXPECT_THROW(estimate_order(growing), InsufficientData);
}

TEST(JacobianFd, Examples) {
    NonlinearProblem id;
    id.dim = 2;
    id.eval = [](const Vector& x) { return x; };
    const Matrix j = jacobian_fd(id, Vector{0.3, -2.0});
    EXPECT_LE(max_abs(j - Matrix::identity(2)), 1e-9);

    EXPECT_NEAR(jacobian_fd(quadratic(), Vector{2.0})(0, 0), 4.0, 1e-6);

    NonlinearProblem prod;
    prod.dim = 2;
    prod.eval = [](const Vector& x) { return Vector{x[0] + x[1], x[0] * x[1]}; };
    EXPECT_LE(max_abs(jacobian_fd(prod, Vector{1, 1}) - Matrix{{1, 1}, {1, 1}}), 1e-6);
}

TEST(Names, TerminationRoundTrip) {
    for (auto t : {Termination::converged, Termination::max_iter, Termination::singular_jacobian,
                   Termination::diverged})
        EXPECT_EQ(termination_from_string(to_string(t)), t);
    EXPECT_THROW(termination_from_string("stopped"), ParseError);
}
