#include <cmath>

#include <gtest/gtest.h>

#include "twostep/certify.hpp"
#include "twostep/estimate.hpp"
#include "twostep/problems.hpp"
#include "twostep/sampling.hpp"

using namespace twostep;

namespace {

NonlinearProblem scalar(double (*f)(double), double (*df)(double), double root) {
    NonlinearProblem p;
    p.name = "scalar";
    p.dim = 1;
    p.eval = [f](const Vector& x) { return Vector{f(x[0])}; };
    p.jacobian = [df](const Vector& x) { return Matrix{{df(x[0])}}; };
    p.root = Vector{root};
    return p;
}

} // namespace

TEST(Halton, PointsLieInUnitCubeAndAreSeeded) {
    const HaltonSequence a(3, 42), b(3, 42), c(3, 43);
    for (std::uint64_t k = 1; k < 200; ++k) {
        const auto p = a.point(k);
        ASSERT_EQ(p.size(), 3u);
        for (double v : p) {
            EXPECT_GE(v, 0.0);
            EXPECT_LT(v, 1.0);
        }
        EXPECT_EQ(p, b.point(k));
    }
    EXPECT_NE(a.point(1), c.point(1));
}

TEST(Halton, MapToBallStaysInsideOpenBall) {
    const HaltonSequence h(2, 1);
    const Vector center{1.0, -2.0};
    for (std::uint64_t k = 1; k < 500; ++k)
        EXPECT_LT(distance(map_to_ball(h.point(k), center, 0.3), center), 0.3);
}

TEST(EstimateConstant, QuadraticCenterIsOneHalf) {
    const auto p = scalar([](double x) { return x * x - 1; }, [](double x) { return 2 * x; }, 1.0);
    const auto e = estimate_constant(p, LipschitzKind::center, 0.5, 500);
    EXPECT_NEAR(e.value, 0.5, 1e-12);
    EXPECT_EQ(e.grid_size, 500u);
    EXPECT_LT(std::abs(e.witness.x[0] - 1.0), 0.5);
}

TEST(EstimateConstant, LinearProblemIsZero) {
    const auto p = scalar([](double x) { return 3 * x; }, [](double) { return 3.0; }, 0.0);
    EXPECT_EQ(estimate_constant(p, LipschitzKind::center, 2.0, 200).value, 0.0);
    EXPECT_EQ(estimate_constant(p, LipschitzKind::radius, 2.0, 200).value, 0.0);
}

TEST(EstimateConstant, OscillatoryCenterStaysBelowOne) {
    const auto e = estimate_constant(find_entry("wang-osc").problem, LipschitzKind::center, 0.15, 5000);
    EXPECT_LE(e.value, 1.0 + 1e-6);
    EXPECT_GT(e.value, 0.5);
}

TEST(EstimateConstant, RadiusKindGrowsOnNestedGrids) {
    const auto& p = find_entry("wang-osc").problem;
    double prev = 0.0;
    for (std::size_t n : {1000u, 2000u, 4000u, 8000u}) {
        const double v = estimate_constant(p, LipschitzKind::radius, 0.15, n).value;
        EXPECT_GE(v, prev);
        prev = v;
    }
    EXPECT_GT(prev, 10.0);
}

TEST(EstimateConstant, IsDeterministicPerSeed) {
    const auto& p = find_entry("sys2").problem;
    const auto a = estimate_constant(p, LipschitzKind::radius, 0.5, 300, 7);
    const auto b = estimate_constant(p, LipschitzKind::radius, 0.5, 300, 7);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.witness.tau, b.witness.tau);
    EXPECT_LE(a.witness.tau, 1.0 - tau_margin);
}

TEST(EstimateConstant, Errors) {
    const auto singular = scalar([](double x) { return x * x; }, [](double x) { return 2 * x; }, 0.0);
    EXPECT_THROW(estimate_constant(singular, LipschitzKind::center, 1.0, 10), SingularJacobian);
    const auto p = scalar([](double x) { return x * x - 1; }, [](double x) { return 2 * x; }, 1.0);
    EXPECT_THROW(estimate_constant(p, LipschitzKind::center, 1e-16, 10), DegenerateGrid);
    NonlinearProblem rootless = p;
    rootless.root.reset();
    EXPECT_THROW(estimate_constant(rootless, LipschitzKind::center, 1.0, 10), MissingRoot);
    EXPECT_THROW(estimate_constant(p, LipschitzKind::center, -1.0, 10), DomainError);
}

TEST(AuditHypothesis, RecommendedFamiliesPassTheCenterAudit) {
    for (const auto& e : suite()) {
        const double r = solve_radius(RadiusCondition::T52, e.recommended_family).r;
        const auto a = audit_hypothesis(e.problem, e.recommended_family, LipschitzKind::center, r, 2000);
        EXPECT_TRUE(a.holds()) << e.problem.name << " ratio " << a.max_ratio;
    }
}

TEST(AuditHypothesis, TooSmallConstantFails) {
    const auto& p = find_entry("quadratic").problem;
    const auto a = audit_hypothesis(p, LAverage::constant(0.4), LipschitzKind::center, 0.5, 200);
    EXPECT_FALSE(a.holds());
    EXPECT_NEAR(a.max_ratio, 0.5 / 0.4, 1e-9);
}

TEST(AuditHypothesis, OscillatoryFailsTheRadiusCondition) {
    const auto& p = find_entry("wang-osc").problem;
    const auto a = audit_hypothesis(p, LAverage::constant(1), LipschitzKind::radius, 0.15, 2000);
    EXPECT_FALSE(a.holds());
}

TEST(Certify, EstimatedBallIsClippedToTheProbe) {
    const auto& p = find_entry("quadratic").problem;
    const auto b = certify_with_estimate(p, RadiusCondition::T41, 2.0, 1000);
    EXPECT_NEAR(b.estimate.value, 0.5, 1e-12);
    EXPECT_NEAR(b.certificate.r, 2.0, 1e-9);
    EXPECT_LE(b.radius, 2.0);
    EXPECT_EQ(hypothesis_kind(RadiusCondition::T31), LipschitzKind::radius);
    EXPECT_EQ(hypothesis_kind(RadiusCondition::T52), LipschitzKind::center);
}

TEST(Names, LipschitzKindRoundTrip) {
    EXPECT_EQ(lipschitz_kind_from_string("center"), LipschitzKind::center);
    EXPECT_EQ(lipschitz_kind_from_string(to_string(LipschitzKind::radius)), LipschitzKind::radius);
    EXPECT_THROW(lipschitz_kind_from_string("middle"), ParseError);
}
