#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "twostep/estimate.hpp"
#include "twostep/problems.hpp"
#include "twostep/verify.hpp"

using namespace twostep;

namespace {

IterationTrace synthetic(std::vector<double> errors) {
    IterationTrace t;
    t.problem = "synthetic";
    for (std::size_t i = 0; i < errors.size(); ++i) {
        TraceStep s;
        s.n = static_cast<int>(i);
        s.x = {errors[i]};
        s.y = {errors[i] / 2};
        s.rho_x = errors[i];
        s.rho_y = errors[i] / 2;
        t.steps.push_back(s);
    }
    t.termination = Termination::max_iter;
    return t;
}

} // namespace

TEST(QFactors, Examples) {
    const auto q52 = q_factors(Theorem::T52, LAverage::constant(1), 0.1, 0.01);
    EXPECT_NEAR(q52.q1, 0.5, 1e-15);
    const auto q31 = q_factors(Theorem::T31, LAverage::constant(1), 0.2, 0.05);
    EXPECT_NEAR(q31.q1, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(q31.q1, 0.2 / (1 - 0.4), 1e-15);
    for (auto th : {Theorem::T31, Theorem::T51, Theorem::T52})
        EXPECT_LT(q_factors(th, LAverage::holder(1, 0.5), 1e-12, 1e-13).q1, 1e-5);
}

TEST(QFactors, T51CarriesMomentForms) {
    const auto q = q_factors(Theorem::T51, LAverage::constant(2), 0.05, 0.01);
    ASSERT_TRUE(q.Q1 && q.Q2);
    EXPECT_NEAR(q.q1, 0.2 / 0.8, 1e-15);
    EXPECT_NEAR(*q.Q1, 0.1 / 0.8, 1e-15);
    EXPECT_NEAR(q.C, *q.Q1 * 5.0, 1e-14);
}

TEST(QFactors, Errors) {
    EXPECT_THROW(q_factors(Theorem::T52, LAverage::constant(1), 0.6, 0.1), DenominatorNonpositive);
    EXPECT_THROW(q_factors(Theorem::T52, LAverage::constant(1), 0.0, 0.1), DomainError);
    EXPECT_THROW(q_factors(Theorem::T52, LAverage::constant(1), 0.1, 0.01, 1.5), DomainError);
}

TEST(QFactors, NondecreasingInDistances) {
    const std::vector<LAverage> fams{LAverage::constant(1), LAverage::affine(0.5, 1),
                                     LAverage::holder(1, 0.5), LAverage::rational(1, 1)};
    for (const auto& fam : fams) {
        for (auto th : {Theorem::T31, Theorem::T51, Theorem::T52}) {
            double p1 = 0, p2 = 0;
            for (int i = 1; i <= 50; ++i) {
                const double rx = 0.002 * i;
                const auto q = q_factors(th, fam, rx, 0.5 * rx);
                EXPECT_GE(q.q1, p1 - 1e-15) << fam.name() << " " << to_string(th);
                EXPECT_GE(q.q2, p2 - 1e-15) << fam.name() << " " << to_string(th);
                p1 = q.q1;
                p2 = q.q2;
            }
        }
    }
}

TEST(PerStep, StartAtRootHasNothingToCompare) {
    const auto& e = find_entry("quadratic");
    const auto tr = two_step_newton(e.problem, Vector{1.0});
    const auto rep = per_step_bounds(Theorem::T52, e.recommended_family, tr);
    EXPECT_TRUE(rep.records.empty());
    EXPECT_TRUE(rep.all_hold);
}

TEST(PerStep, QuadraticWithSampledConstants) {
    const auto& p = find_entry("quadratic").problem;
    const auto tr = two_step_newton(p, Vector{1.05});
    const auto center = estimate_constant(p, LipschitzKind::center, 0.1, 2000);
    EXPECT_TRUE(per_step_bounds(Theorem::T52, LAverage::constant(center.value), tr).all_hold);
    const auto radius = estimate_constant(p, LipschitzKind::radius, 0.1, 2000);
    const auto rep = per_step_bounds(Theorem::T31, LAverage::constant(radius.value), tr);
    EXPECT_TRUE(rep.all_hold);
    EXPECT_TRUE(rep.chain_ok);
}

TEST(PerStep, OscillatoryExampleHolds) {
    const auto tr = two_step_newton(find_entry("wang-osc").problem, Vector{0.15});
    const auto rep = per_step_bounds(Theorem::T52, LAverage::constant(1), tr);
    EXPECT_TRUE(rep.all_hold);
    EXPECT_TRUE(rep.chain_ok);
    EXPECT_EQ(rep.form, "center");
    EXPECT_FALSE(rep.records.empty());
}

TEST(PerStep, TooSmallConstantIsCaught) {
    const auto tr = two_step_newton(find_entry("quadratic").problem, Vector{1.2});
    EXPECT_FALSE(per_step_bounds(Theorem::T52, LAverage::constant(0.05), tr).all_hold);
}

TEST(Global, FirstTermIsTheStartingError) {
    const auto tr = two_step_newton(find_entry("exp").problem, Vector{0.1});
    const auto& s0 = tr.steps.front();
    const auto q = q_factors(Theorem::T52, find_entry("exp").recommended_family, s0.rho_x, s0.rho_y);
    const auto rep = global_envelope(Theorem::T52, q, tr);
    ASSERT_FALSE(rep.records.empty());
    EXPECT_EQ(rep.records.front().global_bound, s0.rho_x);
    EXPECT_TRUE(rep.records.front().holds);
    EXPECT_TRUE(rep.all_hold);
}

TEST(Global, QuadraticT31WithSampledConstant) {
    const auto& p = find_entry("quadratic").problem;
    const auto radius = estimate_constant(p, LipschitzKind::radius, 0.1, 2000);
    const auto v = verify_run(p, LAverage::constant(radius.value), Theorem::T31, Vector{1.0 + 0.5 * solve_radius(RadiusCondition::T31, LAverage::constant(radius.value)).r});
    ASSERT_TRUE(v.global.has_value());
    EXPECT_EQ(v.global->form, "C^(3^n-1)");
    EXPECT_TRUE(v.all_hold);
}

TEST(Global, IncreasingErrorsFail) {
    QFactors q;
    q.theorem = Theorem::T31;
    q.q1 = 0.4;
    q.q2 = 0.4;
    q.C = 0.5;
    const auto rep = global_envelope(Theorem::T31, q, synthetic({0.1, 0.2}));
    ASSERT_EQ(rep.records.size(), 2u);
    EXPECT_TRUE(rep.records[0].holds);
    EXPECT_FALSE(rep.records[1].holds);
    EXPECT_NEAR(rep.records[1].global_bound, 0.025, 1e-15);
    EXPECT_FALSE(rep.all_hold);
}

TEST(Global, WeakAverageForm) {
    QFactors q;
    q.theorem = Theorem::T52;
    q.q1 = q.q2 = 0.5;
    q.C = 0.5;
    q.a = 0.5;
    const auto rep = global_envelope(Theorem::T52, q, synthetic({0.1, 0.05, 0.0125}));
    EXPECT_EQ(rep.form, "C^((1+2a)^n-1)");
    EXPECT_NEAR(rep.records[1].global_bound, 0.05, 1e-15);
    EXPECT_NEAR(rep.records[2].global_bound, 0.1 * 0.125, 1e-15);
    EXPECT_TRUE(rep.all_hold);
}

TEST(Global, FloorSkipsTinyErrors) {
    QFactors q;
    q.q1 = q.q2 = q.C = 0.5;
    const auto rep = global_envelope(Theorem::T31, q, synthetic({0.1, 1e-13, 1e-20}));
    EXPECT_EQ(rep.records.size(), 1u);
}

TEST(Global, InvalidQIsRejected) {
    QFactors q;
    q.q1 = 1.2;
    q.q2 = 0.1;
    EXPECT_THROW(global_envelope(Theorem::T52, q, synthetic({0.1})), InvalidQ);
}

TEST(Global, NeedsRootDistances) {
    auto tr = synthetic({0.1});
    tr.steps[0].rho_x = NAN;
    QFactors q;
    q.q1 = q.q2 = q.C = 0.5;
    EXPECT_THROW(global_envelope(Theorem::T31, q, tr), MissingRoot);
    EXPECT_THROW(per_step_bounds(Theorem::T31, LAverage::constant(1), tr), MissingRoot);
}

TEST(VerifyRun, OutsideTheBallIsNotCertified) {
    const auto& e = find_entry("quadratic");
    const auto v = verify_run(e.problem, LAverage::constant(0.5), Theorem::T52, Vector{1.45});
    EXPECT_FALSE(v.all_hold);
    EXPECT_FALSE(v.note.empty());
}

TEST(VerifyRun, OscillatoryConstantIsReportedSeparately) {
    const auto v = verify_run(find_entry("wang-osc").problem, LAverage::constant(1), Theorem::T52,
                              Vector{0.15});
    ASSERT_TRUE(v.q.has_value());
    const double hand = oscillatory_constant(v.q->rho_x0, v.q->rho_y0);
    EXPECT_NEAR(hand, 4 * 0.0225 / (1 - 2 * 0.15 * v.q->rho_y0), 1e-15);
    EXPECT_TRUE(v.all_hold);
}

TEST(Uniqueness, Examples) {
    const auto& q = find_entry("quadratic").problem;
    EXPECT_EQ(uniqueness_probe(q, 2.0, 50).distinct_roots_found, 1);

    NonlinearProblem s;
    s.name = "sin";
    s.dim = 1;
    s.eval = [](const Vector& x) { return Vector{std::sin(x[0])}; };
    s.jacobian = [](const Vector& x) { return Matrix{{std::cos(x[0])}}; };
    s.root = Vector{0.0};
    EXPECT_EQ(uniqueness_probe(s, 1.0, 50).distinct_roots_found, 1);

    NonlinearProblem lin;
    lin.name = "linear";
    lin.dim = 1;
    lin.eval = [](const Vector& x) { return x; };
    lin.jacobian = [](const Vector&) { return Matrix{{1.0}}; };
    lin.root = Vector{0.0};
    EXPECT_EQ(uniqueness_probe(lin, 7.0, 10).distinct_roots_found, 1);
}

TEST(Uniqueness, FindsASecondRootInABigBall) {
    const auto& q = find_entry("quadratic").problem;
    const auto res = uniqueness_probe(q, 3.0, 50);
    EXPECT_EQ(res.distinct_roots_found, 2);
    EXPECT_EQ(res.converged_starts + res.nonconvergent_starts, 50);
}

TEST(Uniqueness, Errors) {
    const auto& q = find_entry("quadratic").problem;
    EXPECT_THROW(uniqueness_probe(q, 0.0, 50), DomainError);
    EXPECT_THROW(uniqueness_probe(q, 1.0, 5), DomainError);
}

TEST(Names, TheoremRoundTrip) {
    for (auto t : {Theorem::T31, Theorem::T51, Theorem::T52})
        EXPECT_EQ(theorem_from_string(to_string(t)), t);
    EXPECT_THROW(theorem_from_string("T41"), ParseError);
}
