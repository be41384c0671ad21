#pragma once

// Built-in desk-scale problems with known roots and analytic Jacobians.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "twostep/errors.hpp"
#include "twostep/laverage.hpp"
#include "twostep/linalg.hpp"
#include "twostep/problem.hpp"
#include "twostep/quadrature.hpp"
#include "twostep/radius.hpp"
#include "twostep/sampling.hpp"
#include "twostep/verify.hpp"

namespace twostep {

namespace oscillatory {

/// Below 1/tail_index the integral of 2s sin(pi/s) is taken from its
/// asymptotic expansion instead of quadrature.
inline constexpr int tail_index = 1000;

/// ∫_V^∞ sin(v) / v^3 dv for large V, by repeated integration by parts.
inline double sine_tail(double v) {
    // A_m = cos V / V^m - m B_{m+1},  B_m = -sin V / V^m + m A_{m+1}
    const double c = std::cos(v);
    const double s = std::sin(v);
    double sum = 0.0;
    double coef = 1.0;
    double vp = v * v * v;
    for (int m = 3; m < 40; m += 2) {
        const double ta = coef * c / vp;
        const double tb = coef * m * s / (vp * v);
        sum += ta + tb;
        const double next = coef * m * (m + 1);
        if (std::abs(ta) + std::abs(tb) < 1e-30 * (1.0 + std::abs(sum)))
            break;
        coef = -next;
        vp *= v * v;
    }
    return sum;
}

/// ∫_0^x 2s sin(pi/s) ds for 0 <= x <= 1/tail_index.
inline double small_integral(double x) {
    if (x == 0.0)
        return 0.0;
    constexpr double pi = std::numbers::pi;
    return 2.0 * pi * pi * sine_tail(pi / x);
}

inline double integrand(double s) {
    return s == 0.0 ? 0.0 : 2.0 * s * std::sin(std::numbers::pi / s);
}

inline constexpr QuadratureConfig panel_config{1e-13, 1e-16, 10'000};

/// prefix[k] = ∫_0^{1/k} 2s sin(pi/s) ds for k = 1..tail_index, accumulated
/// panel by panel between consecutive zeros of sin(pi/s).
inline const std::vector<double>& zero_prefix() {
    static const std::vector<double> table = [] {
        std::vector<double> p(tail_index + 1, 0.0);
        p[tail_index] = small_integral(1.0 / tail_index);
        for (int k = tail_index - 1; k >= 1; --k)
            p[k] = p[k + 1] + adaptive_simpson(integrand, 1.0 / (k + 1), 1.0 / k, panel_config);
        return p;
    }();
    return table;
}

/// t(x) = ∫_0^x (1 + 2s sin(pi/s)) ds. Below 1/1000 the oscillating part
/// comes from the asymptotic tail; above it, from the cached integral up to
/// the nearest zero 1/k below x plus one adaptive Simpson panel.
inline double t(double x) {
    if (x < 0.0)
        return -t(-x);
    if (x <= 1.0 / tail_index)
        return x + small_integral(x);
    const auto& prefix = zero_prefix();
    // 1/(k+1) < x <= 1/k, or k = 0 beyond the last zero
    const int k = x > 1.0 ? 0 : std::min(tail_index - 1, static_cast<int>(1.0 / x));
    const double lo = 1.0 / (k + 1);
    return x + prefix[k + 1] + adaptive_simpson(integrand, lo, x, panel_config);
}

inline double dt(double x) {
    return x == 0.0 ? 1.0 : 1.0 + 2.0 * x * std::sin(std::numbers::pi / x);
}

} // namespace oscillatory

struct SuiteEntry {
    NonlinearProblem problem;
    LAverage recommended_family;
    Theorem recommended_theorem = Theorem::T52;
    Vector default_x0;
    std::string notes;
    /// Threshold for derivative_audit.
    double audit_tol = 1e-5;
};

inline RadiusCondition radius_condition_for(Theorem t) {
    switch (t) {
    case Theorem::T31:
        return RadiusCondition::T31;
    case Theorem::T51:
        return RadiusCondition::T51a;
    case Theorem::T52:
        return RadiusCondition::T52;
    }
    return RadiusCondition::T52;
}

namespace detail {

inline NonlinearProblem scalar_problem(std::string name, double (*f)(double), double (*df)(double),
                                       double root, double ball) {
    NonlinearProblem p;
    p.name = std::move(name);
    p.dim = 1;
    p.eval = [f](const Vector& x) { return Vector{f(x[0])}; };
    p.jacobian = [df](const Vector& x) { return Matrix{{df(x[0])}}; };
    p.root = Vector{root};
    p.ball_radius = ball;
    return p;
}

} // namespace detail

inline std::vector<SuiteEntry> suite() {
    std::vector<SuiteEntry> out;

    out.push_back({detail::scalar_problem(
                       "quadratic", [](double x) { return x * x - 1.0; },
                       [](double x) { return 2.0 * x; }, 1.0, 2.0),
                   LAverage::constant(0.5), Theorem::T52, Vector{1.2},
                   "t(x) = x^2 - 1; center constant exactly 1/2 (ratio is (x-1)/(2|x-1|)).", 1e-5});

    out.push_back({detail::scalar_problem(
                       "exp", [](double x) { return std::expm1(x); },
                       [](double x) { return std::exp(x); }, 0.0, 1.0),
                   LAverage::constant((std::numbers::e - 1.0) / 2.0), Theorem::T52, Vector{0.1},
                   "t(x) = e^x - 1; center constant (e-1)/2 on V(0, 1).", 1e-5});

    out.push_back({detail::scalar_problem("wang-osc", oscillatory::t, oscillatory::dt, 0.0, 1.0),
                   LAverage::constant(1.0), Theorem::T52, Vector{0.15},
                   "t(x) = ∫_0^x (1 + 2s sin(pi/s)) ds. Center condition holds with L = 1 "
                   "(certifies r = 1/6 under T52); the radius condition fails for every "
                   "integrable L, so T31/T51 are not certified.",
                   1e-4});

    out.push_back({detail::scalar_problem(
                       "holder",
                       [](double x) {
                           return x + std::copysign(2.0 / 3.0 * std::pow(std::abs(x), 1.5), x);
                       },
                       [](double x) { return 1.0 + std::sqrt(std::abs(x)); }, 0.0, 1.0),
                   LAverage::holder(1.0, 0.5), Theorem::T52, Vector{0.03},
                   "t'(x) = 1 + |x|^{1/2}; center condition holds with L(u) = c a u^{a-1}, "
                   "c = 1, a = 1/2.",
                   1e-5});

    {
        NonlinearProblem p;
        p.name = "sys2";
        p.dim = 2;
        p.eval = [](const Vector& x) {
            return Vector{x[0] * x[0] + x[1] - 2.0, x[0] + x[1] * x[1] - 2.0};
        };
        p.jacobian = [](const Vector& x) { return Matrix{{2.0 * x[0], 1.0}, {1.0, 2.0 * x[1]}}; };
        p.root = Vector{1.0, 1.0};
        p.ball_radius = 1.0;
        out.push_back({std::move(p), LAverage::constant(1.0), Theorem::T52, Vector{1.1, 0.95},
                       "(x1^2 + x2 - 2, x1 + x2^2 - 2); center ratio <= ||J*^{-1}|| = 1. "
                       "Other roots are at distance >= sqrt(3).",
                       1e-5});
    }
    return out;
}

inline SuiteEntry find_entry(const std::string& name) {
    for (auto& e : suite())
        if (e.problem.name == name)
            return e;
    throw DomainError("unknown suite problem '" + name + "'");
}

struct DerivativeAudit {
    double max_rel_err = 0.0;
    bool ok = false;
};

/// Analytic Jacobian vs. central differences at the given points. The error
/// is entrywise, relative to max(1, largest analytic entry).
inline DerivativeAudit derivative_audit_at(const NonlinearProblem& p, const std::vector<Vector>& pts,
                                           double tol) {
    if (!p.has_analytic_jacobian())
        throw DomainError("derivative_audit: problem has no analytic Jacobian");
    DerivativeAudit out;
    for (const auto& x : pts) {
        const Matrix ja = p.jacobian(x);
        const Matrix jf = jacobian_fd(p, x);
        const double scale = std::max(1.0, max_abs(ja));
        out.max_rel_err = std::max(out.max_rel_err, max_abs(ja - jf) / scale);
    }
    out.ok = out.max_rel_err <= tol;
    return out;
}

/// 20 quasi-random points of the entry's ball (the origin excluded for the
/// piecewise-defined oscillatory entry).
inline DerivativeAudit derivative_audit(const SuiteEntry& e, std::uint64_t seed = 42) {
    const auto& p = e.problem;
    const Vector& root = require_root(p);
    const double r = p.ball_radius.value_or(1.0);
    const HaltonSequence seq(p.dim, seed);
    std::vector<Vector> pts;
    for (std::uint64_t k = 1; pts.size() < 20; ++k) {
        Vector x = map_to_ball(seq.point(k), root, r);
        if (p.name == "wang-osc" && std::abs(x[0]) < 1e-2)
            continue;
        pts.push_back(std::move(x));
    }
    return derivative_audit_at(p, pts, e.audit_tol);
}

} // namespace twostep
