#pragma once

// The two-step third-order Newton scheme
//
//   y_k     = x_k - [t'(x_k)]^{-1} t(x_k)
//   x_{k+1} = y_k - [t'(x_k)]^{-1} t(y_k)
//
// with one Jacobian evaluation and one LU factorization per iteration.

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twostep/errors.hpp"
#include "twostep/linalg.hpp"
#include "twostep/problem.hpp"

namespace twostep {

struct StopRule {
    int max_iter = 50;
    double x_tol = 1e-14;
    double f_tol = 1e-14;

    void validate() const {
        if (max_iter <= 0 || !(x_tol > 0.0) || !(f_tol > 0.0))
            throw DomainError("StopRule: all fields must be positive");
    }
};

enum class Termination { converged, max_iter, singular_jacobian, diverged };

inline std::string to_string(Termination t) {
    switch (t) {
    case Termination::converged:
        return "converged";
    case Termination::max_iter:
        return "max_iter";
    case Termination::singular_jacobian:
        return "singular_jacobian";
    case Termination::diverged:
        return "diverged";
    }
    return "unknown";
}

inline Termination termination_from_string(const std::string& s) {
    for (auto t : {Termination::converged, Termination::max_iter, Termination::singular_jacobian,
                   Termination::diverged})
        if (to_string(t) == s)
            return t;
    throw ParseError("unknown termination '" + s + "'");
}

/// One recorded iteration. When the first sub-step could not be taken
/// (singular Jacobian, divergence) y is a copy of x and y_valid is false.
/// rho_x / rho_y are NaN when the root is unknown.
struct TraceStep {
    int n = 0;
    Vector x;
    Vector y;
    double rho_x = std::numeric_limits<double>::quiet_NaN();
    double rho_y = std::numeric_limits<double>::quiet_NaN();
    double f_norm_x = 0.0;
    double f_norm_y = 0.0;
    bool y_valid = true;
};

struct IterationTrace {
    std::string problem;
    std::vector<TraceStep> steps;
    Termination termination = Termination::max_iter;

    bool has_root_distances() const { return !steps.empty() && !std::isnan(steps.front().rho_x); }

    std::vector<double> x_errors() const {
        std::vector<double> out;
        out.reserve(steps.size());
        for (const auto& s : steps)
            out.push_back(s.rho_x);
        return out;
    }
};

inline constexpr double divergence_bound = 1e12;

namespace detail {

inline bool finite_and_bounded(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x))
            return false;
    return norm2(v) <= divergence_bound;
}

} // namespace detail

/// Runs the scheme from x0. Every iterate x_k is recorded together with its
/// half-step y_k; the loop stops once ||t(x_k)|| <= f_tol or
/// ||x_k - x_{k-1}|| <= x_tol (converged), after max_iter updates, on a
/// rejected pivot, or once ||x_k|| > 1e12.
inline IterationTrace two_step_newton(const NonlinearProblem& p, const Vector& x0,
                                      const StopRule& stop = {}) {
    stop.validate();
    if (x0.size() != p.dim)
        throw DomainError("two_step_newton: x0 has dimension " + std::to_string(x0.size()) +
                          ", problem expects " + std::to_string(p.dim));
    for (double v : x0)
        if (!std::isfinite(v))
            throw DomainError("two_step_newton: x0 must be finite");

    IterationTrace trace;
    trace.problem = p.name;
    const Vector* root = p.root ? &*p.root : nullptr;
    const auto rho = [&](const Vector& v) {
        return root ? distance(v, *root) : std::numeric_limits<double>::quiet_NaN();
    };

    Vector x = x0;
    std::optional<Vector> x_prev;
    for (int k = 0;; ++k) {
        TraceStep step;
        step.n = k;
        step.x = x;
        step.rho_x = rho(x);

        if (!detail::finite_and_bounded(x)) {
            step.y = x;
            step.y_valid = false;
            step.f_norm_x = std::numeric_limits<double>::quiet_NaN();
            step.f_norm_y = step.f_norm_x;
            trace.steps.push_back(std::move(step));
            trace.termination = Termination::diverged;
            return trace;
        }

        const Vector fx = p.eval(x);
        step.f_norm_x = norm2(fx);

        std::optional<LuDecomposition> lu;
        try {
            lu.emplace(jacobian_at(p, x));
        } catch (const SingularMatrix&) {
            step.y = x;
            step.y_valid = false;
            step.f_norm_y = step.f_norm_x;
            trace.steps.push_back(std::move(step));
            trace.termination = Termination::singular_jacobian;
            return trace;
        } catch (const DomainError&) {
            // non-finite Jacobian entries
            step.y = x;
            step.y_valid = false;
            step.f_norm_y = step.f_norm_x;
            trace.steps.push_back(std::move(step));
            trace.termination = Termination::diverged;
            return trace;
        }

        const Vector y = x - lu->solve(fx);
        step.y = y;
        step.rho_y = rho(y);
        const bool y_ok = detail::finite_and_bounded(y);
        const Vector fy = y_ok ? p.eval(y) : Vector(p.dim, std::numeric_limits<double>::quiet_NaN());
        step.f_norm_y = norm2(fy);
        trace.steps.push_back(step);

        const bool small_residual = step.f_norm_x <= stop.f_tol;
        const bool small_step = x_prev && distance(x, *x_prev) <= stop.x_tol;
        if (small_residual || small_step) {
            trace.termination = Termination::converged;
            return trace;
        }
        if (!y_ok) {
            trace.termination = Termination::diverged;
            return trace;
        }
        if (k >= stop.max_iter) {
            trace.termination = Termination::max_iter;
            return trace;
        }
        x_prev = x;
        x = y - lu->solve(fy);
    }
}

struct OrderEstimate {
    double order = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
};

inline constexpr double order_error_floor = 1e-13;

/// Computational order of convergence from successive error triples,
///   p_n = ln(e_{n+1}/e_n) / ln(e_n/e_{n-1}),
/// over the leading run of errors above 1e-13. Returns the last p_n;
/// ok iff p lies in [2.5, 3.5].
inline OrderEstimate estimate_order(std::span<const double> errors) {
    std::vector<double> e;
    for (double v : errors) {
        if (!(v > order_error_floor) || !std::isfinite(v))
            break;
        e.push_back(v);
    }
    OrderEstimate out;
    for (std::size_t n = 1; n + 1 < e.size(); ++n) {
        const double den = std::log(e[n] / e[n - 1]);
        const double num = std::log(e[n + 1] / e[n]);
        if (den >= 0.0 || num >= 0.0)
            continue;  // not contracting; no meaningful order
        out.order = num / den;
    }
    if (std::isnan(out.order))
        throw InsufficientData("estimate_order: need at least three decreasing errors above 1e-13, got " +
                               std::to_string(e.size()) + " usable");
    out.ok = out.order >= 2.5 && out.order <= 3.5;
    return out;
}

inline OrderEstimate estimate_order(const IterationTrace& trace) {
    if (!trace.has_root_distances())
        throw MissingRoot("estimate_order: trace has no root distances");
    const auto errs = trace.x_errors();
    return estimate_order(errs);
}

} // namespace twostep
