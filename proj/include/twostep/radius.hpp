#pragma once

// Convergence and uniqueness radii. Each condition is written as g(r) <= 1:
//
//   T31   ∫_0^{2r} L(u) u du / (2r (1 - ∫_0^{2r} L))
//   T41   ∫_0^{2r} L(u)(2r - u) du / (2r)
//   T51a  2 ∫_0^{2r} L
//   T51b  ∫_0^{2r} (2r + u) L(u) du / (2r)
//   T52   3 ∫_0^{2r} L
//
// solve_radius finds the supremum of {r : g(r) <= 1} by bracket expansion and
// bisection. The closed forms are evaluated as written, with no algebraic
// repair, and compared with the numeric solution by cross_validate.

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "twostep/errors.hpp"
#include "twostep/laverage.hpp"

namespace twostep {

enum class RadiusCondition { T31, T41, T51a, T51b, T52 };

inline constexpr std::array<RadiusCondition, 5> all_conditions{
    RadiusCondition::T31, RadiusCondition::T41, RadiusCondition::T51a, RadiusCondition::T51b,
    RadiusCondition::T52};

inline std::string to_string(RadiusCondition c) {
    switch (c) {
    case RadiusCondition::T31:
        return "T31";
    case RadiusCondition::T41:
        return "T41";
    case RadiusCondition::T51a:
        return "T51a";
    case RadiusCondition::T51b:
        return "T51b";
    case RadiusCondition::T52:
        return "T52";
    }
    return "?";
}

inline RadiusCondition radius_condition_from_string(const std::string& s) {
    for (auto c : all_conditions)
        if (to_string(c) == s)
            return c;
    throw ParseError("unknown radius condition '" + s + "'");
}

/// g(r) for the given condition; +inf where T31's denominator is nonpositive.
inline double condition_value(RadiusCondition cond, const LAverage& fam, double r) {
    const double s = 2.0 * r;
    const double cum = cumulative(fam, s);
    switch (cond) {
    case RadiusCondition::T31: {
        if (cum >= 1.0)
            return std::numeric_limits<double>::infinity();
        return first_moment(fam, s) / (s * (1.0 - cum));
    }
    case RadiusCondition::T41:
        return cum - first_moment(fam, s) / s;
    case RadiusCondition::T51a:
        return 2.0 * cum;
    case RadiusCondition::T51b:
        return cum + first_moment(fam, s) / s;
    case RadiusCondition::T52:
        return 3.0 * cum;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

struct RadiusCertificate {
    RadiusCondition condition = RadiusCondition::T31;
    double r = 0.0;
    double residual = 0.0;
    std::pair<double, double> bracket{0.0, 0.0};
    bool feasible = false;
};

inline constexpr double radius_origin_probe = 1e-12;
inline constexpr double radius_initial = 1e-8;
inline constexpr double radius_cap = 1e12;
inline constexpr double residual_tol = 1e-8;

/// Largest admissible r: 1e12, or just inside the family domain (2r must
/// stay below 1/gamma for Rational, at most u_max for Tabulated).
inline double radius_upper_limit(const LAverage& fam) {
    if (std::holds_alternative<RationalFamily>(fam.family()))
        return 0.999 * fam.domain_end() / 2.0;
    return std::min(radius_cap, fam.domain_end() / 2.0);
}

inline RadiusCertificate solve_radius(RadiusCondition cond, const LAverage& fam,
                                      double rel_tol = 1e-12) {
    if (!(rel_tol > 0.0 && rel_tol <= 1e-4))
        throw DomainError("solve_radius: rel_tol must lie in (0, 1e-4]");
    const auto g = [&](double r) { return condition_value(cond, fam, r); };

    if (g(radius_origin_probe) > 1.0)
        throw InfeasibleAtOrigin("solve_radius: condition " + to_string(cond) +
                                 " already fails at r = 1e-12 for the " + fam.name() + " family");
    const double limit = radius_upper_limit(fam);
    if (limit < radius_initial)
        throw DomainError("solve_radius: family domain caps r before a bracket forms");

    RadiusCertificate cert;
    cert.condition = cond;
    double lo = radius_origin_probe;
    double hi = radius_initial;
    while (g(hi) <= 1.0) {
        lo = hi;
        if (hi >= limit) {
            // g never reaches 1 inside the domain: the edge is the certificate
            cert.r = limit;
            cert.residual = g(limit) - 1.0;
            cert.bracket = {limit, limit};
            cert.feasible = true;
            return cert;
        }
        hi = std::min(2.0 * hi, limit);
    }
    while (hi - lo > rel_tol * lo) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (g(mid) <= 1.0)
            lo = mid;
        else
            hi = mid;
    }
    cert.r = lo;
    cert.residual = g(lo) - 1.0;
    cert.bracket = {lo, hi};
    cert.feasible = cert.residual <= residual_tol;
    return cert;
}

enum class ClosedFormId {
    C_const_radius,
    C_const_center,
    C_affine_radius,
    C_affine_center,
    C_holder_T51b,
    C_holder_T52,
    C_rational_T52,
};

inline constexpr std::array<ClosedFormId, 7> all_closed_forms{
    ClosedFormId::C_const_radius,  ClosedFormId::C_const_center, ClosedFormId::C_affine_radius,
    ClosedFormId::C_affine_center, ClosedFormId::C_holder_T51b,  ClosedFormId::C_holder_T52,
    ClosedFormId::C_rational_T52};

inline std::string to_string(ClosedFormId id) {
    switch (id) {
    case ClosedFormId::C_const_radius:
        return "C_const_radius";
    case ClosedFormId::C_const_center:
        return "C_const_center";
    case ClosedFormId::C_affine_radius:
        return "C_affine_radius";
    case ClosedFormId::C_affine_center:
        return "C_affine_center";
    case ClosedFormId::C_holder_T51b:
        return "C_holder_T51b";
    case ClosedFormId::C_holder_T52:
        return "C_holder_T52";
    case ClosedFormId::C_rational_T52:
        return "C_rational_T52";
    }
    return "?";
}

inline ClosedFormId closed_form_from_string(const std::string& s) {
    for (auto id : all_closed_forms)
        if (to_string(id) == s)
            return id;
    throw ParseError("unknown closed-form id '" + s + "'");
}

/// The condition each closed form claims to solve.
inline RadiusCondition parent_condition(ClosedFormId id) {
    switch (id) {
    case ClosedFormId::C_const_radius:
    case ClosedFormId::C_affine_radius:
        return RadiusCondition::T31;
    case ClosedFormId::C_const_center:
    case ClosedFormId::C_affine_center:
        return RadiusCondition::T41;
    case ClosedFormId::C_holder_T51b:
        return RadiusCondition::T51b;
    case ClosedFormId::C_holder_T52:
    case ClosedFormId::C_rational_T52:
        return RadiusCondition::T52;
    }
    return RadiusCondition::T31;
}

namespace detail {

template <class Fam>
const Fam& require_family(const LAverage& fam, ClosedFormId id) {
    const auto* f = std::get_if<Fam>(&fam.family());
    if (!f)
        throw DomainError(to_string(id) + ": closed form does not apply to the " + fam.name() +
                          " family");
    return *f;
}

} // namespace detail

/// Evaluates a closed-form radius as written (fractions such as
/// "40/3 L" are read as (40/3)·L).
inline double closed_form_radius(ClosedFormId id, const LAverage& fam) {
    switch (id) {
    case ClosedFormId::C_const_radius: {
        const auto& f = detail::require_family<ConstantFamily>(fam, id);
        return 1.0 / (3.0 * f.value);
    }
    case ClosedFormId::C_const_center: {
        const auto& f = detail::require_family<ConstantFamily>(fam, id);
        return 1.0 / f.value;
    }
    case ClosedFormId::C_affine_radius: {
        const auto& f = detail::require_family<AffineFamily>(fam, id);
        const double g = f.gamma;
        const double l = f.slope;
        return (-3.0 * g + std::sqrt(9.0 * g * g + 40.0 / 3.0 * l)) / (7.0 * l);
    }
    case ClosedFormId::C_affine_center: {
        const auto& f = detail::require_family<AffineFamily>(fam, id);
        const double g = f.gamma;
        const double l = f.slope;
        const double disc = 4.0 * g * g - 16.0 / 3.0 * l;
        if (disc < 0.0)
            throw NegativeDiscriminant("C_affine_center: 4 gamma^2 - 16 L / 3 = " +
                                       std::to_string(disc) + " < 0");
        return (2.0 * g - std::sqrt(disc)) / (8.0 / 3.0 * l);
    }
    case ClosedFormId::C_holder_T51b: {
        const auto& f = detail::require_family<HolderFamily>(fam, id);
        return std::pow((f.a + 1.0) / (f.c * std::pow(2.0, f.a) * (1.0 + 2.0 * f.a)), 1.0 / f.a);
    }
    case ClosedFormId::C_holder_T52: {
        const auto& f = detail::require_family<HolderFamily>(fam, id);
        return std::pow(1.0 / (3.0 * f.c * std::pow(2.0, f.a)), 1.0 / f.a);
    }
    case ClosedFormId::C_rational_T52: {
        const auto& f = detail::require_family<RationalFamily>(fam, id);
        const double c = f.c;
        return (3.0 * c + 1.0 - std::sqrt(3.0 * c * (3.0 * c + 1.0))) /
               (2.0 * f.gamma * (3.0 * c + 1.0));
    }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

struct CrossValidation {
    ClosedFormId id = ClosedFormId::C_const_radius;
    RadiusCondition parent = RadiusCondition::T31;
    double closed = std::numeric_limits<double>::quiet_NaN();
    double numeric = std::numeric_limits<double>::quiet_NaN();
    bool agree = false;
    double rel_gap = std::numeric_limits<double>::infinity();
    std::string note;  // why a closed form could not be evaluated
};

inline constexpr double cross_validation_tol = 1e-6;

/// Closed form vs. the numeric root of its parent condition. Mismatches and
/// non-real closed forms are reported in the result, never thrown.
inline CrossValidation cross_validate(ClosedFormId id, const LAverage& fam, double rel_tol = 1e-12) {
    CrossValidation out;
    out.id = id;
    out.parent = parent_condition(id);
    out.numeric = solve_radius(out.parent, fam, rel_tol).r;
    try {
        out.closed = closed_form_radius(id, fam);
    } catch (const NegativeDiscriminant& e) {
        out.note = e.what();
        return out;
    }
    out.rel_gap = std::abs(out.closed - out.numeric) / out.numeric;
    out.agree = out.rel_gap <= cross_validation_tol;
    return out;
}

} // namespace twostep
