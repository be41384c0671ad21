#pragma once

// q-factors, per-step error bounds and global a-priori envelopes for the
// convergence theorems, checked against observed iteration traces; plus an
// empirical probe of uniqueness balls.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "twostep/errors.hpp"
#include "twostep/iterate.hpp"
#include "twostep/laverage.hpp"
#include "twostep/sampling.hpp"

namespace twostep {

enum class Theorem { T31, T51, T52 };

inline std::string to_string(Theorem t) {
    switch (t) {
    case Theorem::T31:
        return "T31";
    case Theorem::T51:
        return "T51";
    case Theorem::T52:
        return "T52";
    }
    return "?";
}

inline Theorem theorem_from_string(const std::string& s) {
    for (auto t : {Theorem::T31, Theorem::T51, Theorem::T52})
        if (to_string(t) == s)
            return t;
    throw ParseError("unknown theorem '" + s + "'");
}

inline constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

struct QFactors {
    Theorem theorem = Theorem::T31;
    double q1 = nan_value;
    double q2 = nan_value;
    /// Base of the C-power envelope: q1 ρ(x0)/ρ(y0) (Q1 ρ(x0)/ρ(y0) for T51).
    double C = nan_value;
    /// Weak-average exponent; selects the C^{(1+2a)^n - 1} envelope for T51/T52.
    std::optional<double> a;
    /// T51 only: first-moment analogues used with the weak-average envelope.
    std::optional<double> Q1;
    std::optional<double> Q2;
    double rho_x0 = nan_value;
    double rho_y0 = nan_value;

    bool valid() const { return q1 < 1.0 && q2 < 1.0; }
};

inline QFactors q_factors(Theorem theorem, const LAverage& fam, double rho_x0, double rho_y0,
                          std::optional<double> a = std::nullopt) {
    if (!(rho_x0 > 0.0))
        throw DomainError("q_factors: rho(x0) must be positive");
    if (!(rho_y0 >= 0.0))
        throw DomainError("q_factors: rho(y0) must be >= 0");
    if (a && !(*a >= 0.0 && *a <= 1.0))
        throw DomainError("q_factors: a must lie in [0, 1]");
    const double cx = cumulative(fam, 2.0 * rho_x0);
    if (cx >= 1.0)
        throw DenominatorNonpositive("q_factors: ∫_0^{2ρ(x0)} L = " + std::to_string(cx) + " >= 1");
    const double den = 1.0 - cx;
    const double sxy = rho_x0 + rho_y0;

    // first-moment forms shared by T31 and T51's Q-factors
    const auto moment_q1 = [&] { return first_moment(fam, 2.0 * rho_x0) / (2.0 * rho_x0 * den); };
    const auto moment_q2 = [&] { return first_moment(fam, sxy) / (sxy * den); };

    QFactors q;
    q.theorem = theorem;
    q.a = a;
    q.rho_x0 = rho_x0;
    q.rho_y0 = rho_y0;
    switch (theorem) {
    case Theorem::T31:
        q.q1 = moment_q1();
        q.q2 = moment_q2();
        q.C = q.q1 * rho_x0 / rho_y0;
        break;
    case Theorem::T51:
        q.q1 = cx / den;
        q.q2 = cumulative(fam, sxy) / den;
        q.Q1 = moment_q1();
        q.Q2 = moment_q2();
        q.C = *q.Q1 * rho_x0 / rho_y0;
        break;
    case Theorem::T52:
        q.q1 = 2.0 * cx / den;
        q.q2 = (cx + cumulative(fam, 2.0 * rho_y0)) / den;
        q.C = q.q1 * rho_x0 / rho_y0;
        break;
    }
    return q;
}

/// The hand-derived contraction constant for the oscillatory problem,
/// 4|x0|^2 / (1 - 2|x0||y0|). Reported next to the theorem's C; no check uses it.
inline double oscillatory_constant(double rho_x0, double rho_y0) {
    return 4.0 * rho_x0 * rho_x0 / (1.0 - 2.0 * rho_x0 * rho_y0);
}

inline constexpr double default_floor = 1e-12;

struct EnvelopeRecord {
    int n = 0;
    double observed = nan_value;         // ρ(x_n)
    double observed_y = nan_value;       // ρ(y_n)
    double observed_x_next = nan_value;  // ρ(x_{n+1})
    double bound_y = nan_value;
    double bound_x = nan_value;
    double global_bound = nan_value;
    double qbound_y = nan_value;  // q-factor form of bound_y
    double qbound_x = nan_value;  // q-factor form of bound_x
    bool holds = true;
    bool chain_ok = true;
    double slack = nan_value;
};

struct EnvelopeReport {
    Theorem theorem = Theorem::T31;
    std::string kind;  // "per_step" | "global"
    std::string form;  // which bound family was evaluated
    double floor = default_floor;
    std::vector<EnvelopeRecord> records;
    bool all_hold = true;
    bool chain_ok = true;
};

namespace detail {

inline bool within(double bound, double observed) {
    if (std::isnan(observed))
        return true;
    return bound - observed >= -1e-12 * (1.0 + std::abs(bound));
}

inline bool chain_within(double bound, double qbound) {
    return bound <= qbound * (1.0 + 1e-12) + 1e-300;
}

inline double min_ignoring_nan(double a, double b) {
    if (std::isnan(a))
        return b;
    if (std::isnan(b))
        return a;
    return std::min(a, b);
}

inline void require_root_distances(const IterationTrace& trace) {
    if (!trace.has_root_distances())
        throw MissingRoot("trace '" + trace.problem + "' has no distances to a known root");
}

} // namespace detail

/// Per-step bounds on ρ(y_n) and ρ(x_{n+1}) computed from ρ(x_n), ρ(y_n)
/// alone, compared with the observed trace for every n with ρ(x_n) > floor.
/// Also checks that each per-step bound sits below its q-factor form.
inline EnvelopeReport per_step_bounds(Theorem theorem, const LAverage& fam,
                                      const IterationTrace& trace, double floor = default_floor) {
    detail::require_root_distances(trace);
    EnvelopeReport rep;
    rep.theorem = theorem;
    rep.kind = "per_step";
    rep.form = theorem == Theorem::T52 ? "center" : "radius";
    rep.floor = floor;

    std::optional<QFactors> q;
    const auto& first = trace.steps.front();
    if (first.rho_x > floor && first.y_valid) {
        try {
            q = q_factors(theorem, fam, first.rho_x, first.rho_y);
        } catch (const DenominatorNonpositive&) {
        }
    }
    const double r0 = first.rho_x;
    const double ry0 = first.rho_y;

    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& st = trace.steps[i];
        if (!(st.rho_x > floor) || !st.y_valid)
            continue;
        EnvelopeRecord rec;
        rec.n = st.n;
        rec.observed = st.rho_x;
        rec.observed_y = st.rho_y;
        if (i + 1 < trace.steps.size())
            rec.observed_x_next = trace.steps[i + 1].rho_x;

        const double rx = st.rho_x;
        const double ry = st.rho_y;
        const double cx = cumulative(fam, 2.0 * rx);
        const double den = 1.0 - cx;
        if (den <= 0.0) {
            rec.bound_y = rec.bound_x = std::numeric_limits<double>::infinity();
        } else if (theorem == Theorem::T52) {
            rec.bound_y = 2.0 * cx / den * rx;
            rec.bound_x = (cx + cumulative(fam, 2.0 * ry)) / den * ry;
        } else {
            rec.bound_y = first_moment(fam, 2.0 * rx) / (2.0 * den);
            const double s = rx + ry;
            rec.bound_x = s > 0.0 ? first_moment(fam, s) / (s * den) * ry : 0.0;
        }

        if (q) {
            if (theorem == Theorem::T31) {
                rec.qbound_y = q->q1 / r0 * rx * rx;
                rec.qbound_x = q->q2 * q->q1 / (r0 * ry0) * rx * rx * rx;
            } else {
                rec.qbound_y = q->q1 * rx;
                rec.qbound_x = q->q2 * q->q1 * rx;
            }
            // the x-bound scales with the observed ρ(y_n), which is rounding
            // noise once it drops below the floor
            rec.chain_ok = detail::chain_within(rec.bound_y, rec.qbound_y) &&
                           (!(ry > floor) || detail::chain_within(rec.bound_x, rec.qbound_x));
        }

        rec.holds = detail::within(rec.bound_y, rec.observed_y) &&
                    detail::within(rec.bound_x, rec.observed_x_next);
        rec.slack = detail::min_ignoring_nan(rec.bound_y - rec.observed_y,
                                             rec.bound_x - rec.observed_x_next);
        rep.all_hold = rep.all_hold && rec.holds;
        rep.chain_ok = rep.chain_ok && rec.chain_ok;
        rep.records.push_back(rec);
    }
    return rep;
}

inline std::string envelope_form(Theorem theorem, const QFactors& q) {
    if (theorem == Theorem::T31)
        return "C^(3^n-1)";
    if (q.a)
        return "C^((1+2a)^n-1)";
    return "(q1q2)^n";
}

/// Global a-priori envelope: C^{3^n-1} ρ(x0) for T31, C^{(1+2a)^n-1} ρ(x0)
/// for T51/T52 when an exponent a is given, (q1 q2)^n ρ(x0) otherwise.
inline EnvelopeReport global_envelope(Theorem theorem, const QFactors& q,
                                      const IterationTrace& trace, double floor = default_floor) {
    detail::require_root_distances(trace);
    if (!q.valid())
        throw InvalidQ("global_envelope: q1 = " + std::to_string(q.q1) + ", q2 = " +
                       std::to_string(q.q2) + " (both must be < 1)");
    EnvelopeReport rep;
    rep.theorem = theorem;
    rep.kind = "global";
    rep.form = envelope_form(theorem, q);
    rep.floor = floor;

    const double r0 = trace.steps.front().rho_x;
    const double log_r0 = std::log(r0);
    for (const auto& st : trace.steps) {
        if (!(st.rho_x > floor))
            continue;
        EnvelopeRecord rec;
        rec.n = st.n;
        rec.observed = st.rho_x;
        const double n = static_cast<double>(st.n);
        double bound = r0;
        if (st.n > 0) {
            double log_bound = 0.0;
            if (rep.form == "(q1q2)^n") {
                log_bound = n * std::log(q.q1 * q.q2) + log_r0;
            } else {
                const double base = rep.form == "C^(3^n-1)" ? 3.0 : 1.0 + 2.0 * *q.a;
                const double expo = std::pow(base, n) - 1.0;
                log_bound = expo == 0.0 ? log_r0 : expo * std::log(q.C) + log_r0;
            }
            bound = std::exp(log_bound);
        }
        rec.global_bound = bound;
        rec.slack = bound - st.rho_x;
        rec.holds = detail::within(bound, st.rho_x);
        rep.all_hold = rep.all_hold && rec.holds;
        rep.records.push_back(rec);
    }
    return rep;
}

/// Everything a single verification run produces.
struct Verification {
    Theorem theorem = Theorem::T31;
    IterationTrace trace;
    std::optional<QFactors> q;
    EnvelopeReport per_step;
    std::optional<EnvelopeReport> global;
    bool all_hold = false;
    std::string note;
};

/// Iterate from x0, derive q-factors from the first step, and check both the
/// per-step bounds and the global envelope.
inline Verification verify_run(const NonlinearProblem& p, const LAverage& fam, Theorem theorem,
                               const Vector& x0, const StopRule& stop = {},
                               std::optional<double> a = std::nullopt, double floor = default_floor) {
    require_root(p);
    Verification v;
    v.theorem = theorem;
    v.trace = two_step_newton(p, x0, stop);
    v.per_step = per_step_bounds(theorem, fam, v.trace, floor);
    const auto& first = v.trace.steps.front();
    bool global_ok = true;
    if (first.rho_x > floor && first.y_valid) {
        try {
            v.q = q_factors(theorem, fam, first.rho_x, first.rho_y, a);
        } catch (const DenominatorNonpositive& e) {
            // all_hold stays false
            v.note = std::string("x0 lies outside the certified ball: ") + e.what();
            return v;
        }
        if (v.q->valid()) {
            v.global = global_envelope(theorem, *v.q, v.trace, floor);
            global_ok = v.global->all_hold;
        } else {
            global_ok = false;
            v.note = "q-factors not below 1: x0 lies outside the certified ball";
        }
    } else {
        v.note = "x0 within floor of the root: nothing to compare";
    }
    v.all_hold = v.per_step.all_hold && global_ok;
    return v;
}

struct UniquenessResult {
    int distinct_roots_found = 0;
    std::vector<Vector> locations;
    int converged_starts = 0;
    int nonconvergent_starts = 0;
};

/// Runs the scheme from n_starts quasi-random points of the open ball
/// V(x*, r) and counts distinct converged endpoints (cluster radius 1e-8)
/// that are roots (||t|| <= 1e-10) strictly inside the ball.
inline UniquenessResult uniqueness_probe(const NonlinearProblem& p, double r, int n_starts,
                                         std::uint64_t seed = 42, const StopRule& stop = {}) {
    const Vector& root = require_root(p);
    if (!(r > 0.0))
        throw DomainError("uniqueness_probe: r must be positive");
    if (n_starts < 10)
        throw DomainError("uniqueness_probe: need at least 10 starts");
    UniquenessResult res;
    const HaltonSequence seq(p.dim, seed);
    for (int k = 1; k <= n_starts; ++k) {
        const auto u = seq.point(static_cast<std::uint64_t>(k));
        const Vector x0 = map_to_ball(u, root, r);
        const IterationTrace tr = two_step_newton(p, x0, stop);
        if (tr.termination != Termination::converged) {
            ++res.nonconvergent_starts;
            continue;
        }
        ++res.converged_starts;
        const Vector& z = tr.steps.back().x;
        if (norm2(p.eval(z)) > 1e-10 || !(distance(z, root) < r))
            continue;
        bool seen = false;
        for (const auto& loc : res.locations)
            if (distance(loc, z) <= 1e-8) {
                seen = true;
                break;
            }
        if (!seen)
            res.locations.push_back(z);
    }
    res.distinct_roots_found = static_cast<int>(res.locations.size());
    return res;
}

} // namespace twostep
