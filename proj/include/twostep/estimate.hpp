#pragma once

// Sampled estimates of the smallest constant for which a problem satisfies
// the radius or center Lipschitz condition around its root, and the
// analogous audit against a full majorant family.

#include <cstdint>
#include <string>

#include "twostep/errors.hpp"
#include "twostep/laverage.hpp"
#include "twostep/linalg.hpp"
#include "twostep/problem.hpp"
#include "twostep/sampling.hpp"

namespace twostep {

enum class LipschitzKind { radius, center };

inline std::string to_string(LipschitzKind k) {
    return k == LipschitzKind::radius ? "radius" : "center";
}

inline LipschitzKind lipschitz_kind_from_string(const std::string& s) {
    if (s == "radius")
        return LipschitzKind::radius;
    if (s == "center")
        return LipschitzKind::center;
    throw ParseError("unknown Lipschitz kind '" + s + "'");
}

/// tau is sampled from [0, 1 - tau_margin]; the radius bound is vacuous at tau = 1.
inline constexpr double tau_margin = 1e-3;
inline constexpr double min_denominator = 1e-14;

struct LipschitzWitness {
    Vector x;
    Vector y;
    double tau = 0.0;
};

struct ConstantEstimate {
    LipschitzKind kind = LipschitzKind::center;
    double value = 0.0;
    LipschitzWitness witness;
    std::size_t grid_size = 0;
};

namespace detail {

inline Matrix inverse(const Matrix& a) {
    const LuDecomposition lu(a);
    const std::size_t n = a.rows();
    Matrix inv(n, n);
    Vector e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        const Vector col = lu.solve(e);
        for (std::size_t i = 0; i < n; ++i)
            inv(i, j) = col[i];
        e[j] = 0.0;
    }
    return inv;
}

inline Matrix inverse_jacobian_at_root(const NonlinearProblem& p) {
    const Vector& root = require_root(p);
    try {
        return inverse(jacobian_at(p, root));
    } catch (const SingularMatrix&) {
        throw SingularJacobian("Jacobian at the root of '" + p.name + "' is singular");
    }
}

/// Calls visit(x, y, tau, ||J*^{-1}(J(x) - J(y^tau))||, rho_x, rho_y) for
/// n_grid quasi-random samples. For the center kind y = x* and tau = 0.
template <class Visit>
void sample_lipschitz(const NonlinearProblem& p, LipschitzKind kind, double r, std::size_t n_grid,
                      std::uint64_t seed, Visit&& visit) {
    if (!(r > 0.0))
        throw DomainError("Lipschitz sampling: radius must be positive");
    if (n_grid == 0)
        throw DomainError("Lipschitz sampling: n_grid must be positive");
    const Vector& root = require_root(p);
    const Matrix jinv = inverse_jacobian_at_root(p);
    const std::size_t d = p.dim;
    const Matrix jroot = jacobian_at(p, root);

    const std::size_t dims = kind == LipschitzKind::center ? d : 2 * d + 1;
    const HaltonSequence seq(dims, seed);
    for (std::size_t k = 1; k <= n_grid; ++k) {
        const auto u = seq.point(k);
        const std::span<const double> us(u);
        const Vector x = map_to_ball(us.subspan(0, d), root, r);
        const double rho_x = distance(x, root);
        if (kind == LipschitzKind::center) {
            const double num = operator_norm(jinv * (jacobian_at(p, x) - jroot));
            visit(x, root, 0.0, num, rho_x, 0.0);
        } else {
            const Vector y = map_to_ball(us.subspan(d, d), root, r);
            const double tau = u[2 * d] * (1.0 - tau_margin);
            const Vector ytau = root + tau * (y - root);
            const double num = operator_norm(jinv * (jacobian_at(p, x) - jacobian_at(p, ytau)));
            visit(x, y, tau, num, rho_x, distance(y, root));
        }
    }
}

} // namespace detail

/// Smallest constant L̂ consistent with the sampled points:
///   center: sup ||J*^{-1}(J(x) - J(x*))|| / (2 ||x - x*||)
///   radius: sup ||J*^{-1}(J(x) - J(y^tau))|| / ((1 - tau)(||x - x*|| + ||y - x*||))
/// over n_grid quasi-random points of V(x*, r).
inline ConstantEstimate estimate_constant(const NonlinearProblem& p, LipschitzKind kind, double r,
                                          std::size_t n_grid, std::uint64_t seed = 42) {
    ConstantEstimate est;
    est.kind = kind;
    est.grid_size = n_grid;
    bool any = false;
    detail::sample_lipschitz(
        p, kind, r, n_grid, seed,
        [&](const Vector& x, const Vector& y, double tau, double num, double rx, double ry) {
            const double den =
                kind == LipschitzKind::center ? 2.0 * rx : (1.0 - tau) * (rx + ry);
            if (den < min_denominator)
                return;
            const double ratio = num / den;
            if (!any || ratio > est.value) {
                est.value = ratio;
                est.witness = {x, y, tau};
            }
            any = true;
        });
    if (!any)
        throw DegenerateGrid("estimate_constant: all denominators below 1e-14");
    return est;
}

/// Largest sampled ratio of the Lipschitz left-hand side to the family's
/// right-hand side (∫_0^{2ρ(x)} L for center, ∫_{τs}^{s} L for radius).
/// The hypothesis is consistent with the samples iff the ratio is <= 1.
struct HypothesisAudit {
    LipschitzKind kind = LipschitzKind::center;
    double max_ratio = 0.0;
    LipschitzWitness witness;
    std::size_t grid_size = 0;

    bool holds(double rel_slack = 1e-6) const { return max_ratio <= 1.0 + rel_slack; }
};

inline HypothesisAudit audit_hypothesis(const NonlinearProblem& p, const LAverage& fam,
                                        LipschitzKind kind, double r, std::size_t n_grid,
                                        std::uint64_t seed = 42) {
    HypothesisAudit audit;
    audit.kind = kind;
    audit.grid_size = n_grid;
    bool any = false;
    detail::sample_lipschitz(
        p, kind, r, n_grid, seed,
        [&](const Vector& x, const Vector& y, double tau, double num, double rx, double ry) {
            double bound = 0.0;
            if (kind == LipschitzKind::center) {
                if (!fam.in_domain(2.0 * rx))
                    return;
                bound = cumulative(fam, 2.0 * rx);
            } else {
                const double s = rx + ry;
                if (!fam.in_domain(s))
                    return;
                bound = cumulative(fam, s) - cumulative(fam, tau * s);
            }
            if (bound < min_denominator) {
                if (num < min_denominator)
                    return;
                bound = min_denominator;
            }
            const double ratio = num / bound;
            if (!any || ratio > audit.max_ratio) {
                audit.max_ratio = ratio;
                audit.witness = {x, y, tau};
            }
            any = true;
        });
    if (!any)
        throw DegenerateGrid("audit_hypothesis: no usable samples");
    return audit;
}

} // namespace twostep
