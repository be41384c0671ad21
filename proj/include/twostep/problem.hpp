#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>

#include "twostep/errors.hpp"
#include "twostep/linalg.hpp"

namespace twostep {

/// A map t: R^n -> R^n with (optionally) an analytic Jacobian and a known root.
struct NonlinearProblem {
    std::string name;
    std::size_t dim = 1;
    std::function<Vector(const Vector&)> eval;
    /// Empty means "use central differences".
    std::function<Matrix(const Vector&)> jacobian;
    std::optional<Vector> root;
    std::optional<double> ball_radius;

    bool has_analytic_jacobian() const { return static_cast<bool>(jacobian); }
};

/// Central differences with step h_j = max(1e-7, 1e-7 |x_j|).
inline Matrix jacobian_fd(const NonlinearProblem& p, const Vector& x) {
    const std::size_t n = p.dim;
    if (x.size() != n)
        throw DomainError("jacobian_fd: dimension mismatch");
    Matrix jac(n, n);
    Vector xp = x;
    Vector xm = x;
    for (std::size_t j = 0; j < n; ++j) {
        const double h = std::max(1e-7, 1e-7 * std::abs(x[j]));
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        const Vector fp = p.eval(xp);
        const Vector fm = p.eval(xm);
        for (std::size_t i = 0; i < n; ++i)
            jac(i, j) = (fp[i] - fm[i]) / (2.0 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return jac;
}

inline Matrix jacobian_at(const NonlinearProblem& p, const Vector& x) {
    return p.has_analytic_jacobian() ? p.jacobian(x) : jacobian_fd(p, x);
}

inline const Vector& require_root(const NonlinearProblem& p) {
    if (!p.root)
        throw MissingRoot("problem '" + p.name + "' has no known root");
    return *p.root;
}

} // namespace twostep
