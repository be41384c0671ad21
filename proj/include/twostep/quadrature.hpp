#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "twostep/errors.hpp"

namespace twostep {

struct QuadratureConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    int max_subdivisions = 10'000;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
            throw DomainError("QuadratureConfig: tolerances must be positive");
        if (max_subdivisions < 1)
            throw DomainError("QuadratureConfig: max_subdivisions must be >= 1");
    }
};

/// Adaptive Simpson with interval halving and Richardson correction.
///
/// The tolerance budget max(abs_tol, rel_tol * |coarse estimate|) is split in
/// half at each level. Throws QuadratureError when more than max_subdivisions
/// panels would be needed.
template <class F>
double adaptive_simpson(F&& f, double a, double b, const QuadratureConfig& cfg = {}) {
    cfg.validate();
    if (a == b)
        return 0.0;
    if (!std::isfinite(a) || !std::isfinite(b))
        throw DomainError("adaptive_simpson: non-finite interval");

    struct Panel {
        double a, b, fa, fm, fb, whole, eps;
        int depth;
    };
    const auto simpson = [](double a_, double b_, double fa, double fm, double fb) {
        return (b_ - a_) / 6.0 * (fa + 4.0 * fm + fb);
    };

    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = simpson(a, b, fa, fm, fb);
    if (!std::isfinite(whole))
        throw QuadratureError("adaptive_simpson: non-finite integrand");
    const double eps0 = std::max(cfg.abs_tol, cfg.rel_tol * std::abs(whole));

    double total = 0.0;
    int subdivisions = 0;
    std::vector<Panel> stack{{a, b, fa, fm, fb, whole, eps0, 0}};
    while (!stack.empty()) {
        const Panel p = stack.back();
        stack.pop_back();
        const double m = 0.5 * (p.a + p.b);
        const double lm = f(0.5 * (p.a + m));
        const double rm = f(0.5 * (m + p.b));
        const double left = simpson(p.a, m, p.fa, lm, p.fm);
        const double right = simpson(m, p.b, p.fm, rm, p.fb);
        const double delta = left + right - p.whole;
        if (!std::isfinite(delta))
            throw QuadratureError("adaptive_simpson: non-finite integrand");
        // Depth floor: a coarse panel can agree with itself by accident.
        const bool converged = p.depth >= 2 && std::abs(delta) <= 15.0 * p.eps;
        if (converged || m == p.a || m == p.b) {
            total += left + right + delta / 15.0;
            continue;
        }
        if (++subdivisions > cfg.max_subdivisions)
            throw QuadratureError("adaptive_simpson: tolerance not met within " +
                                  std::to_string(cfg.max_subdivisions) + " subdivisions");
        stack.push_back({m, p.b, p.fm, rm, p.fb, right, 0.5 * p.eps, p.depth + 1});
        stack.push_back({p.a, m, p.fa, lm, p.fm, left, 0.5 * p.eps, p.depth + 1});
    }
    return total;
}

} // namespace twostep
