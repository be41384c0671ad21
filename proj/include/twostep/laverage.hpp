#pragma once

// Generalized Lipschitz majorants L(u) and the integral functionals of L that
// the radius conditions and error bounds are built from:
//
//   cumulative(s)    = ∫_0^s L(u) du
//   first_moment(s)  = ∫_0^s u L(u) du
//   phi_{b,a}(f)     = f^{-(a+b)} ∫_0^f u^b L(u) du

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "twostep/errors.hpp"
#include "twostep/quadrature.hpp"

namespace twostep {

/// L(u) = value.
struct ConstantFamily {
    double value;
};

/// L(u) = gamma + slope * u.
struct AffineFamily {
    double gamma;
    double slope;
};

/// L(u) = c a u^{a-1}, 0 < a < 1. Integrable singularity at u = 0.
struct HolderFamily {
    double c;
    double a;
};

/// L(u) = 2 gamma c / (1 - gamma u)^3 on [0, 1/gamma).
struct RationalFamily {
    double gamma;
    double c;
};

/// Piecewise-linear interpolation of samples (u_i, L_i) on [0, u_max].
struct TabulatedFamily {
    std::vector<std::pair<double, double>> samples;
};

class LAverage {
public:
    using Family = std::variant<ConstantFamily, AffineFamily, HolderFamily, RationalFamily,
                                TabulatedFamily>;

    static LAverage constant(double value) {
        if (!(value >= 0.0) || !std::isfinite(value))
            throw DomainError("Constant family: value must be finite and >= 0");
        return LAverage(ConstantFamily{value});
    }

    static LAverage affine(double gamma, double slope) {
        if (!(gamma >= 0.0) || !(slope >= 0.0) || !std::isfinite(gamma) || !std::isfinite(slope))
            throw DomainError("Affine family: gamma and L must be finite and >= 0");
        return LAverage(AffineFamily{gamma, slope});
    }

    static LAverage holder(double c, double a) {
        if (!(c > 0.0) || !std::isfinite(c))
            throw DomainError("Holder family: c must be positive");
        if (!(a > 0.0 && a < 1.0))
            throw DomainError("Holder family: a must lie in (0, 1)");
        return LAverage(HolderFamily{c, a});
    }

    static LAverage rational(double gamma, double c) {
        if (!(gamma > 0.0) || !(c > 0.0) || !std::isfinite(gamma) || !std::isfinite(c))
            throw DomainError("Rational family: gamma and c must be positive");
        return LAverage(RationalFamily{gamma, c});
    }

    static LAverage tabulated(std::vector<std::pair<double, double>> samples) {
        if (samples.size() < 2)
            throw DomainError("Tabulated family: need at least two samples");
        if (samples.front().first != 0.0)
            throw DomainError("Tabulated family: first sample must be at u = 0");
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto [u, l] = samples[i];
            if (!std::isfinite(u) || !std::isfinite(l) || l < 0.0)
                throw DomainError("Tabulated family: values must be finite and >= 0");
            if (i > 0 && !(u > samples[i - 1].first))
                throw DomainError("Tabulated family: u must be strictly increasing");
        }
        return LAverage(TabulatedFamily{std::move(samples)});
    }

    const Family& family() const noexcept { return family_; }

    std::string name() const {
        return std::visit(
            [](const auto& f) -> std::string {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, ConstantFamily>)
                    return "constant";
                else if constexpr (std::is_same_v<T, AffineFamily>)
                    return "affine";
                else if constexpr (std::is_same_v<T, HolderFamily>)
                    return "holder";
                else if constexpr (std::is_same_v<T, RationalFamily>)
                    return "rational";
                else
                    return "tabulated";
            },
            family_);
    }

    /// Supremum of the domain of L: 1/gamma (open) for Rational, u_max
    /// (closed) for Tabulated, +inf otherwise.
    double domain_end() const {
        if (const auto* r = std::get_if<RationalFamily>(&family_))
            return 1.0 / r->gamma;
        if (const auto* t = std::get_if<TabulatedFamily>(&family_))
            return t->samples.back().first;
        return std::numeric_limits<double>::infinity();
    }

    bool in_domain(double u) const {
        if (!(u >= 0.0))
            return false;
        if (std::holds_alternative<RationalFamily>(family_))
            return u < domain_end();
        return u <= domain_end();
    }

private:
    explicit LAverage(Family f) : family_(std::move(f)) {}

    Family family_;
};

namespace detail {

inline void require_domain(const LAverage& fam, double u, const char* what) {
    if (!fam.in_domain(u))
        throw DomainError(std::string(what) + ": argument " + std::to_string(u) +
                          " outside the domain of the " + fam.name() + " family");
}

/// Exact integral of u^k * L over a linear segment for k in {0, 1}.
inline double segment_integral(double u0, double l0, double u1, double l1, int k) {
    const double h = u1 - u0;
    if (k == 0)
        return 0.5 * h * (l0 + l1);
    // u * L(u) is quadratic on the segment: Simpson is exact.
    const double um = 0.5 * (u0 + u1);
    const double lm = 0.5 * (l0 + l1);
    return h / 6.0 * (u0 * l0 + 4.0 * um * lm + u1 * l1);
}

inline double tabulated_integral(const TabulatedFamily& t, double s, int k) {
    double acc = 0.0;
    const auto& xs = t.samples;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const auto [u0, l0] = xs[i - 1];
        const auto [u1, l1] = xs[i];
        if (s <= u0)
            break;
        if (s >= u1) {
            acc += segment_integral(u0, l0, u1, l1, k);
        } else {
            const double ls = l0 + (l1 - l0) * (s - u0) / (u1 - u0);
            acc += segment_integral(u0, l0, s, ls, k);
            break;
        }
    }
    return acc;
}

} // namespace detail

/// Pointwise value of L. Holder is undefined at u = 0 (L -> inf).
inline double eval_L(const LAverage& fam, double u) {
    detail::require_domain(fam, u, "eval_L");
    return std::visit(
        [u](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ConstantFamily>) {
                return f.value;
            } else if constexpr (std::is_same_v<T, AffineFamily>) {
                return f.gamma + f.slope * u;
            } else if constexpr (std::is_same_v<T, HolderFamily>) {
                if (u == 0.0)
                    throw DomainError("eval_L: Holder family is singular at u = 0");
                return f.c * f.a * std::pow(u, f.a - 1.0);
            } else if constexpr (std::is_same_v<T, RationalFamily>) {
                const double w = 1.0 - f.gamma * u;
                return 2.0 * f.gamma * f.c / (w * w * w);
            } else {
                const auto& xs = f.samples;
                auto it = std::lower_bound(xs.begin(), xs.end(), u,
                                           [](const auto& p, double v) { return p.first < v; });
                if (it == xs.begin())
                    return it->second;
                const auto [u1, l1] = *it;
                const auto [u0, l0] = *(it - 1);
                return l0 + (l1 - l0) * (u - u0) / (u1 - u0);
            }
        },
        fam.family());
}

/// ∫_0^s L(u) du. Closed forms for the parametric families; exact
/// trapezoid integration of the interpolant for Tabulated.
inline double cumulative(const LAverage& fam, double s, const QuadratureConfig& = {}) {
    detail::require_domain(fam, s, "cumulative");
    if (s == 0.0)
        return 0.0;
    return std::visit(
        [s](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ConstantFamily>) {
                return f.value * s;
            } else if constexpr (std::is_same_v<T, AffineFamily>) {
                return f.gamma * s + 0.5 * f.slope * s * s;
            } else if constexpr (std::is_same_v<T, HolderFamily>) {
                return f.c * std::pow(s, f.a);
            } else if constexpr (std::is_same_v<T, RationalFamily>) {
                const double w = 1.0 - f.gamma * s;
                return f.c / (w * w) - f.c;
            } else {
                return detail::tabulated_integral(f, s, 0);
            }
        },
        fam.family());
}

/// ∫_0^s u L(u) du.
inline double first_moment(const LAverage& fam, double s, const QuadratureConfig& = {}) {
    detail::require_domain(fam, s, "first_moment");
    if (s == 0.0)
        return 0.0;
    return std::visit(
        [s](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ConstantFamily>) {
                return 0.5 * f.value * s * s;
            } else if constexpr (std::is_same_v<T, AffineFamily>) {
                return 0.5 * f.gamma * s * s + f.slope * s * s * s / 3.0;
            } else if constexpr (std::is_same_v<T, HolderFamily>) {
                return f.c * f.a * std::pow(s, f.a + 1.0) / (f.a + 1.0);
            } else if constexpr (std::is_same_v<T, RationalFamily>) {
                // antiderivative (c/gamma) (1/w - 1)^2 with w = 1 - gamma u
                const double w = 1.0 - f.gamma * s;
                const double q = f.gamma * s / w;
                return f.c / f.gamma * q * q;
            } else {
                return detail::tabulated_integral(f, s, 1);
            }
        },
        fam.family());
}

/// phi_{b,a}(f) = f^{-(a+b)} ∫_0^f u^b L(u) du.
inline double phi(const LAverage& fam, double b, double a, double f, const QuadratureConfig& q = {}) {
    if (!(b >= 0.0))
        throw DomainError("phi: b must be >= 0");
    if (!(a >= 0.0 && a <= 1.0))
        throw DomainError("phi: a must lie in [0, 1]");
    if (!(f > 0.0))
        throw DomainError("phi: f must be positive");
    detail::require_domain(fam, f, "phi");

    double integral = 0.0;
    if (b == 0.0) {
        integral = cumulative(fam, f, q);
    } else if (b == 1.0) {
        integral = first_moment(fam, f, q);
    } else if (const auto* c = std::get_if<ConstantFamily>(&fam.family())) {
        integral = c->value * std::pow(f, b + 1.0) / (b + 1.0);
    } else if (const auto* af = std::get_if<AffineFamily>(&fam.family())) {
        integral = af->gamma * std::pow(f, b + 1.0) / (b + 1.0) +
                   af->slope * std::pow(f, b + 2.0) / (b + 2.0);
    } else if (const auto* h = std::get_if<HolderFamily>(&fam.family())) {
        integral = h->c * h->a * std::pow(f, h->a + b) / (h->a + b);
    } else {
        integral = adaptive_simpson([&](double u) { return std::pow(u, b) * eval_L(fam, u); }, 0.0,
                                    f, q);
    }
    return integral / std::pow(f, a + b);
}

struct MonotonicityResult {
    bool holds = true;
    std::optional<std::pair<double, double>> violation;
};

/// Samples g on n_grid equispaced points of [lo, hi] and reports the first
/// pair with g(u_{i+1}) < g(u_i) - abs_tol.
inline MonotonicityResult check_nondecreasing(const std::function<double(double)>& g, double lo,
                                              double hi, int n_grid, double abs_tol = 1e-12) {
    if (!(lo < hi))
        throw DomainError("check_nondecreasing: need lo < hi");
    if (n_grid < 2)
        throw DomainError("check_nondecreasing: need n_grid >= 2");
    const double h = (hi - lo) / static_cast<double>(n_grid - 1);
    double prev_u = lo;
    double prev = g(lo);
    for (int i = 1; i < n_grid; ++i) {
        const double u = i == n_grid - 1 ? hi : lo + h * i;
        const double v = g(u);
        if (v < prev - abs_tol)
            return {false, std::make_pair(prev_u, u)};
        prev_u = u;
        prev = v;
    }
    return {};
}

/// Two readings of the weak-average hypothesis "L_a is non-decreasing":
/// the bare power f^{1-a} and the weighted form f^{1-a} L(f). Both are
/// checked and reported; neither is preferred.
struct WeakAverageReport {
    double a = 0.0;
    MonotonicityResult plain;     // f^{1-a}
    MonotonicityResult weighted;  // f^{1-a} L(f)
};

inline WeakAverageReport check_weak_average(const LAverage& fam, double a, double lo, double hi,
                                            int n_grid) {
    if (!(a >= 0.0 && a <= 1.0))
        throw DomainError("check_weak_average: a must lie in [0, 1]");
    WeakAverageReport rep;
    rep.a = a;
    rep.plain = check_nondecreasing([a](double f) { return std::pow(f, 1.0 - a); }, lo, hi, n_grid);
    rep.weighted = check_nondecreasing(
        [&fam, a](double f) { return std::pow(f, 1.0 - a) * eval_L(fam, f); }, lo, hi, n_grid);
    return rep;
}

/// Reads a two-column CSV with header `u,L`.
inline LAverage load_tabulated_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("tabulated CSV: empty input");
    auto strip = [](std::string s) {
        s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); }),
                s.end());
        return s;
    };
    if (strip(line) != "u,L")
        throw ParseError("tabulated CSV: header must be 'u,L'");
    std::vector<std::pair<double, double>> samples;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip(line);
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError("tabulated CSV: missing comma on line " + std::to_string(lineno));
        try {
            std::size_t pos = 0;
            const std::string us = line.substr(0, comma);
            const std::string ls = line.substr(comma + 1);
            const double u = std::stod(us, &pos);
            if (pos != us.size())
                throw std::invalid_argument("u");
            const double l = std::stod(ls, &pos);
            if (pos != ls.size())
                throw std::invalid_argument("L");
            samples.emplace_back(u, l);
        } catch (const std::logic_error&) {
            throw ParseError("tabulated CSV: bad number on line " + std::to_string(lineno));
        }
    }
    return LAverage::tabulated(std::move(samples));
}

inline LAverage load_tabulated_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("tabulated CSV: cannot open " + path);
    return load_tabulated_csv(in);
}

} // namespace twostep
