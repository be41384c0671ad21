#pragma once

// Deterministic quasi-random points: a Halton sequence with a seeded
// Cranley-Patterson shift. Prefixes are nested, so refining a sample from N/2
// to N points never drops a point.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "twostep/errors.hpp"
#include "twostep/linalg.hpp"

namespace twostep {

class HaltonSequence {
public:
    HaltonSequence(std::size_t dims, std::uint64_t seed) : dims_(dims), shift_(dims) {
        if (dims == 0 || dims > primes().size())
            throw DomainError("HaltonSequence: unsupported dimension " + std::to_string(dims));
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (double& s : shift_)
            s = unit(rng);
    }

    std::size_t dims() const noexcept { return dims_; }

    /// Point with 1-based index `index`, components in [0, 1).
    std::vector<double> point(std::uint64_t index) const {
        std::vector<double> out(dims_);
        for (std::size_t d = 0; d < dims_; ++d) {
            const double v = radical_inverse(index, primes()[d]) + shift_[d];
            out[d] = v - std::floor(v);
        }
        return out;
    }

private:
    static double radical_inverse(std::uint64_t i, unsigned base) {
        double f = 1.0;
        double r = 0.0;
        while (i > 0) {
            f /= base;
            r += f * static_cast<double>(i % base);
            i /= base;
        }
        return r;
    }

    static const std::array<unsigned, 110>& primes() {
        static const std::array<unsigned, 110> p = [] {
            std::array<unsigned, 110> out{};
            unsigned found = 0;
            for (unsigned c = 2; found < out.size(); ++c) {
                bool prime = true;
                for (unsigned k = 2; k * k <= c; ++k)
                    if (c % k == 0) {
                        prime = false;
                        break;
                    }
                if (prime)
                    out[found++] = c;
            }
            return out;
        }();
        return p;
    }

    std::size_t dims_;
    std::vector<double> shift_;
};

/// Maps unit-cube coordinates onto the open ball V(center, radius): the cube
/// [-1, 1]^n is sent radially onto the ball so that ||.||_inf becomes the
/// Euclidean radius fraction.
inline Vector map_to_ball(std::span<const double> unit, const Vector& center, double radius) {
    const std::size_t n = center.size();
    Vector v(n);
    double inf_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = 2.0 * unit[i] - 1.0;
        inf_norm = std::max(inf_norm, std::abs(v[i]));
    }
    const double e_norm = norm2(v);
    Vector out = center;
    if (e_norm == 0.0)
        return out;
    const double scale = radius * (1.0 - 1e-9) * inf_norm / e_norm;
    for (std::size_t i = 0; i < n; ++i)
        out[i] += scale * v[i];
    return out;
}

} // namespace twostep
