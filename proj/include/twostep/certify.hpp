#pragma once

#include <algorithm>
#include <cstdint>

#include "twostep/estimate.hpp"
#include "twostep/radius.hpp"

namespace twostep {

/// Which Lipschitz hypothesis a radius condition rests on.
inline LipschitzKind hypothesis_kind(RadiusCondition c) {
    switch (c) {
    case RadiusCondition::T41:
    case RadiusCondition::T52:
        return LipschitzKind::center;
    default:
        return LipschitzKind::radius;
    }
}

/// A radius backed by a sampled constant: L̂ is estimated on V(x*, probe),
/// the condition is solved for Constant(L̂), and the result is clipped to the
/// probe ball (the estimate says nothing outside it; g is non-decreasing, so
/// the probe radius itself satisfies the condition when it is smaller).
struct EstimatedBall {
    RadiusCondition condition = RadiusCondition::T52;
    ConstantEstimate estimate;
    RadiusCertificate certificate;
    double probe_radius = 0.0;
    double radius = 0.0;
};

inline EstimatedBall certify_with_estimate(const NonlinearProblem& p, RadiusCondition cond,
                                           double probe_radius, std::size_t n_grid,
                                           std::uint64_t seed = 42) {
    EstimatedBall out;
    out.condition = cond;
    out.probe_radius = probe_radius;
    out.estimate = estimate_constant(p, hypothesis_kind(cond), probe_radius, n_grid, seed);
    out.certificate = solve_radius(cond, LAverage::constant(out.estimate.value));
    out.radius = std::min(out.certificate.r, probe_radius);
    return out;
}

} // namespace twostep
