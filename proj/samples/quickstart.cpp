// Certify a ball for the oscillatory suite problem, run the scheme from
// inside it, and print the per-step comparison.

#include <iostream>

#include "twostep/twostep.hpp"

int main() {
    using namespace twostep;

    const auto entry = find_entry("wang-osc");
    const auto family = LAverage::constant(1.0);

    const auto cert = solve_radius(RadiusCondition::T52, family);
    std::cout << "certified radius: " << cert.r << "\n";

    const auto run = verify_run(entry.problem, family, Theorem::T52, Vector{0.15});
    write_envelope_table(std::cout, run.per_step);
    if (run.global)
        write_envelope_table(std::cout, *run.global);

    const auto order = estimate_order(run.trace);
    std::cout << "observed order: " << order.order << "\n";
    return run.all_hold ? 0 : 1;
}
