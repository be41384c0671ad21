#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "twostep/twostep.hpp"

namespace {

using namespace twostep;

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_failed = 2;

struct Output {
    std::string format = "json";
    std::string path;
};

void add_output_flags(CLI::App* cmd, Output& out, std::vector<std::string> formats) {
    cmd->add_option("--format", out.format, "Output format")
        ->check(CLI::IsMember(std::move(formats)))
        ->capture_default_str();
    cmd->add_option("--output,-o", out.path, "Write to this file instead of stdout");
}

void emit(const Output& out, const std::string& text) {
    if (out.path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out.path);
    if (!f)
        throw DomainError("cannot open output file '" + out.path + "'");
    f << text;
}

std::string json_line(const Json& j) { return dump_json(j) + "\n"; }

Vector default_or(const std::vector<double>& given, const Vector& fallback, std::size_t dim) {
    if (given.empty())
        return fallback;
    if (given.size() != dim)
        throw DomainError("--x0 has " + std::to_string(given.size()) + " component(s), problem expects " +
                          std::to_string(dim));
    return given;
}

// ---------------------------------------------------------------- radius

struct RadiusArgs {
    std::string condition;
    std::string family;
    double rel_tol = 1e-12;
    Output out;
};

int run_radius(const RadiusArgs& a) {
    const auto cond = radius_condition_from_string(a.condition);
    const auto fam = parse_family(a.family);
    const auto cert = solve_radius(cond, fam, a.rel_tol);
    if (a.out.format == "json") {
        emit(a.out, json_line(to_json(cert)));
    } else {
        std::ostringstream os;
        os << std::setprecision(17) << "condition  " << to_string(cert.condition) << "\nfamily     "
           << describe_family(fam) << "\nr          " << cert.r << "\nresidual   " << cert.residual
           << "\nbracket    [" << cert.bracket.first << ", " << cert.bracket.second
           << "]\nfeasible   " << (cert.feasible ? "true" : "false") << '\n';
        emit(a.out, os.str());
    }
    return cert.feasible ? exit_ok : exit_failed;
}

// ---------------------------------------------------------------- iterate

struct StopArgs {
    StopRule rule;

    void attach(CLI::App* cmd) {
        cmd->add_option("--max-iter", rule.max_iter, "Maximum number of iterations")->capture_default_str();
        cmd->add_option("--x-tol", rule.x_tol, "Step-size tolerance")->capture_default_str();
        cmd->add_option("--f-tol", rule.f_tol, "Residual tolerance")->capture_default_str();
    }
};

struct IterateArgs {
    std::string problem;
    std::vector<double> x0;
    StopArgs stop;
    Output out;
};

int run_iterate(const IterateArgs& a) {
    const auto entry = find_entry(a.problem);
    const Vector x0 = default_or(a.x0, entry.default_x0, entry.problem.dim);
    const auto trace = two_step_newton(entry.problem, x0, a.stop.rule);
    std::ostringstream os;
    if (a.out.format == "json")
        write_trace_jsonl(os, trace);
    else if (a.out.format == "csv")
        write_trace_csv(os, trace);
    else
        write_trace_table(os, trace);
    emit(a.out, os.str());
    return exit_ok;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
    std::string problem;
    std::vector<double> x0;
    std::string theorem;
    std::string family;
    std::string estimate;
    std::optional<double> a;
    double floor = default_floor;
    std::size_t n_grid = 2000;
    std::uint64_t seed = 42;
    StopArgs stop;
    Output out;
};

int run_verify(const VerifyArgs& args) {
    const auto entry = find_entry(args.problem);
    const auto& p = entry.problem;
    const Theorem theorem = args.theorem.empty() ? entry.recommended_theorem : theorem_from_string(args.theorem);
    const Vector x0 = default_or(args.x0, entry.default_x0, p.dim);

    std::optional<ConstantEstimate> est;
    LAverage fam = entry.recommended_family;
    if (!args.family.empty()) {
        fam = parse_family(args.family);
    } else if (!args.estimate.empty()) {
        const auto kind = lipschitz_kind_from_string(args.estimate);
        est = estimate_constant(p, kind, p.ball_radius.value_or(1.0), args.n_grid, args.seed);
        fam = LAverage::constant(est->value);
    }

    const auto v = verify_run(p, fam, theorem, x0, args.stop.rule, args.a, args.floor);
    const auto cert = solve_radius(radius_condition_for(theorem), fam);

    if (args.out.format == "json") {
        Json j;
        j["problem"] = p.name;
        j["theorem"] = to_string(theorem);
        j["family"] = describe_family(fam);
        j["estimate"] = est ? to_json(*est) : Json(nullptr);
        j["certified_radius"] = number_to_json(cert.r);
        j["x0"] = vector_to_json(x0);
        j["termination"] = to_string(v.trace.termination);
        j["q_factors"] = v.q ? to_json(*v.q) : Json(nullptr);
        if (p.name == "wang-osc" && !v.trace.steps.empty()) {
            const auto& s0 = v.trace.steps.front();
            j["oscillatory_constant"] = number_to_json(oscillatory_constant(s0.rho_x, s0.rho_y));
        }
        j["per_step"] = to_json(v.per_step);
        j["global"] = v.global ? to_json(*v.global) : Json(nullptr);
        j["all_hold"] = v.all_hold;
        j["note"] = v.note;
        emit(args.out, json_line(j));
    } else {
        std::ostringstream os;
        os << "problem " << p.name << ", family " << describe_family(fam) << ", certified r = "
           << std::setprecision(10) << cert.r << ", termination " << to_string(v.trace.termination)
           << '\n';
        write_envelope_table(os, v.per_step);
        if (v.global)
            write_envelope_table(os, *v.global);
        if (!v.note.empty())
            os << "note: " << v.note << '\n';
        os << "all_hold: " << (v.all_hold ? "true" : "false") << '\n';
        emit(args.out, os.str());
    }
    return v.all_hold ? exit_ok : exit_failed;
}

// ---------------------------------------------------------------- suite

struct SuiteArgs {
    std::uint64_t seed = 42;
    std::size_t n_grid = 2000;
    int starts = 50;
    Output out;
};

struct SuiteCell {
    Theorem theorem;
    std::string family;
    bool sampled;
    double r;
    bool hypothesis;
    bool all_hold;
    Vector x0;
};

struct SuiteRow {
    std::string name;
    bool audit_ok;
    double audit_err;
    std::vector<SuiteCell> cells;
    double r_unique;
    int roots;
};

// T52 cells use the entry's center-kind family. The radius condition has no
// useful parametric majorant for these problems, so T31/T51 cells use the
// constant sampled on the entry's ball instead.
SuiteRow run_entry(const SuiteEntry& e, const SuiteArgs& a) {
    const auto& p = e.problem;
    const Vector& root = require_root(p);
    const double ball = p.ball_radius.value_or(1.0);
    SuiteRow row;
    row.name = p.name;
    const auto audit = derivative_audit(e, a.seed);
    row.audit_ok = audit.ok;
    row.audit_err = audit.max_rel_err;

    const auto sampled = estimate_constant(p, LipschitzKind::radius, ball, a.n_grid, a.seed);
    const Vector dir = e.default_x0 - root;
    const Vector unit = (1.0 / norm2(dir)) * dir;
    for (Theorem th : {Theorem::T31, Theorem::T51, Theorem::T52}) {
        const auto cond = radius_condition_for(th);
        const bool use_sample = hypothesis_kind(cond) == LipschitzKind::radius;
        const LAverage fam = use_sample ? LAverage::constant(sampled.value) : e.recommended_family;
        const auto cert = solve_radius(cond, fam);
        const double r = std::min(cert.r, ball);
        // auditing on the certified ball rescales the grid, which exposes
        // majorants that only hold at the sampling scale
        const auto hyp = audit_hypothesis(p, fam, hypothesis_kind(cond), r, a.n_grid, a.seed);
        // start half way to the certified boundary, in the direction of the default x0
        const Vector x0 = root + (0.5 * r) * unit;
        const auto v = verify_run(p, fam, th, x0);
        row.cells.push_back({th, describe_family(fam), use_sample, r, hyp.holds(), v.all_hold, x0});
    }
    const auto unique = solve_radius(RadiusCondition::T41, e.recommended_family);
    row.r_unique = std::min(unique.r, ball);
    row.roots = uniqueness_probe(p, row.r_unique, a.starts, a.seed).distinct_roots_found;
    return row;
}

int run_suite(const SuiteArgs& a) {
    std::vector<SuiteRow> rows;
    for (const auto& e : suite())
        rows.push_back(run_entry(e, a));

    // a cell only counts against the exit status when its hypothesis was certified
    bool ok = true;
    for (const auto& row : rows) {
        ok = ok && row.audit_ok && row.roots == 1;
        for (const auto& c : row.cells)
            ok = ok && (!c.hypothesis || c.all_hold);
    }

    std::ostringstream os;
    if (a.out.format == "json") {
        Json j;
        j["seed"] = a.seed;
        j["n_grid"] = a.n_grid;
        Json entries = Json::array();
        for (const auto& row : rows) {
            Json r;
            r["problem"] = row.name;
            r["derivative_audit"] = {{"max_rel_err", number_to_json(row.audit_err)}, {"ok", row.audit_ok}};
            Json cells = Json::array();
            for (const auto& c : row.cells)
                cells.push_back({{"theorem", to_string(c.theorem)},
                                 {"family", c.family},
                                 {"family_source", c.sampled ? "sampled" : "recommended"},
                                 {"r", number_to_json(c.r)},
                                 {"hypothesis_certified", c.hypothesis},
                                 {"x0", vector_to_json(c.x0)},
                                 {"all_hold", c.all_hold}});
            r["theorems"] = std::move(cells);
            r["uniqueness"] = {{"r", number_to_json(row.r_unique)}, {"distinct_roots", row.roots}};
            entries.push_back(std::move(r));
        }
        j["entries"] = std::move(entries);
        j["ok"] = ok;
        os << dump_json(j) << '\n';
    } else {
        os << std::left << std::setw(10) << "problem" << std::setw(7) << "thm" << std::right
           << std::setw(14) << "r" << std::setw(8) << "hyp" << std::setw(10) << "all_hold" << "  family" << '\n';
        for (const auto& row : rows) {
            for (const auto& c : row.cells)
                os << std::left << std::setw(10) << row.name << std::setw(7) << to_string(c.theorem)
                   << std::right << std::setw(14) << std::setprecision(8) << c.r << std::setw(8)
                   << (c.hypothesis ? "yes" : "no") << std::setw(10) << (c.all_hold ? "yes" : "NO")
                   << "  " << c.family << (c.sampled ? " (sampled)" : "") << '\n';
            os << std::left << std::setw(10) << row.name << std::setw(7) << "T41" << std::right
               << std::setw(14) << row.r_unique << "   roots found: " << row.roots << '\n';
        }
        os << "ok: " << (ok ? "true" : "false") << '\n';
    }
    emit(a.out, os.str());
    return ok ? exit_ok : exit_failed;
}

// ---------------------------------------------------------------- estimate-l

struct EstimateArgs {
    std::string problem;
    std::string kind = "center";
    std::optional<double> r;
    std::size_t n_grid = 10000;
    std::uint64_t seed = 42;
    Output out;
};

int run_estimate(const EstimateArgs& a) {
    const auto entry = find_entry(a.problem);
    const double r = a.r.value_or(entry.problem.ball_radius.value_or(1.0));
    const auto est =
        estimate_constant(entry.problem, lipschitz_kind_from_string(a.kind), r, a.n_grid, a.seed);
    if (a.out.format == "json") {
        emit(a.out, json_line(to_json(est)));
    } else {
        std::ostringstream os;
        os << std::setprecision(17) << "kind       " << to_string(est.kind) << "\nvalue      "
           << est.value << "\ngrid_size  " << est.grid_size << "\nwitness x  " << est.witness.x.front()
           << "\nwitness y  " << est.witness.y.front() << "\ntau        " << est.witness.tau << '\n';
        emit(a.out, os.str());
    }
    return exit_ok;
}

// ---------------------------------------------------------------- cross-validate

struct CrossArgs {
    std::string constant = "1";
    std::string affine = "0,1";
    std::string holder = "1,0.5";
    std::string rational = "1,1";
    double rel_tol = 1e-12;
    Output out;
};

LAverage family_for(ClosedFormId id, const CrossArgs& a) {
    switch (id) {
    case ClosedFormId::C_const_radius:
    case ClosedFormId::C_const_center:
        return parse_family("constant:" + a.constant);
    case ClosedFormId::C_affine_radius:
    case ClosedFormId::C_affine_center:
        return parse_family("affine:" + a.affine);
    case ClosedFormId::C_holder_T51b:
    case ClosedFormId::C_holder_T52:
        return parse_family("holder:" + a.holder);
    case ClosedFormId::C_rational_T52:
        return parse_family("rational:" + a.rational);
    }
    throw DomainError("unknown closed form");
}

int run_cross(const CrossArgs& a) {
    std::vector<std::pair<CrossValidation, std::string>> rows;
    for (auto id : all_closed_forms) {
        const auto fam = family_for(id, a);
        rows.emplace_back(cross_validate(id, fam, a.rel_tol), describe_family(fam));
    }
    std::ostringstream os;
    if (a.out.format == "json") {
        Json arr = Json::array();
        for (const auto& [cv, fam] : rows) {
            Json j = to_json(cv);
            j["family"] = fam;
            arr.push_back(std::move(j));
        }
        os << dump_json(arr) << '\n';
    } else {
        os << std::left << std::setw(17) << "id" << std::setw(6) << "cond" << std::right
           << std::setw(20) << "closed" << std::setw(20) << "numeric" << std::setw(14) << "rel_gap"
           << std::setw(7) << "agree" << '\n';
        for (const auto& [cv, fam] : rows) {
            os << std::left << std::setw(17) << to_string(cv.id) << std::setw(6) << to_string(cv.parent)
               << std::right << std::setprecision(12) << std::setw(20) << cv.closed << std::setw(20)
               << cv.numeric << std::setprecision(4) << std::setw(14) << cv.rel_gap << std::setw(7)
               << (cv.agree ? "yes" : "NO") << '\n';
            if (!cv.note.empty())
                os << "    " << cv.note << '\n';
        }
    }
    emit(a.out, os.str());
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Convergence-ball certification for the two-step third-order Newton method"};
    app.require_subcommand(1);

    RadiusArgs radius;
    auto* c_radius = app.add_subcommand("radius", "Solve a radius condition for an L-average family");
    c_radius->add_option("--condition", radius.condition, "T31, T41, T51a, T51b or T52")->required();
    c_radius->add_option("--family", radius.family, "Family spec, e.g. constant:1")->required();
    c_radius->add_option("--rel-tol", radius.rel_tol, "Bisection tolerance")->capture_default_str();
    add_output_flags(c_radius, radius.out, {"json", "table"});

    IterateArgs iterate;
    auto* c_iter = app.add_subcommand("iterate", "Run the two-step scheme on a suite problem");
    c_iter->add_option("--problem", iterate.problem, "Suite problem name")->required();
    c_iter->add_option("--x0", iterate.x0, "Starting point (comma separated)")->delimiter(',');
    iterate.stop.attach(c_iter);
    add_output_flags(c_iter, iterate.out, {"json", "csv", "table"});

    VerifyArgs verify;
    auto* c_verify = app.add_subcommand("verify", "Check a run against its error envelopes");
    c_verify->add_option("--problem", verify.problem, "Suite problem name")->required();
    c_verify->add_option("--x0", verify.x0, "Starting point (comma separated)")->delimiter(',');
    c_verify->add_option("--theorem", verify.theorem, "T31, T51 or T52 (default: the entry's)");
    auto* o_family = c_verify->add_option("--family", verify.family, "Family spec (default: the entry's)");
    auto* o_est = c_verify->add_option("--estimate", verify.estimate,
                                       "Use a sampled constant of this kind (center or radius)");
    o_family->excludes(o_est);
    c_verify->add_option("--a", verify.a, "Exponent a for the sharpened T51/T52 envelope");
    c_verify->add_option("--floor", verify.floor, "Errors below this are not compared")->capture_default_str();
    c_verify->add_option("--n-grid", verify.n_grid, "Samples for --estimate")->capture_default_str();
    c_verify->add_option("--seed", verify.seed, "Sampling seed")->capture_default_str();
    verify.stop.attach(c_verify);
    add_output_flags(c_verify, verify.out, {"json", "table"});

    SuiteArgs suite_args;
    auto* c_suite = app.add_subcommand("suite", "Run every built-in problem end to end");
    c_suite->add_option("--seed", suite_args.seed, "Sampling seed")->capture_default_str();
    c_suite->add_option("--n-grid", suite_args.n_grid, "Samples for hypothesis audits")->capture_default_str();
    c_suite->add_option("--starts", suite_args.starts, "Starts for the uniqueness probe")
        ->check(CLI::Range(10, 100000))
        ->capture_default_str();
    add_output_flags(c_suite, suite_args.out, {"json", "table"});

    EstimateArgs est;
    auto* c_est = app.add_subcommand("estimate-l", "Estimate a Lipschitz constant by sampling");
    c_est->add_option("--problem", est.problem, "Suite problem name")->required();
    c_est->add_option("--kind", est.kind, "center or radius")->capture_default_str();
    c_est->add_option("--r", est.r, "Ball radius (default: the entry's)");
    c_est->add_option("--n-grid", est.n_grid, "Number of samples")->capture_default_str();
    c_est->add_option("--seed", est.seed, "Sampling seed")->capture_default_str();
    add_output_flags(c_est, est.out, {"json", "table"});

    CrossArgs cross;
    auto* c_cross = app.add_subcommand("cross-validate", "Compare closed-form radii with numeric roots");
    c_cross->add_option("--constant", cross.constant, "L")->capture_default_str();
    c_cross->add_option("--affine", cross.affine, "GAMMA,L")->capture_default_str();
    c_cross->add_option("--holder", cross.holder, "C,A")->capture_default_str();
    c_cross->add_option("--rational", cross.rational, "GAMMA,C")->capture_default_str();
    c_cross->add_option("--rel-tol", cross.rel_tol, "Bisection tolerance")->capture_default_str();
    add_output_flags(c_cross, cross.out, {"json", "table"});

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (c_radius->parsed())
            return run_radius(radius);
        if (c_iter->parsed())
            return run_iterate(iterate);
        if (c_verify->parsed())
            return run_verify(verify);
        if (c_suite->parsed())
            return run_suite(suite_args);
        if (c_est->parsed())
            return run_estimate(est);
        if (c_cross->parsed())
            return run_cross(cross);
    } catch (const twostep::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    }
    return exit_usage;
}
