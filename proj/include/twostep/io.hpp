#pragma once

// Text formats: JSON for every report type (fixed field order, doubles with
// 17 significant digits, NaN as null, infinities as "inf"/"-inf"), JSON
// lines and CSV for traces, aligned text tables, and the family mini-grammar
// constant:L | affine:GAMMA,L | holder:C,A | rational:GAMMA,C | tabulated:PATH.

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "twostep/errors.hpp"
#include "twostep/estimate.hpp"
#include "twostep/iterate.hpp"
#include "twostep/laverage.hpp"
#include "twostep/radius.hpp"
#include "twostep/verify.hpp"

namespace twostep {

using Json = nlohmann::ordered_json;

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void write_json(std::ostream& os, const Json& j) {
    switch (j.type()) {
    case Json::value_t::object: {
        os << '{';
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first)
                os << ',';
            first = false;
            os << Json(it.key()).dump() << ':';
            write_json(os, it.value());
        }
        os << '}';
        break;
    }
    case Json::value_t::array: {
        os << '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i)
                os << ',';
            write_json(os, j[i]);
        }
        os << ']';
        break;
    }
    case Json::value_t::number_float:
        os << format_double(j.get<double>());
        break;
    default:
        os << j.dump();
    }
}

} // namespace detail

/// Deterministic compact serialization.
inline std::string dump_json(const Json& j) {
    std::ostringstream os;
    detail::write_json(os, j);
    return os.str();
}

inline Json number_to_json(double v) {
    if (std::isnan(v))
        return nullptr;
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    return v;
}

inline double number_from_json(const Json& j) {
    if (j.is_null())
        return std::numeric_limits<double>::quiet_NaN();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf")
            return std::numeric_limits<double>::infinity();
        if (s == "-inf")
            return -std::numeric_limits<double>::infinity();
        throw ParseError("expected a number, got string '" + s + "'");
    }
    if (!j.is_number())
        throw ParseError("expected a number");
    return j.get<double>();
}

inline Json vector_to_json(const Vector& v) {
    Json arr = Json::array();
    for (double x : v)
        arr.push_back(number_to_json(x));
    return arr;
}

inline Vector vector_from_json(const Json& j) {
    Vector v;
    for (const auto& x : j)
        v.push_back(number_from_json(x));
    return v;
}

template <class F>
auto parse_guard(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed JSON report: ") + e.what());
    }
}

// ---------------------------------------------------------------- radius

inline Json to_json(const RadiusCertificate& c) {
    Json j;
    j["condition"] = to_string(c.condition);
    j["r"] = number_to_json(c.r);
    j["residual"] = number_to_json(c.residual);
    j["feasible"] = c.feasible;
    j["bracket"] = Json::array({number_to_json(c.bracket.first), number_to_json(c.bracket.second)});
    return j;
}

inline RadiusCertificate certificate_from_json(const Json& j) {
    return parse_guard([&] {
        RadiusCertificate c;
        c.condition = radius_condition_from_string(j.at("condition").get<std::string>());
        c.r = number_from_json(j.at("r"));
        c.residual = number_from_json(j.at("residual"));
        c.feasible = j.at("feasible").get<bool>();
        c.bracket = {number_from_json(j.at("bracket").at(0)), number_from_json(j.at("bracket").at(1))};
        return c;
    });
}

inline Json to_json(const CrossValidation& c) {
    Json j;
    j["id"] = to_string(c.id);
    j["parent"] = to_string(c.parent);
    j["closed"] = number_to_json(c.closed);
    j["numeric"] = number_to_json(c.numeric);
    j["agree"] = c.agree;
    j["rel_gap"] = number_to_json(c.rel_gap);
    j["note"] = c.note;
    return j;
}

inline CrossValidation cross_validation_from_json(const Json& j) {
    return parse_guard([&] {
        CrossValidation c;
        c.id = closed_form_from_string(j.at("id").get<std::string>());
        c.parent = radius_condition_from_string(j.at("parent").get<std::string>());
        c.closed = number_from_json(j.at("closed"));
        c.numeric = number_from_json(j.at("numeric"));
        c.agree = j.at("agree").get<bool>();
        c.rel_gap = number_from_json(j.at("rel_gap"));
        c.note = j.at("note").get<std::string>();
        return c;
    });
}

// ---------------------------------------------------------------- estimate

inline Json to_json(const ConstantEstimate& e) {
    Json j;
    j["kind"] = to_string(e.kind);
    j["value"] = number_to_json(e.value);
    j["argmax_witness"] = {{"x", vector_to_json(e.witness.x)},
                           {"y", vector_to_json(e.witness.y)},
                           {"tau", number_to_json(e.witness.tau)}};
    j["grid_size"] = e.grid_size;
    return j;
}

inline ConstantEstimate estimate_from_json(const Json& j) {
    return parse_guard([&] {
        ConstantEstimate e;
        e.kind = lipschitz_kind_from_string(j.at("kind").get<std::string>());
        e.value = number_from_json(j.at("value"));
        const auto& w = j.at("argmax_witness");
        e.witness = {vector_from_json(w.at("x")), vector_from_json(w.at("y")),
                     number_from_json(w.at("tau"))};
        e.grid_size = j.at("grid_size").get<std::size_t>();
        return e;
    });
}

// ---------------------------------------------------------------- trace

inline Json to_json(const TraceStep& s) {
    Json j;
    j["n"] = s.n;
    j["x"] = vector_to_json(s.x);
    j["y"] = vector_to_json(s.y);
    j["rho_x"] = number_to_json(s.rho_x);
    j["rho_y"] = number_to_json(s.rho_y);
    j["f_norm_x"] = number_to_json(s.f_norm_x);
    j["f_norm_y"] = number_to_json(s.f_norm_y);
    j["y_valid"] = s.y_valid;
    return j;
}

inline TraceStep step_from_json(const Json& j) {
    return parse_guard([&] {
        TraceStep s;
        s.n = j.at("n").get<int>();
        s.x = vector_from_json(j.at("x"));
        s.y = vector_from_json(j.at("y"));
        s.rho_x = number_from_json(j.at("rho_x"));
        s.rho_y = number_from_json(j.at("rho_y"));
        s.f_norm_x = number_from_json(j.at("f_norm_x"));
        s.f_norm_y = number_from_json(j.at("f_norm_y"));
        s.y_valid = j.at("y_valid").get<bool>();
        return s;
    });
}

/// One JSON object per step, then a closing {"problem", "termination"} line.
inline void write_trace_jsonl(std::ostream& os, const IterationTrace& t) {
    for (const auto& s : t.steps)
        os << dump_json(to_json(s)) << '\n';
    Json tail;
    tail["problem"] = t.problem;
    tail["termination"] = to_string(t.termination);
    os << dump_json(tail) << '\n';
}

inline IterationTrace read_trace_jsonl(std::istream& in) {
    IterationTrace t;
    std::string line;
    bool closed = false;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        if (closed)
            throw ParseError("trace JSONL: data after the termination line");
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::exception& e) {
            throw ParseError(std::string("trace JSONL: ") + e.what());
        }
        if (j.contains("termination")) {
            t.problem = parse_guard([&] { return j.at("problem").get<std::string>(); });
            t.termination = termination_from_string(
                parse_guard([&] { return j.at("termination").get<std::string>(); }));
            closed = true;
        } else {
            t.steps.push_back(step_from_json(j));
        }
    }
    if (!closed)
        throw ParseError("trace JSONL: missing termination line");
    return t;
}

namespace detail {

inline std::string csv_vector(const Vector& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            out += ';';
        out += format_double(v[i]);
    }
    return out;
}

} // namespace detail

/// Columns n,x,y,rho_x,rho_y,f_norm; vector components are ';'-separated.
inline void write_trace_csv(std::ostream& os, const IterationTrace& t) {
    os << "n,x,y,rho_x,rho_y,f_norm\n";
    for (const auto& s : t.steps)
        os << s.n << ',' << detail::csv_vector(s.x) << ',' << detail::csv_vector(s.y) << ','
           << format_double(s.rho_x) << ',' << format_double(s.rho_y) << ','
           << format_double(s.f_norm_x) << '\n';
}

inline void write_trace_table(std::ostream& os, const IterationTrace& t) {
    os << "problem: " << t.problem << "  termination: " << to_string(t.termination) << '\n';
    os << std::setw(4) << "n" << std::setw(26) << "x[0]" << std::setw(14) << "rho_x"
       << std::setw(14) << "rho_y" << std::setw(14) << "f_norm" << '\n';
    for (const auto& s : t.steps) {
        os << std::setw(4) << s.n << std::setw(26) << std::setprecision(17) << s.x.front()
           << std::setprecision(6) << std::setw(14) << s.rho_x << std::setw(14) << s.rho_y
           << std::setw(14) << s.f_norm_x << '\n';
    }
}

// ---------------------------------------------------------------- verify

inline Json to_json(const QFactors& q) {
    Json j;
    j["theorem"] = to_string(q.theorem);
    j["q1"] = number_to_json(q.q1);
    j["q2"] = number_to_json(q.q2);
    j["C"] = number_to_json(q.C);
    j["a"] = q.a ? number_to_json(*q.a) : Json(nullptr);
    j["Q1"] = q.Q1 ? number_to_json(*q.Q1) : Json(nullptr);
    j["Q2"] = q.Q2 ? number_to_json(*q.Q2) : Json(nullptr);
    j["rho_x0"] = number_to_json(q.rho_x0);
    j["rho_y0"] = number_to_json(q.rho_y0);
    j["valid"] = q.valid();
    return j;
}

inline QFactors qfactors_from_json(const Json& j) {
    return parse_guard([&] {
        QFactors q;
        q.theorem = theorem_from_string(j.at("theorem").get<std::string>());
        q.q1 = number_from_json(j.at("q1"));
        q.q2 = number_from_json(j.at("q2"));
        q.C = number_from_json(j.at("C"));
        if (!j.at("a").is_null())
            q.a = number_from_json(j.at("a"));
        if (!j.at("Q1").is_null())
            q.Q1 = number_from_json(j.at("Q1"));
        if (!j.at("Q2").is_null())
            q.Q2 = number_from_json(j.at("Q2"));
        q.rho_x0 = number_from_json(j.at("rho_x0"));
        q.rho_y0 = number_from_json(j.at("rho_y0"));
        return q;
    });
}

inline Json to_json(const EnvelopeRecord& r) {
    Json j;
    j["n"] = r.n;
    j["observed"] = number_to_json(r.observed);
    j["observed_y"] = number_to_json(r.observed_y);
    j["observed_x_next"] = number_to_json(r.observed_x_next);
    j["bound_y"] = number_to_json(r.bound_y);
    j["bound_x"] = number_to_json(r.bound_x);
    j["global_bound"] = number_to_json(r.global_bound);
    j["qbound_y"] = number_to_json(r.qbound_y);
    j["qbound_x"] = number_to_json(r.qbound_x);
    j["holds"] = r.holds;
    j["chain_ok"] = r.chain_ok;
    j["slack"] = number_to_json(r.slack);
    return j;
}

inline EnvelopeRecord record_from_json(const Json& j) {
    EnvelopeRecord r;
    r.n = j.at("n").get<int>();
    r.observed = number_from_json(j.at("observed"));
    r.observed_y = number_from_json(j.at("observed_y"));
    r.observed_x_next = number_from_json(j.at("observed_x_next"));
    r.bound_y = number_from_json(j.at("bound_y"));
    r.bound_x = number_from_json(j.at("bound_x"));
    r.global_bound = number_from_json(j.at("global_bound"));
    r.qbound_y = number_from_json(j.at("qbound_y"));
    r.qbound_x = number_from_json(j.at("qbound_x"));
    r.holds = j.at("holds").get<bool>();
    r.chain_ok = j.at("chain_ok").get<bool>();
    r.slack = number_from_json(j.at("slack"));
    return r;
}

inline Json to_json(const EnvelopeReport& rep) {
    Json j;
    j["theorem"] = to_string(rep.theorem);
    j["kind"] = rep.kind;
    j["form"] = rep.form;
    j["floor"] = number_to_json(rep.floor);
    j["all_hold"] = rep.all_hold;
    j["chain_ok"] = rep.chain_ok;
    Json recs = Json::array();
    for (const auto& r : rep.records)
        recs.push_back(to_json(r));
    j["records"] = std::move(recs);
    return j;
}

inline EnvelopeReport envelope_from_json(const Json& j) {
    return parse_guard([&] {
        EnvelopeReport rep;
        rep.theorem = theorem_from_string(j.at("theorem").get<std::string>());
        rep.kind = j.at("kind").get<std::string>();
        rep.form = j.at("form").get<std::string>();
        rep.floor = number_from_json(j.at("floor"));
        rep.all_hold = j.at("all_hold").get<bool>();
        rep.chain_ok = j.at("chain_ok").get<bool>();
        for (const auto& r : j.at("records"))
            rep.records.push_back(record_from_json(r));
        return rep;
    });
}

/// Columns n, observed, bound, slack, holds. Per-step reports show the
/// tighter of the y/x comparisons as "bound".
inline void write_envelope_table(std::ostream& os, const EnvelopeReport& rep) {
    os << rep.kind << " envelope, theorem " << to_string(rep.theorem) << " [" << rep.form
       << "], all_hold=" << (rep.all_hold ? "true" : "false") << '\n';
    os << std::setw(4) << "n" << std::setw(16) << "observed" << std::setw(16) << "bound"
       << std::setw(16) << "slack" << std::setw(7) << "holds" << '\n';
    os << std::setprecision(6);
    for (const auto& r : rep.records) {
        double observed = r.observed;
        double bound = r.global_bound;
        if (rep.kind == "per_step") {
            const bool use_x = !std::isnan(r.observed_x_next) &&
                               (r.bound_x - r.observed_x_next) <= (r.bound_y - r.observed_y);
            observed = use_x ? r.observed_x_next : r.observed_y;
            bound = use_x ? r.bound_x : r.bound_y;
        }
        os << std::setw(4) << r.n << std::setw(16) << observed << std::setw(16) << bound
           << std::setw(16) << r.slack << std::setw(7) << (r.holds ? "yes" : "NO") << '\n';
    }
}

inline Json to_json(const UniquenessResult& u) {
    Json j;
    j["distinct_roots_found"] = u.distinct_roots_found;
    Json locs = Json::array();
    for (const auto& v : u.locations)
        locs.push_back(vector_to_json(v));
    j["locations"] = std::move(locs);
    j["converged_starts"] = u.converged_starts;
    j["nonconvergent_starts"] = u.nonconvergent_starts;
    return j;
}

// ---------------------------------------------------------------- families

namespace detail {

inline std::vector<double> parse_numbers(const std::string& s, std::size_t expected,
                                         const std::string& spec) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size())
                throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw ParseError("family spec '" + spec + "': bad number '" + item + "'");
        }
    }
    if (out.size() != expected)
        throw ParseError("family spec '" + spec + "': expected " + std::to_string(expected) +
                         " parameter(s), got " + std::to_string(out.size()));
    return out;
}

} // namespace detail

inline LAverage parse_family(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw ParseError("family spec '" + spec + "': expected NAME:PARAMS");
    const std::string name = spec.substr(0, colon);
    const std::string rest = spec.substr(colon + 1);
    if (name == "constant") {
        const auto v = detail::parse_numbers(rest, 1, spec);
        return LAverage::constant(v[0]);
    }
    if (name == "affine") {
        const auto v = detail::parse_numbers(rest, 2, spec);
        return LAverage::affine(v[0], v[1]);
    }
    if (name == "holder") {
        const auto v = detail::parse_numbers(rest, 2, spec);
        return LAverage::holder(v[0], v[1]);
    }
    if (name == "rational") {
        const auto v = detail::parse_numbers(rest, 2, spec);
        return LAverage::rational(v[0], v[1]);
    }
    if (name == "tabulated") {
        if (rest.empty())
            throw ParseError("family spec '" + spec + "': missing CSV path");
        return load_tabulated_csv(rest);
    }
    throw ParseError("family spec '" + spec + "': unknown family '" + name + "'");
}

inline std::string describe_family(const LAverage& fam) {
    return std::visit(
        [](const auto& f) -> std::string {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ConstantFamily>)
                return "constant:" + format_double(f.value);
            else if constexpr (std::is_same_v<T, AffineFamily>)
                return "affine:" + format_double(f.gamma) + "," + format_double(f.slope);
            else if constexpr (std::is_same_v<T, HolderFamily>)
                return "holder:" + format_double(f.c) + "," + format_double(f.a);
            else if constexpr (std::is_same_v<T, RationalFamily>)
                return "rational:" + format_double(f.gamma) + "," + format_double(f.c);
            else
                return "tabulated:<" + std::to_string(f.samples.size()) + " samples>";
        },
        fam.family());
}

} // namespace twostep
