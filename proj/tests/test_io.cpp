#include <cmath>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "twostep/io.hpp"
#include "twostep/problems.hpp"

using namespace twostep;

TEST(Json, DoublesUseSeventeenDigits) {
    EXPECT_EQ(dump_json(Json(0.1)), "0.10000000000000001");
    EXPECT_EQ(dump_json(Json::array({1.0 / 3.0})), "[0.33333333333333331]");
}

TEST(Json, NonFiniteEncoding) {
    EXPECT_TRUE(number_to_json(std::nan("")).is_null());
    EXPECT_EQ(number_to_json(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(number_to_json(-std::numeric_limits<double>::infinity()), "-inf");
    EXPECT_TRUE(std::isnan(number_from_json(nullptr)));
    EXPECT_EQ(number_from_json("-inf"), -std::numeric_limits<double>::infinity());
    EXPECT_THROW(number_from_json("abc"), ParseError);
    EXPECT_THROW(number_from_json(Json::array()), ParseError);
}

TEST(Json, CertificateRoundTripIsByteIdentical) {
    const auto c = solve_radius(RadiusCondition::T52, LAverage::constant(1));
    const std::string text = dump_json(to_json(c));
    const auto back = certificate_from_json(Json::parse(text));
    EXPECT_EQ(back.r, c.r);
    EXPECT_EQ(back.residual, c.residual);
    EXPECT_EQ(back.bracket, c.bracket);
    EXPECT_EQ(back.feasible, c.feasible);
    EXPECT_EQ(dump_json(to_json(back)), text);
    EXPECT_EQ(text.find("\"condition\""), 1u);
}

TEST(Json, CrossValidationRoundTrip) {
    for (auto id : {ClosedFormId::C_affine_center, ClosedFormId::C_holder_T52}) {
        const auto fam = id == ClosedFormId::C_affine_center ? LAverage::affine(0, 1) : LAverage::holder(1, 0.5);
        const auto cv = cross_validate(id, fam);
        const std::string text = dump_json(to_json(cv));
        EXPECT_EQ(dump_json(to_json(cross_validation_from_json(Json::parse(text)))), text);
    }
}

TEST(Json, EstimateRoundTrip) {
    const auto e = estimate_constant(find_entry("sys2").problem, LipschitzKind::radius, 0.5, 100);
    const std::string text = dump_json(to_json(e));
    const auto back = estimate_from_json(Json::parse(text));
    EXPECT_EQ(back.value, e.value);
    EXPECT_EQ(back.witness.x, e.witness.x);
    EXPECT_EQ(dump_json(to_json(back)), text);
}

TEST(Json, VerificationReportsRoundTrip) {
    const auto v = verify_run(find_entry("wang-osc").problem, LAverage::constant(1), Theorem::T52,
                              Vector{0.15}, {}, 0.5);
    ASSERT_TRUE(v.q && v.global);
    const std::string qt = dump_json(to_json(*v.q));
    EXPECT_EQ(dump_json(to_json(qfactors_from_json(Json::parse(qt)))), qt);
    for (const auto* rep : {&v.per_step, &*v.global}) {
        const std::string text = dump_json(to_json(*rep));
        EXPECT_EQ(dump_json(to_json(envelope_from_json(Json::parse(text)))), text);
    }
}

TEST(Json, MalformedReportsRaiseParseError) {
    EXPECT_THROW(certificate_from_json(Json::parse(R"({"condition":"T52"})")), ParseError);
    EXPECT_THROW(certificate_from_json(Json::parse(R"({"condition":"T99","r":1,"residual":0,"feasible":true,"bracket":[1,1]})")),
                 ParseError);
    EXPECT_THROW(qfactors_from_json(Json::parse("[]")), ParseError);
}

TEST(Trace, JsonLinesRoundTrip) {
    const auto tr = two_step_newton(find_entry("sys2").problem, Vector{1.1, 0.95});
    std::ostringstream os;
    write_trace_jsonl(os, tr);
    std::istringstream in(os.str());
    const auto back = read_trace_jsonl(in);
    EXPECT_EQ(back.problem, tr.problem);
    EXPECT_EQ(back.termination, tr.termination);
    ASSERT_EQ(back.steps.size(), tr.steps.size());
    for (std::size_t i = 0; i < tr.steps.size(); ++i) {
        EXPECT_EQ(back.steps[i].x, tr.steps[i].x);
        EXPECT_EQ(back.steps[i].y, tr.steps[i].y);
        EXPECT_EQ(back.steps[i].rho_y, tr.steps[i].rho_y);
    }
    std::ostringstream again;
    write_trace_jsonl(again, back);
    EXPECT_EQ(again.str(), os.str());
}

TEST(Trace, JsonLinesNeedTermination) {
    std::istringstream missing(R"({"n":0,"x":[1],"y":[1],"rho_x":0,"rho_y":0,"f_norm_x":0,"f_norm_y":0,"y_valid":true})");
    EXPECT_THROW(read_trace_jsonl(missing), ParseError);
    std::istringstream garbage("{not json\n");
    EXPECT_THROW(read_trace_jsonl(garbage), ParseError);
}

TEST(Trace, RootlessTraceWritesNulls) {
    auto p = find_entry("quadratic").problem;
    p.root.reset();
    std::ostringstream os;
    write_trace_jsonl(os, two_step_newton(p, Vector{1.2}));
    EXPECT_NE(os.str().find("\"rho_x\":null"), std::string::npos);
}

TEST(Trace, CsvColumns) {
    const auto tr = two_step_newton(find_entry("sys2").problem, Vector{1.1, 0.95});
    std::ostringstream os;
    write_trace_csv(os, tr);
    std::istringstream in(os.str());
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    EXPECT_EQ(header, "n,x,y,rho_x,rho_y,f_norm");
    EXPECT_EQ(first.rfind("0,1.1000000000000001;0.94999999999999996,", 0), 0u);
    EXPECT_EQ(std::count(first.begin(), first.end(), ','), 5);
}

TEST(Output, IsDeterministic) {
    const auto run = [] {
        std::ostringstream os;
        const auto v = verify_run(find_entry("exp").problem, LAverage::constant(1), Theorem::T52,
                                  Vector{0.1});
        os << dump_json(to_json(v.per_step)) << dump_json(to_json(*v.global));
        return os.str();
    };
    EXPECT_EQ(run(), run());
}

TEST(FamilySpec, ParsesEveryFamily) {
    EXPECT_EQ(std::get<ConstantFamily>(parse_family("constant:2.5").family()).value, 2.5);
    const auto a = std::get<AffineFamily>(parse_family("affine:0.5,1").family());
    EXPECT_EQ(a.gamma, 0.5);
    EXPECT_EQ(a.slope, 1.0);
    EXPECT_EQ(std::get<HolderFamily>(parse_family("holder:1,0.5").family()).a, 0.5);
    EXPECT_EQ(std::get<RationalFamily>(parse_family("rational:2,3").family()).c, 3.0);
    EXPECT_EQ(describe_family(parse_family("holder:1,0.5")), "holder:1,0.5");
}

TEST(FamilySpec, RejectsMalformedSpecs) {
    EXPECT_THROW(parse_family("constant"), ParseError);
    EXPECT_THROW(parse_family("affine:1"), ParseError);
    EXPECT_THROW(parse_family("constant:1,2"), ParseError);
    EXPECT_THROW(parse_family("holder:1,x"), ParseError);
    EXPECT_THROW(parse_family("cubic:1"), ParseError);
    EXPECT_THROW(parse_family("tabulated:"), ParseError);
    EXPECT_THROW(parse_family("holder:1,2"), DomainError);
}
