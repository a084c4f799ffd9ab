#include "qspec/json_io.hpp"
#include "qspec/verify.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace qspec;

TEST(JsonIo, ComplexAsPair) {
    EXPECT_EQ(to_json(cplx(1.5, -2.0)).dump(), "[1.5,-2.0]");
    EXPECT_EQ(complex_from_json(json::parse("[0.25, 3]"), "x"), cplx(0.25, 3.0));
    EXPECT_EQ(complex_from_json(json::parse("4"), "x"), cplx(4.0, 0.0));
    EXPECT_THROW(complex_from_json(json::parse("\"a\""), "x"), ValidationError);
}

TEST(JsonIo, ShortestRoundTripFloats) {
    const double v = 0.1 + 0.2;
    auto s = json(v).dump();
    EXPECT_EQ(std::stod(s), v);
    EXPECT_LE(s.size(), 24u);
    EXPECT_EQ(json(0.5).dump(), "0.5");
}

TEST(JsonIo, ProblemRoundTrip) {
    auto spec = random_problem_spec(12);
    auto j = spec_to_json(spec);
    auto back = spec_from_json(json::parse(j.dump()));
    auto a = validate_problem(spec), b = validate_problem(back);
    for (double x : {0.0, 0.2, 0.5, 0.99})
        EXPECT_EQ(a.p()(x), b.p()(x));
    EXPECT_EQ(a.a(), b.a());
    EXPECT_EQ(spec_to_json(back).dump(), j.dump());
}

TEST(JsonIo, SamplesAndDefaults) {
    auto s = spec_from_json(json::parse(R"({"q": {"kind": "samples", "values": [1, [2, 1], 3], "interp": 1}})"));
    auto pr = validate_problem(s);
    EXPECT_EQ(pr.q()(0.25), cplx(1.5, 0.5));
    EXPECT_TRUE(pr.p().is_zero());
    EXPECT_EQ(pr.tol().contour_nodes, 64);
}

TEST(JsonIo, SchemaViolations) {
    EXPECT_THROW(spec_from_json(json::parse("[1,2]")), ValidationError);
    EXPECT_THROW(spec_from_json(json::parse(R"({"p": {"kind": "spline"}})")), ValidationError);
    EXPECT_THROW(spec_from_json(json::parse(R"({"p": {"kind": "piecewise_poly", "segments": [{"x0": 0}]}})")),
                 ValidationError);
    EXPECT_THROW(spec_from_json(json::parse(R"({"tolerances": {"ode_rel": "tight"}})")), ValidationError);
}

TEST(JsonIo, MissingFile) { EXPECT_THROW(load_problem("/nonexistent/problem.json"), FileError); }

TEST(JsonIo, ExampleFilesLoad) {
    for (const char* f : {"beam.json", "beam_bump.json", "beam_a01.json", "complex_cubic.json"}) {
        auto pr = load_problem(std::string(QSPEC_DATA_DIR) + "/" + f);
        EXPECT_GT(pr.nodes().size(), 0u) << f;
    }
}
