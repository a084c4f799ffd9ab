#include "qspec/verify.hpp"

#include "beam_oracle.hpp"

#include <gtest/gtest.h>

using namespace qspec;

namespace {

Mat4 unit_lower(cplx a21, cplx a31, cplx a32, cplx a41, cplx a42) {
    Mat4 a = Mat4::Identity();
    a(1, 0) = a21;
    a(2, 0) = a31;
    a(2, 1) = a32;
    a(3, 0) = a41;
    a(3, 1) = a42;
    a(3, 2) = a21;
    return a;
}

Mat4 pattern(std::initializer_list<std::tuple<int, int, cplx>> entries) {
    Mat4 n = Mat4::Zero();
    for (auto [j, k, v] : entries) n(j - 1, k - 1) = v;
    return n;
}

SpectralPoint point(cplx l, cplx g, cplx x) {
    SpectralPoint p;
    p.lambda = l;
    p.gamma = g;
    p.xi = x;
    p.norm_ok = true;
    return p;
}

const Mat4 kA = unit_lower(0.4, cplx(0.1, 0.2), -0.3, 0.25, cplx(0.0, 0.5));

} // namespace

TEST(Laurent, RegularPointHasNoPolePart) {
    auto pr = beam_problem();
    ProblemWeyl src(pr);
    auto lc = laurent_coefficients(src, 1.0, {-1, 0});
    EXPECT_LT(max_abs(lc.coeff_doubled.at(-1)), 1e-9);
    for (int i = 0; i < 4; ++i) EXPECT_LT(std::abs(lc.coeff_doubled.at(0)(i, i) - 1.0), 1e-12);
    EXPECT_LT(lc.doubling_change, 1e-8);
}

TEST(Laurent, BeamFirstEigenvalueResidue) {
    auto pr = beam_problem();
    ProblemWeyl src(pr);
    const double l1 = oracle::eigenvalue(1);
    auto lc = laurent_coefficients(src, l1, {-1});
    const Mat4& r = lc.coeff_doubled.at(-1);
    EXPECT_NEAR(r(2, 1).real(), -4.0, 1e-6);
    EXPECT_LT(std::abs(r(1, 0)), 1e-9);
    EXPECT_LT(std::abs(r(3, 2)), 1e-9);
}

TEST(WeightMatrix, BeamCaseI) {
    auto pr = beam_problem();
    auto pts = weight_numbers(pr, first_zeros(pr, 2, 2, 1));
    ProblemWeyl src(pr);
    auto w = weight_matrix(src, pts[0].lambda);
    EXPECT_NEAR(std::abs(w.n(2, 1) - *pts[0].beta), 0.0, 1e-6);
    auto rep = verify_weight_structure(w, pts[0], CaseTag::I);
    EXPECT_TRUE(rep.all_pass());
    EXPECT_EQ(w.quadrature_nodes, 64);
    EXPECT_GT(w.contour_radius, 0.0);
}

TEST(WeightMatrix, BeamCaseV) {
    auto pr = beam_problem();
    ProblemWeyl src(pr);
    const double l0 = oracle::delta33_zero(1);
    auto w = weight_matrix(src, l0);
    const double big = max_abs(w.n);
    EXPECT_LT(std::abs(w.n(1, 0) - w.n(3, 2)) / big, 1e-8);
    EXPECT_LT(std::abs(w.n(1, 0) - w.m_minus1(3, 2)) / big, 1e-8);
    SpectralPoint p;
    p.lambda = l0;
    auto rep = verify_weight_structure(w, p, CaseTag::V);
    for (auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name << " " << c.residual;
}

TEST(WeightMatrix, NilpotentStructure) {
    auto pr = validate_problem(random_problem_spec(2));
    auto zs = first_zeros(pr, 2, 2, 1);
    ProblemWeyl src(pr);
    auto w = weight_matrix(src, zs[0].lambda);
    Mat4 n4 = w.n * w.n * w.n * w.n;
    EXPECT_LT(max_abs(n4), 1e-12 * std::pow(max_abs(w.n), 4) + 1e-300);
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) EXPECT_EQ(w.n(i, j), cplx(0.0));
}

TEST(WeightMatrix, HalvedRadiusKeepsClassification) {
    auto pr = validate_problem(random_problem_spec(6));
    auto pts = weight_numbers(pr, first_zeros(pr, 2, 2, 2));
    ProblemWeyl src(pr);
    for (auto& p : pts) {
        auto w1 = weight_matrix(src, p.lambda);
        LaurentOptions o;
        o.radius = 0.5 * w1.contour_radius;
        auto w2 = weight_matrix(src, p.lambda, o);
        EXPECT_LT(max_abs(Mat4(w1.n - w2.n)), 1e-8 * max_abs(w1.n));
        EXPECT_EQ(classify_eigenvalue(p, src), CaseTag::I);
    }
}

TEST(Classify, BeamEigenvaluesAreCaseI) {
    auto pr = beam_problem();
    ProblemWeyl src(pr);
    for (auto& p : weight_numbers(pr, first_zeros(pr, 2, 2, 5), WeightNumberOptions{false}))
        EXPECT_EQ(classify_eigenvalue(p, src), CaseTag::I);
}

TEST(Classify, StubCaseII) {
    const cplx s = 0.7, beta = -1.5;
    Mat4 n = pattern({{3, 1, s}, {3, 2, beta}, {4, 1, -s * s / beta}, {4, 2, -s}});
    StubWeyl stub(3.0, kA, n, 0.0, 0.5);
    auto p = point(3.0, 1.0, 2.0);
    EXPECT_EQ(classify_eigenvalue(p, stub), CaseTag::II);
    auto w = weight_matrix(stub, 3.0, LaurentOptions{0.5});
    EXPECT_LT(max_abs(Mat4(w.n - n)), 1e-12);
    auto rep = verify_weight_structure(w, p, CaseTag::II);
    for (auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name << " " << c.residual;
}

TEST(Classify, StubCaseIII) {
    const cplx xi = cplx(1.2, 0.3), t = 0.8;
    Mat4 n = pattern({{2, 1, t}, {4, 3, t}, {4, 1, xi * xi}});
    StubWeyl stub(-2.0, kA, n, 0.0, 0.0);
    auto p = point(-2.0, 0.0, xi);
    EXPECT_EQ(classify_eigenvalue(p, stub), CaseTag::III);
    auto w = weight_matrix(stub, -2.0, LaurentOptions{0.5});
    auto rep = verify_weight_structure(w, p, CaseTag::III);
    for (auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name << " " << c.residual;
    for (auto& c : rep.checks)
        if (c.name == "n41 = xi^2") EXPECT_LT(c.residual, 1e-12);
}

TEST(Classify, StubCaseIV) {
    const cplx xi = -0.9;
    Mat4 n = pattern({{4, 1, xi * xi}});
    StubWeyl stub(10.0, kA, n, 1.0, 0.3);
    auto p = point(10.0, 0.0, xi);
    EXPECT_EQ(classify_eigenvalue(p, stub), CaseTag::IV);
    auto rep = verify_weight_structure(weight_matrix(stub, 10.0, LaurentOptions{0.5}), p, CaseTag::IV);
    EXPECT_TRUE(rep.all_pass());
}

TEST(Classify, IndeterminateBand) {
    StubWeyl stub(1.0, kA, Mat4::Zero(), 1.0, 0.0);
    ClassifyOptions o;
    for (double g : {0.1 * o.gamma_floor, o.gamma_floor, 10.0 * o.gamma_floor})
        EXPECT_EQ(classify_eigenvalue(point(1.0, g, 1.0), stub, o), CaseTag::indeterminate) << g;
    EXPECT_EQ(classify_eigenvalue(point(1.0, 0.01 * o.gamma_floor, 1.0), stub, o), CaseTag::IV);
}

TEST(Classify, NormFailureIsUnknown) {
    StubWeyl stub(1.0, kA, Mat4::Zero(), 1.0, 0.0);
    auto p = point(1.0, 1.0, 1.0);
    p.norm_ok = false;
    EXPECT_EQ(classify_eigenvalue(p, stub), CaseTag::unknown);
}

TEST(VerifyStructure, ReportsInsteadOfThrowing) {
    WeightMatrix w;
    w.n = pattern({{3, 2, -4.0}, {4, 1, 1.0}});
    auto rep = verify_weight_structure(w, point(1.0, 2.0, 0.0), CaseTag::I);
    EXPECT_FALSE(rep.all_pass());
}

TEST(SearchHarness, RunsAndReports) {
    auto hits = search_cases_2_to_4(2, 2, 99);
    for (auto& h : hits) EXPECT_NE(h.point.case_tag, CaseTag::I);
}
