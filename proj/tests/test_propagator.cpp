#include "qspec/propagator.hpp"

#include "beam_oracle.hpp"

#include <gtest/gtest.h>

using namespace qspec;

TEST(Propagator, ZeroProblemPolynomialColumns) {
    auto pr = beam_problem();
    PropagateOptions o;
    o.output_x = {0.3, 0.7};
    auto fc = fundamental_C(pr, 0.0, o);
    for (double x : {0.3, 0.7, 1.0}) {
        const Mat4 c = fc.fm.at_x(x);
        // columns {x^2/2, x^3/6, 1, x} with derivatives down each column
        EXPECT_NEAR(std::abs(c(0, 0) - x * x / 2), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(c(1, 0) - x), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(c(2, 0) - 1.0), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(c(0, 1) - x * x * x / 6), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(c(3, 1) - 1.0), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(c(0, 2) - 1.0), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(c(0, 3) - x), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(c(1, 3) - 1.0), 0.0, 1e-12);
    }
}

TEST(Propagator, CAtZeroIsInverseOfU) {
    ProblemSpec s;
    s.boundary = {cplx(0.3, 0.1), -0.2, 0.1};
    auto pr = validate_problem(s);
    auto fc = fundamental_C(pr, cplx(4.0, 1.0));
    const Mat4 u = boundary_form_matrix(pr, End::left);
    EXPECT_LT(max_abs(Mat4(u * fc.fm.values.front() - Mat4::Identity())), 1e-15);
}

TEST(Propagator, BeamClosedFormAtLambdaOne) {
    auto pr = beam_problem();
    const Mat4 c = fundamental_C(pr, 1.0).fm.final();
    EXPECT_NEAR(c(0, 2).real(), (std::cosh(1.0) + std::cos(1.0)) / 2, 1e-10);
    EXPECT_NEAR(c(0, 3).real(), (std::sinh(1.0) + std::sin(1.0)) / 2, 1e-10);
    EXPECT_NEAR(c(0, 3).real(), 1.008336, 1e-6);
    EXPECT_NEAR(c(0, 2).real(), 1.041691, 1e-6);
}

TEST(Propagator, BeamComplexLambdaMatchesClosedForm) {
    auto pr = beam_problem();
    for (cplx l : {cplx(30.0, 40.0), cplx(-200.0, 5.0), cplx(900.0, -300.0)}) {
        const Mat4 c = fundamental_C(pr, l).fm.final();
        const cplx r = oracle::rho_of(l);
        const cplx c3 = (std::cosh(r) + std::cos(r)) / 2.0, c4 = (std::sinh(r) + std::sin(r)) / (2.0 * r);
        EXPECT_LT(std::abs(c(0, 2) - c3) / std::abs(c3), 1e-9) << l;
        EXPECT_LT(std::abs(c(0, 3) - c4) / std::abs(c4), 1e-9) << l;
    }
}

TEST(Propagator, BackwardSAtZero) {
    auto pr = beam_problem();
    auto fs = fundamental_S(pr, 0.0);
    EXPECT_EQ(fs.fm.values.front(), Mat4(Mat4::Identity()));
    const Mat4 s0 = fs.fm.final();
    EXPECT_NEAR(s0(0, 3).real(), -1.0 / 6.0, 1e-12);
    EXPECT_NEAR(s0(1, 3).real(), 0.5, 1e-12);
}

TEST(Propagator, WronskianOfS4AndC4IsConstantAtEqualLambda) {
    auto pr = beam_problem();
    PropagateOptions o;
    o.output_x = {0.0, 1.0};
    auto fc = fundamental_C(pr, 0.0, o);
    auto fs = fundamental_S(pr, 0.0, o);
    const Vec4 c0 = fc.fm.values.front().col(3), c1 = fc.fm.final().col(3);
    const Vec4 s1 = fs.fm.values.front().col(3), s0 = fs.fm.final().col(3);
    EXPECT_LT(std::abs(lagrange_bracket(s0, c0) - lagrange_bracket(s1, c1)), 1e-12);
}

TEST(Propagator, DeterminantConserved) {
    ProblemSpec s;
    s.p = CoefficientField::from_samples({cplx(0.5, 0.2), -1.0, 2.0, cplx(0.0, -1.0)}, 3);
    s.q = CoefficientField::from_samples({1.0, cplx(3.0, 1.0), -2.0}, 1);
    s.boundary = {0.3, -0.2, 0.1};
    auto pr = validate_problem(s);
    for (cplx l : {cplx(0.0), cplx(10.0, 10.0), cplx(-300.0, 0.0), cplx(0.0, 1000.0)}) {
        auto fc = fundamental_C(pr, l);
        auto fs = fundamental_S(pr, l);
        EXPECT_LT(fc.fm.det_drift, 1e-8) << l;
        EXPECT_LT(fs.fm.det_drift, 1e-8) << l;
        EXPECT_LT(std::abs(fc.fm.final().determinant() - 1.0), 1e-8) << l;
    }
}

TEST(Propagator, LambdaDerivativeMatchesDifferenceQuotient) {
    auto pr = validate_problem(ProblemSpec{CoefficientField::constant(0.7), CoefficientField::constant(-1.0), {0.1, 0.2, 0.3}});
    const cplx l(20.0, 3.0), h(1e-5, 0.0);
    PropagateOptions o;
    o.want_dlambda = true;
    auto fc = fundamental_C(pr, l, o);
    Mat4 fd = (fundamental_C(pr, l + h).fm.final() - fundamental_C(pr, l - h).fm.final()) / (2.0 * h);
    EXPECT_LT(max_abs(Mat4(fc.dvalues.back() - fd)) / max_abs(fd), 1e-7);
}

TEST(Propagator, BreakpointsAreMeshNodes) {
    ProblemSpec s;
    s.q.segments = {{0.0, 0.37, {0.0}}, {0.37, 1.0, {50.0}}};
    auto pr = validate_problem(s);
    PropagateOptions o;
    o.record_steps = true;
    auto fc = fundamental_C(pr, 5.0, o);
    bool hit = false;
    for (double x : fc.fm.at) hit = hit || std::abs(x - 0.37) < 1e-15;
    EXPECT_TRUE(hit);
}

TEST(Propagator, NonFiniteLambdaRejected) {
    auto pr = beam_problem();
    EXPECT_THROW(fundamental_C(pr, cplx(NAN, 0.0)), PropagationError);
}

TEST(Propagator, GramQuadratureOfBeamColumn) {
    auto pr = beam_problem();
    PropagateOptions o;
    o.quadrature = Quadrature::gram;
    auto fc = fundamental_C(pr, 0.0, o);
    // \int x^2 dx for C_4 = x, \int x^2/2 dx for C_1 C_3
    EXPECT_NEAR(fc.quadrature(3, 3).real(), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(fc.quadrature(0, 2).real(), 1.0 / 6.0, 1e-12);
}
