#include "qspec/verify.hpp"

#include "beam_oracle.hpp"

#include <gtest/gtest.h>

using namespace qspec;

class BeamData : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        pr_ = new Problem(beam_problem());
        zeros_ = new std::vector<Zero>(first_zeros(*pr_, 2, 2, 5));
        points_ = new std::vector<SpectralPoint>(weight_numbers(*pr_, *zeros_));
    }
    static void TearDownTestSuite() {
        delete points_;
        delete zeros_;
        delete pr_;
    }
    static Problem* pr_;
    static std::vector<Zero>* zeros_;
    static std::vector<SpectralPoint>* points_;
};
Problem* BeamData::pr_ = nullptr;
std::vector<Zero>* BeamData::zeros_ = nullptr;
std::vector<SpectralPoint>* BeamData::points_ = nullptr;

TEST_F(BeamData, GammaMatchesModeShapeQuadrature) {
    for (int n = 1; n <= 5; ++n) {
        const auto& p = (*points_)[n - 1];
        auto [g, x] = oracle::weights(n);
        EXPECT_NEAR(std::abs(p.gamma), 2.0, 1e-6) << n;
        EXPECT_NEAR(p.gamma.real(), g, 1e-6) << n;
        EXPECT_NEAR(p.xi.real(), x, 1e-6 * std::abs(x)) << n;
    }
}

TEST_F(BeamData, SignConvention) {
    for (const auto& p : *points_) EXPECT_GT(p.gamma.real(), 0.0);
}

TEST_F(BeamData, BetaFromGammaAndFromResidue) {
    for (const auto& p : *points_) {
        ASSERT_TRUE(p.beta.has_value());
        ASSERT_TRUE(p.beta_residue.has_value());
        EXPECT_NEAR(std::abs(*p.beta + p.gamma * p.gamma), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(*p.beta_residue - *p.beta), 0.0, 1e-6) << p.lambda;
    }
    EXPECT_NEAR(points_->front().beta->real(), -4.0, 1e-6);
}

TEST_F(BeamData, ResidueAtTenthRadius) {
    const auto& p = points_->front();
    const cplx res = residue_m32(*pr_, p.lambda, p.lambda.real() / 10.0, 64);
    EXPECT_NEAR(std::abs(res - *p.beta), 0.0, 1e-6);
}

TEST_F(BeamData, M43EqualsXiOverGamma) {
    for (const auto& p : *points_) {
        const cplx m43 = oracle::m43(p.lambda);
        EXPECT_LT(std::abs(m43 - p.xi / p.gamma) / std::abs(m43), 1e-6) << p.lambda;
    }
}

TEST_F(BeamData, EigenfunctionEndConditionsAndTrajectory) {
    auto ef = eigenfunction(*pr_, (*zeros_)[0].lambda, {0.0, 0.25, 0.5, 1.0});
    ASSERT_TRUE(ef.norm_ok);
    for (double r : ef.residuals) EXPECT_LT(r, 1e-8);
    const auto m = oracle::mode(1);
    const double s = ef.gamma.real() / 2.0;
    for (std::size_t i = 0; i < ef.x.size(); ++i) EXPECT_NEAR(ef.values[i](0).real(), s * m.y(ef.x[i]), 1e-8);
}

TEST(WeightNumbers, NonSimpleZeroRejected) {
    auto pr = beam_problem();
    Zero z = first_zeros(pr, 2, 2, 1)[0];
    z.ddelta = 0.0;
    EXPECT_THROW(weight_numbers(pr, {z}), Error);
}

TEST(WeightNumbers, GammaZeroLeavesBetaAbsent) {
    auto pr = beam_problem();
    auto pts = weight_numbers(pr, first_zeros(pr, 2, 2, 1), WeightNumberOptions{false, 64, 0.0, 1e6});
    EXPECT_FALSE(pts[0].beta.has_value()); // |gamma| = 2 is below a floor of 1e6
}

TEST(Eigenfunction, ComplexProblemNormalisation) {
    auto pr = validate_problem(random_problem_spec(31));
    auto zs = first_zeros(pr, 2, 2, 2);
    for (const auto& z : zs) {
        auto ef = eigenfunction(pr, z.lambda);
        ASSERT_TRUE(ef.norm_ok);
        for (double r : ef.residuals) EXPECT_LT(r, 1e-7 * (1.0 + std::abs(z.lambda)));
        EXPECT_GT(std::abs(ef.raw_norm), kNormFloor);
    }
}
