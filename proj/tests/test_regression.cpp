#include <cmath>

#include <gtest/gtest.h>

#include "ccsa/regression.hpp"
#include "ccsa/rng.hpp"

using namespace ccsa;

namespace {

struct Sample {
    std::vector<double> r, lam;
};

Sample draw(std::size_t n, std::uint64_t seed) {
    PathStream g(seed, 0, Stream::rates);
    Sample s;
    for (std::size_t i = 0; i < n; ++i) {
        s.r.push_back(0.01 + 0.02 * g.normal());
        s.lam.push_back(0.1 + 0.05 * g.uniform_open0());
    }
    return s;
}

}  // namespace

TEST(Regression, ConstantTarget) {
    const auto s = draw(200, 1);
    const std::vector<double> y(200, 3.25);
    const auto fit = regress_continuation(s.r, s.lam, y, RegressionBasis::rate_and_intensity());
    for (double v : fit.fitted) EXPECT_NEAR(v, 3.25, 1e-12);
}

TEST(Regression, ExactLinearFunctionHasNoResidual) {
    const auto s = draw(300, 2);
    std::vector<double> y;
    for (std::size_t i = 0; i < 300; ++i) y.push_back(1.5 - 2.0 * s.r[i] + 7.0 * s.lam[i] + 3.0 * s.r[i] * s.lam[i]);
    const auto fit = regress_continuation(s.r, s.lam, y, RegressionBasis::rate_and_intensity());
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(fit.fitted[i], y[i], 1e-10);
    EXPECT_TRUE(fit.pruned.empty());
}

TEST(Regression, RecoversQuadraticCoefficient) {
    const auto s = draw(500, 3);
    std::vector<double> y;
    for (double r : s.r) y.push_back(r * r);
    const auto fit = regress_continuation(s.r, s.lam, y, RegressionBasis::rate_only());
    ASSERT_EQ(fit.kept.size(), 3u);
    EXPECT_EQ(fit.kept[2], Feature::rate_sq);
    EXPECT_NEAR(fit.coefficients[2], 1.0, 1e-8);
    EXPECT_NEAR(fit.coefficients[1], 0.0, 1e-8);
    EXPECT_NEAR(fit.coefficients[0], 0.0, 1e-8);
}

TEST(Regression, LeastSquaresNormalEquations) {
    const auto s = draw(400, 4);
    PathStream g(4, 1, Stream::intensity);
    std::vector<double> y;
    for (std::size_t i = 0; i < 400; ++i) y.push_back(std::sin(30.0 * s.r[i]) + s.lam[i] + 0.1 * g.normal());
    const auto basis = RegressionBasis::rate_and_intensity();
    const auto fit = regress_continuation(s.r, s.lam, y, basis);
    // Residuals orthogonal to every basis column.
    for (Feature f : basis.features) {
        double dot = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            dot += (y[i] - fit.fitted[i]) * evaluate(f, s.r[i], s.lam[i]);
            scale += std::abs(y[i] * evaluate(f, s.r[i], s.lam[i]));
        }
        EXPECT_NEAR(dot / scale, 0.0, 1e-10) << to_string(f);
    }
}

TEST(Regression, ConstantFeaturePruned) {
    const auto s = draw(200, 5);
    const std::vector<double> lam(200, 0.2);
    std::vector<double> y;
    for (double r : s.r) y.push_back(2.0 * r);
    const auto fit = regress_continuation(s.r, lam, y, RegressionBasis::rate_and_intensity());
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(fit.fitted[i], y[i], 1e-12);
    EXPECT_NE(std::find(fit.pruned.begin(), fit.pruned.end(), Feature::intensity), fit.pruned.end());
}

TEST(Regression, CollinearFeaturesPrunedOrReported) {
    const auto s = draw(200, 6);
    std::vector<double> y;
    for (double r : s.r) y.push_back(r);
    const RegressionBasis basis{{Feature::constant, Feature::rate, Feature::intensity}};
    const auto fit = regress_continuation(s.r, s.r, y, basis);
    EXPECT_EQ(fit.kept.size(), 2u);
    EXPECT_EQ(fit.pruned.size(), 1u);
    RegressionOptions strict;
    strict.prune_collinear = false;
    try {
        (void)regress_continuation(s.r, s.r, y, basis, strict);
        FAIL() << "expected a rank-deficiency error";
    } catch (const RegressionError& e) {
        EXPECT_NE(std::string(e.what()).find("lambda"), std::string::npos);
    }
}

TEST(Regression, SampleBudgetLimitsFeatures) {
    const auto s = draw(25, 7);
    std::vector<double> y(s.r.begin(), s.r.end());
    const auto fit = regress_continuation(s.r, s.lam, y, RegressionBasis::rate_and_intensity());
    EXPECT_LE(fit.kept.size(), 2u);
    const auto single = regress_continuation(std::vector<double>{0.01}, std::vector<double>{0.1}, std::vector<double>{4.0},
                                             RegressionBasis::rate_and_intensity());
    EXPECT_DOUBLE_EQ(single.fitted[0], 4.0);
}

TEST(Regression, InputErrors) {
    const std::vector<double> a{1, 2}, b{1};
    EXPECT_THROW(regress_continuation(a, b, a, RegressionBasis::rate_only()), RegressionError);
    EXPECT_THROW(regress_continuation(b, b, b, RegressionBasis{{Feature::rate}}), RegressionError);
    const std::vector<double> empty;
    EXPECT_THROW(regress_continuation(empty, empty, empty, RegressionBasis::rate_only()), RegressionError);
}
