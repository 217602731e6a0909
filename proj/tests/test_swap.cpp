#include <cmath>

#include <gtest/gtest.h>

#include "ccsa/swap.hpp"

using namespace ccsa;

namespace {

struct Fixture {
    YieldCurve curve = build_curve(reference_market_quotes());
    TimeGrid grid = TimeGrid::uniform(1.0, 252);

    PathSet paths(const G2Params& p, std::size_t n, std::uint64_t seed) const {
        return simulate_paths(G2Model(p, curve), cir_high(), grid, n, seed);
    }
};

constexpr G2Params kZeroVol{0.1, 0.2, 0.0, 0.0, 0.0};

// Deterministic-rate value of the pay-fixed swap from curve ratios alone.
double deterministic_npv(const YieldCurve& c, double k, double t, double notional) {
    const double d = c.discount_factor(t);
    double v = 0.0;
    for (int s = 0; s < 2; ++s) {
        const double start = 0.5 * s, end = 0.5 * (s + 1);
        if (end <= t) continue;
        const double p_end = c.discount_factor(end) / d;
        // Future periods: P(t,start) - P(t,end). The running period's accrued
        // growth exp(int_start^t f) is df(start)/df(t) as well.
        const double floating = c.discount_factor(start) / d - p_end;
        v += floating - k * 0.5 * p_end;
    }
    return notional * v;
}

}  // namespace

TEST(SwapSpecTest, Validation) {
    SwapSpec s;
    EXPECT_EQ(s.periods(), 2);
    s.maturity = 1.2;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = SwapSpec{};
    s.notional = 0.0;
    EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Swap, ParAtInception) {
    Fixture f;
    const G2Model m(reference_g2_params(), f.curve);
    SwapSpec s;
    s.fixed_rate = par_fixed_rate(f.curve, 1.0, 0.5);
    EXPECT_NEAR(swap_npv(m, s, 0.0, 0.0, 0.0), 0.0, 1e-10 * s.notional);
    s.direction = SwapDirection::receive_fixed;
    EXPECT_NEAR(swap_npv(m, s, 0.0, 0.0, 0.0), 0.0, 1e-10 * s.notional);
}

TEST(Swap, DeterministicRatesMatchCurveArithmetic) {
    Fixture f;
    const G2Model m(kZeroVol, f.curve);
    const auto ps = f.paths(kZeroVol, 3, 1);
    SwapSpec s;
    s.fixed_rate = 0.008;
    const auto npv = npv_matrix(ps, s, m);
    for (int i = 0; i <= f.grid.n_steps; i += 9)
        for (Eigen::Index j = 0; j < 3; ++j)
            EXPECT_NEAR(npv(i, j), deterministic_npv(f.curve, 0.008, f.grid.time(i), 1000.0), 1e-10) << "step " << i;
}

TEST(Swap, DeterministicInAdvanceEqualsInArrears) {
    Fixture f;
    const G2Model m(kZeroVol, f.curve);
    const auto ps = f.paths(kZeroVol, 2, 1);
    SwapSpec s;
    s.fixed_rate = 0.01;
    const auto arrears = npv_matrix(ps, s, m);
    s.fixing = Fixing::in_advance;
    const auto advance = npv_matrix(ps, s, m);
    EXPECT_LT((arrears - advance).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Swap, OnePeriodFixingAtStrikeIsWorthless) {
    Fixture f;
    const G2Model m(reference_g2_params(), f.curve);
    SwapSpec s;
    s.maturity = 0.5;
    s.fixed_rate = 0.012;
    s.fixing = Fixing::in_advance;
    CurrentPeriod cur;
    cur.fixed_libor = 0.012;
    EXPECT_NEAR(swap_npv(m, s, 0.25, 0.003, -0.002, cur), 0.0, 1e-12);
}

TEST(Swap, DirectionAntisymmetry) {
    Fixture f;
    const G2Model m(reference_g2_params(), f.curve);
    const auto ps = f.paths(reference_g2_params(), 200, 8);
    SwapSpec pay;
    pay.fixed_rate = par_fixed_rate(f.curve, 1.0, 0.5);
    SwapSpec rec = pay;
    rec.direction = SwapDirection::receive_fixed;
    const auto a = npv_matrix(ps, pay, m);
    const auto b = npv_matrix(ps, rec, m);
    EXPECT_TRUE(a == -b);
}

TEST(Swap, ZeroAfterLastPayment) {
    Fixture f;
    const G2Model m(reference_g2_params(), f.curve);
    const auto ps = f.paths(reference_g2_params(), 50, 8);
    SwapSpec s;
    s.fixed_rate = 0.01;
    const auto npv = npv_matrix(ps, s, m);
    for (Eigen::Index j = 0; j < 50; ++j) EXPECT_EQ(npv(252, j), 0.0);
    EXPECT_THROW(swap_npv(m, s, 1.01, 0.0, 0.0), std::invalid_argument);
}

TEST(Swap, ThreadCountDoesNotChangeNpv) {
    Fixture f;
    const G2Model m(reference_g2_params(), f.curve);
    const auto ps = f.paths(reference_g2_params(), 120, 3);
    SwapSpec s;
    s.fixed_rate = 0.01;
    EXPECT_TRUE(npv_matrix(ps, s, m, 1) == npv_matrix(ps, s, m, 3));
}

TEST(Exposure, IdentityAndSigns) {
    Fixture f;
    const G2Model m(reference_g2_params(), f.curve);
    const auto ps = f.paths(reference_g2_params(), 500, 21);
    SwapSpec s;
    s.fixed_rate = par_fixed_rate(f.curve, 1.0, 0.5);
    const auto e = exposure_profile(ps, npv_matrix(ps, s, m));
    ASSERT_EQ(e.times.size(), 253u);
    for (std::size_t i = 0; i < e.times.size(); ++i) {
        EXPECT_GE(e.epe[i], 0.0);
        EXPECT_GE(e.ene[i], 0.0);
        EXPECT_NEAR(e.epe[i] - e.ene[i], e.mean_npv[i], 1e-12);
    }
}

TEST(Exposure, AllNegativeMeansNoPositiveExposure) {
    Fixture f;
    const G2Model m(kZeroVol, f.curve);
    const auto ps = f.paths(kZeroVol, 10, 2);
    SwapSpec s;
    s.fixed_rate = 0.05;
    const auto npv = npv_matrix(ps, s, m);
    const auto e = exposure_profile(ps, npv);
    for (int i = 0; i < 252; ++i) {
        ASSERT_LT(npv(i, 0), 0.0);
        EXPECT_EQ(e.epe[static_cast<std::size_t>(i)], 0.0);
    }
}

TEST(Exposure, HalfYearEpeAgreesWithIndependentRun) {
    Fixture f;
    const G2Model m(reference_g2_params(), f.curve);
    SwapSpec s;
    s.fixed_rate = par_fixed_rate(f.curve, 1.0, 0.5);
    double mean[2], var[2];
    std::size_t alive[2];
    const int step = 126;
    for (int r = 0; r < 2; ++r) {
        const auto ps = f.paths(reference_g2_params(), 4000, 1000 + r);
        const auto npv = npv_matrix(ps, s, m);
        const auto e = exposure_profile(ps, npv);
        mean[r] = e.epe[step];
        alive[r] = e.survivors[step];
        double ss = 0.0;
        for (std::size_t j = 0; j < ps.n_paths; ++j)
            if (ps.alive(step, j)) ss += std::pow(std::max(npv(step, static_cast<Eigen::Index>(j)), 0.0) - mean[r], 2);
        var[r] = ss / static_cast<double>(alive[r] - 1);
    }
    EXPECT_NEAR(mean[0], mean[1], 3.0 * std::sqrt(var[0] / alive[0] + var[1] / alive[1]));
}
