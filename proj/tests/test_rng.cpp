#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "ccsa/rng.hpp"

using namespace ccsa;

TEST(Philox, KnownAnswerZeroCounterZeroKey) {
    const auto out = Philox4x32::block({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(out[0], 0x6627e8d5u);
    EXPECT_EQ(out[1], 0xe169c58du);
    EXPECT_EQ(out[2], 0xbc57ac4cu);
    EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerAllOnes) {
    const auto out = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(out[0], 0x408f276du);
    EXPECT_EQ(out[1], 0x41c83b0eu);
    EXPECT_EQ(out[2], 0xa20bc7c6u);
    EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPiDigits) {
    const auto out = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(out[0], 0xd16cfe09u);
    EXPECT_EQ(out[1], 0x94fdccebu);
    EXPECT_EQ(out[2], 0x5001e420u);
    EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(PathStream, SameTripleSameSequence) {
    PathStream a(7, 3, Stream::rates), b(7, 3, Stream::rates);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(PathStream, DistinctTriplesDiffer) {
    std::set<std::uint64_t> first;
    for (std::uint64_t seed : {1u, 2u})
        for (std::uint32_t path : {0u, 1u})
            for (Stream s : {Stream::rates, Stream::intensity, Stream::default_time}) first.insert(PathStream(seed, path, s)());
    EXPECT_EQ(first.size(), 12u);
}

TEST(PathStream, UniformNeverZeroAndMomentsMatch) {
    PathStream g(11, 0, Stream::rates);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = g.uniform_open0();
        ASSERT_GT(u, 0.0);
        ASSERT_LE(u, 1.0);
        s += u;
        s2 += u * u;
    }
    const double mean = s / n;
    EXPECT_NEAR(mean, 0.5, 3.0 * std::sqrt(1.0 / 12.0 / n));
    EXPECT_NEAR(s2 / n - mean * mean, 1.0 / 12.0, 2e-3);
}

TEST(PathStream, NormalMoments) {
    PathStream g(12, 5, Stream::intensity);
    const int n = 200000;
    double s = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = g.normal();
        s += x;
        s2 += x * x;
        s4 += x * x * x * x;
    }
    EXPECT_NEAR(s / n, 0.0, 3.0 / std::sqrt(n));
    EXPECT_NEAR(s2 / n, 1.0, 3.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(s4 / n, 3.0, 3.0 * std::sqrt(96.0 / n));
}

TEST(PathStream, ExponentialMean) {
    PathStream g(13, 9, Stream::default_time);
    const int n = 200000;
    double s = 0;
    for (int i = 0; i < n; ++i) s += g.exponential();
    EXPECT_NEAR(s / n, 1.0, 3.0 / std::sqrt(n));
}
