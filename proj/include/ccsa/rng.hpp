#pragma once

// Counter-based random streams.
//
// Every (seed, path, stream) triple addresses an independent Philox4x32-10
// sequence, so a path's draws do not depend on how paths are scheduled
// across threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace ccsa {

/// Philox4x32 with 10 rounds (Salmon et al., Random123).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Named substreams drawn for every path.
enum class Stream : std::uint32_t { rates = 0, intensity = 1, default_time = 2 };

/// UniformRandomBitGenerator over one (seed, path, stream) substream.
class PathStream {
public:
    using result_type = std::uint64_t;

    PathStream(std::uint64_t seed, std::uint32_t path, Stream stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          path_(path),
          stream_(static_cast<std::uint32_t>(stream)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (lane_ == 2) refill();
        const std::size_t i = 2 * lane_++;
        return (std::uint64_t{buffer_[i]} << 32) | buffer_[i + 1];
    }

    /// Uniform on (0, 1]; never returns 0 so it is safe under log().
    double uniform_open0() noexcept {
        return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; pairs are cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open0();
        const double u2 = uniform_open0();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Unit-rate exponential.
    double exponential() noexcept { return -std::log(uniform_open0()); }

private:
    void refill() noexcept {
        const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_),
                                      static_cast<std::uint32_t>(block_ >> 32), path_, stream_};
        buffer_ = Philox4x32::block(ctr, key_);
        ++block_;
        lane_ = 0;
    }

    Philox4x32::Key key_;
    std::uint32_t path_;
    std::uint32_t stream_;
    std::uint64_t block_ = 0;
    Philox4x32::Counter buffer_{};
    std::size_t lane_ = 2;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace ccsa
