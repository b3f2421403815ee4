#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace supermap {

// Philox4x32-10 counter-based generator. Every stochastic draw in the
// toolkit flows through this class; streams are derived from a master
// seed plus a stream index, so sample i of a run is reproducible in
// isolation and generation parallelizes without shared state.
class Philox {
public:
    explicit Philox(std::uint64_t key, std::uint64_t stream = 0) noexcept
        : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
          counter_{0, 0,
                   static_cast<std::uint32_t>(stream),
                   static_cast<std::uint32_t>(stream >> 32)} {}

    // One 4x32 block for the given counter/key (stateless core).
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) noexcept {
        ctr = round_(ctr, key);
        for (int r = 1; r < 10; ++r) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
            ctr = round_(ctr, key);
        }
        return ctr;
    }

    std::uint64_t next_u64() noexcept {
        if (spare_valid_) {
            spare_valid_ = false;
            return spare_;
        }
        const auto out = block(counter_, key_);
        bump_counter_();
        spare_ = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
        spare_valid_ = true;
        return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    }

    std::uint32_t next_u32() noexcept { return static_cast<std::uint32_t>(next_u64() >> 32); }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    // Uniform integer on [lo, hi], inclusive, unbiased.
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) noexcept {
        const std::uint64_t range = hi - lo + 1;
        if (range == 0) return next_u64();  // full 64-bit range
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % range + 1) % range;
        std::uint64_t x = next_u64();
        while (x > limit) x = next_u64();
        return lo + x % range;
    }

    double exponential(double rate) noexcept {
        // 1 - uniform() lies in (0, 1], so the log is finite.
        return -std::log(1.0 - uniform()) / rate;
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    // Derive an independent child generator keyed by (a, b). Used for
    // per-sample, per-retry and per-component stream splitting.
    Philox derive(std::uint64_t a, std::uint64_t b = 0) const noexcept {
        const std::array<std::uint32_t, 4> ctr{
            static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
            static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
        const auto out = block(ctr, key_);
        const std::uint64_t child_key = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
        const std::uint64_t child_stream = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
        return Philox(child_key, child_stream);
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> round_(const std::array<std::uint32_t, 4>& ctr,
                                               const std::array<std::uint32_t, 2>& key) noexcept {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        return {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                static_cast<std::uint32_t>(p1),
                static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                static_cast<std::uint32_t>(p0)};
    }

    void bump_counter_() noexcept {
        if (++counter_[0] == 0) {
            if (++counter_[1] == 0) ++counter_[2];
        }
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::uint64_t spare_ = 0;
    bool spare_valid_ = false;
};

}  // namespace supermap
