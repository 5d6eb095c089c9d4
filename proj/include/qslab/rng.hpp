#pragma once

#include <cmath>
#include <cstdint>

namespace qslab {

// Philox 4x32-10 counter-based generator (Salmon et al., SC 2011).
//
// A stream is identified by the pair (seed, stream id). The seed forms the
// Philox key and the stream id occupies the upper counter words, so distinct
// streams index disjoint counter blocks and never overlap. Draws within a
// stream walk consecutive 128-bit blocks. Everything is a pure function of
// (seed, stream, draw index); thread scheduling cannot change any result.
class PhiloxStream {
public:
    PhiloxStream(std::uint64_t seed, std::uint64_t stream) {
        key_[0] = static_cast<std::uint32_t>(seed);
        key_[1] = static_cast<std::uint32_t>(seed >> 32);
        ctr_[0] = 0;
        ctr_[1] = 0;
        ctr_[2] = static_cast<std::uint32_t>(stream);
        ctr_[3] = static_cast<std::uint32_t>(stream >> 32);
    }

    std::uint32_t next_u32() {
        if (idx_ == 4) next_block();
        return out_[idx_++];
    }

    std::uint64_t next_u64() {
        std::uint64_t lo = next_u32();
        std::uint64_t hi = next_u32();
        return lo | (hi << 32);
    }

    // Uniform draw in (0, 1]; the closed right endpoint keeps log(u) finite.
    double uniform01() {
        return static_cast<double>((next_u64() >> 11) + 1ULL) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the second variate of each pair is cached.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double th = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(th);
        have_cached_ = true;
        return r * std::cos(th);
    }

    double exponential(double rate) {
        return -std::log(uniform01()) / rate;
    }

private:
    static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
    static constexpr std::uint32_t kWeylB = 0xBB67AE85u;
    static constexpr std::uint32_t kMulA = 0xD2511F53u;
    static constexpr std::uint32_t kMulB = 0xCD9E8D57u;

    static void mul_hi_lo(std::uint32_t a, std::uint32_t b,
                          std::uint32_t& lo, std::uint32_t& hi) {
        std::uint64_t p = static_cast<std::uint64_t>(a) * b;
        lo = static_cast<std::uint32_t>(p);
        hi = static_cast<std::uint32_t>(p >> 32);
    }

    static void round_once(std::uint32_t x[4], const std::uint32_t k[2]) {
        std::uint32_t lo0, hi0, lo1, hi1;
        mul_hi_lo(kMulA, x[0], lo0, hi0);
        mul_hi_lo(kMulB, x[2], lo1, hi1);
        std::uint32_t y0 = hi1 ^ x[1] ^ k[0];
        std::uint32_t y1 = lo1;
        std::uint32_t y2 = hi0 ^ x[3] ^ k[1];
        std::uint32_t y3 = lo0;
        x[0] = y0;
        x[1] = y1;
        x[2] = y2;
        x[3] = y3;
    }

    void next_block() {
        std::uint32_t k[2] = {key_[0], key_[1]};
        out_[0] = ctr_[0];
        out_[1] = ctr_[1];
        out_[2] = ctr_[2];
        out_[3] = ctr_[3];
        for (int i = 0; i < 10; ++i) {
            round_once(out_, k);
            k[0] += kWeylA;
            k[1] += kWeylB;
        }
        // 64-bit block index within the stream.
        if (++ctr_[0] == 0) ++ctr_[1];
        idx_ = 0;
    }

    std::uint32_t ctr_[4];
    std::uint32_t key_[2];
    std::uint32_t out_[4] = {0, 0, 0, 0};
    int idx_ = 4;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace qslab
