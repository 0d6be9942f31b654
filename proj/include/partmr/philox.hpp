#ifndef PARTMR_PHILOX_HPP
#define PARTMR_PHILOX_HPP

#include <array>
#include <cmath>
#include <cstdint>

namespace partmr {

// Philox4x32-10 counter-based generator (Salmon et al. round constants).
// A block is a pure function of (counter, key), which is what makes trial
// streams reproducible and independent of scheduling: we derive the key from
// the seed and put the trial number in the counter.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
        std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
        std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += w0;
        key[1] += w1;
    }
    return ctr;
}

// One reproducible random stream per (seed, trial). Each block yields two
// 64-bit uniforms; the draw index advances the counter.
class TrialRng {
public:
    TrialRng(std::uint64_t seed, std::uint64_t trial)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          trial_lo_(static_cast<std::uint32_t>(trial)),
          trial_hi_(static_cast<std::uint32_t>(trial >> 32)) {}

    double uniform01() {
        if (have_ == 0) {
            auto out = philox4x32({static_cast<std::uint32_t>(block_),
                                   static_cast<std::uint32_t>(block_ >> 32), trial_lo_, trial_hi_},
                                  key_);
            ++block_;
            words_ = out;
            have_ = 2;
        }
        --have_;
        std::uint64_t bits = (static_cast<std::uint64_t>(words_[2 * have_]) << 32) |
                             words_[2 * have_ + 1];
        return static_cast<double>(bits >> 11) * 0x1.0p-53;
    }

    // Exponential holding time; rate must be > 0.
    double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint32_t trial_lo_, trial_hi_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> words_{};
    int have_ = 0;
};

}  // namespace partmr

#endif
