#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace perfodom {

/// Philox4x32-10 counter-based generator. Streams are keyed by
/// (seed, stream). Bit-exact across platforms; replicas draw from
/// independent substreams so results never depend on scheduling.
class Rng {
  public:
    explicit Rng(uint64_t seed, uint64_t stream = 0) : key0_((uint32_t)seed), key1_((uint32_t)(seed >> 32)) {
        ctr_[0] = 0;
        ctr_[1] = 0;
        ctr_[2] = (uint32_t)stream;
        ctr_[3] = (uint32_t)(stream >> 32);
        have_ = 0;
    }

    uint32_t next_u32() {
        if (have_ == 0) {
            block();
            have_ = 4;
        }
        return out_[4 - have_--];
    }

    uint64_t next_u64() {
        uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform in [0,1).
    double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard exponential via inversion.
    double exponential() { return -std::log1p(-uniform()); }

    double normal() {
        // Box-Muller, one value per call for stream stability
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Exact Poisson sample via chunked product method.
    uint64_t poisson(double mean) {
        if (!(mean >= 0)) throw std::invalid_argument("poisson: negative mean");
        uint64_t n = 0;
        while (mean > 0) {
            double chunk = mean > 500.0 ? 500.0 : mean;
            mean -= chunk;
            double limit = std::exp(-chunk);
            double prod = uniform();
            while (prod > limit) {
                ++n;
                prod *= uniform();
            }
        }
        return n;
    }

  private:
    static uint32_t mulhi(uint32_t a, uint32_t b) { return (uint32_t)(((uint64_t)a * b) >> 32); }

    void block() {
        uint32_t c0 = ctr_[0], c1 = ctr_[1], c2 = ctr_[2], c3 = ctr_[3];
        uint32_t k0 = key0_, k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            uint32_t hi0 = mulhi(0xD2511F53u, c0), lo0 = 0xD2511F53u * c0;
            uint32_t hi1 = mulhi(0xCD9E8D57u, c2), lo1 = 0xCD9E8D57u * c2;
            uint32_t n0 = hi1 ^ c1 ^ k0, n1 = lo1, n2 = hi0 ^ c3 ^ k1, n3 = lo0;
            c0 = n0;
            c1 = n1;
            c2 = n2;
            c3 = n3;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        out_[0] = c0;
        out_[1] = c1;
        out_[2] = c2;
        out_[3] = c3;
        // 64-bit block counter; never carries into the stream field
        if (++ctr_[0] == 0) ++ctr_[1];
    }

    uint32_t key0_, key1_;
    uint32_t ctr_[4];
    uint32_t out_[4];
    int have_;
};

}  // namespace perfodom
