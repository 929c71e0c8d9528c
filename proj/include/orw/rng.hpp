#pragma once

#include <cmath>
#include <cstdint>

namespace orw {

// Counter-based generator: one independent stream per (seed, stream id) pair.
// Each draw hashes a counter, so replicas are reproducible independently of
// scheduling or thread count.
inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
}

class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : base_(mix64(seed ^ mix64(stream + 0x9e3779b97f4a7c15ULL))), ctr_(0) {}

    std::uint64_t next_u64() {
        ctr_ += 0x9e3779b97f4a7c15ULL;
        return mix64(base_ ^ ctr_);
    }

    // Uniform on [0, 1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; second value cached.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u = 0.0;
        while (u == 0.0) u = next_unit();
        double v = next_unit();
        double r = std::sqrt(-2.0 * std::log(u));
        double a = 6.283185307179586476925286766559 * v;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Geometric on {0,1,2,...} with P(N = n) = e^{-c n} (1 - e^{-c}).
    std::uint64_t next_geometric_rate(double c) {
        double u = 0.0;
        while (u == 0.0) u = next_unit();
        return static_cast<std::uint64_t>(std::floor(-std::log(u) / c));
    }

  private:
    std::uint64_t base_;
    std::uint64_t ctr_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace orw
