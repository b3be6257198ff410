#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace dualopt {

// Philox2x64-10 counter-based block cipher.  Streams are keyed by
// (seed, path index), so path i's draws are identical no matter how paths are
// distributed over threads.
struct Philox2x64 {
    static constexpr std::uint64_t kMult = 0xD2B74407B1CE6E93ULL;
    static constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ULL;

    static std::pair<std::uint64_t, std::uint64_t> block(std::uint64_t key, std::uint64_t c0,
                                                         std::uint64_t c1) {
        for (int round = 0; round < 10; ++round) {
            unsigned __int128 prod = static_cast<unsigned __int128>(kMult) * c0;
            std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
            std::uint64_t lo = static_cast<std::uint64_t>(prod);
            c0 = hi ^ key ^ c1;
            c1 = lo;
            key += kWeyl;
        }
        return {c0, c1};
    }
};

// Standard normal draws for one path, Box-Muller over Philox blocks.
class NormalStream {
  public:
    NormalStream(std::uint64_t seed, std::uint64_t path) : seed_(seed), path_(path) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        auto [u0, u1] = Philox2x64::block(seed_, path_, counter_++);
        double a = to_unit(u0);
        double b = to_unit(u1);
        double r = std::sqrt(-2.0 * std::log(a));
        double angle = 6.283185307179586477 * b;
        spare_ = r * std::sin(angle);
        has_spare_ = true;
        return r * std::cos(angle);
    }

  private:
    static double to_unit(std::uint64_t x) {
        // strictly inside (0,1) so the log above is finite
        return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t seed_;
    std::uint64_t path_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace dualopt
