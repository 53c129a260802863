#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hoigs {

// Seeded RNG with a fixed bit-to-double mapping so identical seeds give
// identical streams on every platform (std distributions are
// implementation-defined, so we roll uniform/normal by hand).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Box-Muller, spare value cached.
    double normal(double mu = 0.0, double sigma = 1.0) {
        if (has_spare_) {
            has_spare_ = false;
            return mu + sigma * spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return mu + sigma * r * std::cos(a);
    }

    std::uint64_t next_u64() { return gen_(); }

    int uniform_int(int lo, int hi) { // inclusive bounds
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(gen_() % span);
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace hoigs
