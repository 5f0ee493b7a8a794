#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace gdvae {

// Deterministic random source. mt19937_64 supplies raw bits; all shaping
// (uniform, normal, integer range, shuffle) is done here with explicit
// arithmetic, so streams are reproducible across standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform integer on [0, n). Rejection sampling, no modulo bias.
    int uniform_int(int n) {
        uint64_t un = static_cast<uint64_t>(n);
        uint64_t limit = UINT64_MAX - UINT64_MAX % un;
        uint64_t x;
        do { x = eng_(); } while (x >= limit);
        return static_cast<int>(x % un);
    }

    // Standard normal, Box-Muller with one cached draw.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Fisher-Yates, iteration order fixed.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (size_t i = items.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(static_cast<int>(i)));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Stable seed for a named substream of a base seed. Distinct stream names
// give decorrelated generators; same (base, name) always gives the same seed.
uint64_t derive_seed(uint64_t base, std::string_view stream);

}  // namespace gdvae
