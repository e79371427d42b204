#pragma once
// Seeded randomness for sampling and synthesis. Every random decision in the
// pipeline flows from one root seed through named sub-streams, so runs are
// reproducible and independent features draw from independent streams.

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace duologue {

// splitmix64 (Steele, Lea, Flood 2014). Tiny state, statistically solid for
// its size, and trivially seedable, which is what matters here.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound); bound must be > 0.
    std::uint64_t below(std::uint64_t bound) { return next() % bound; }

    // Uniform integer in [lo, hi], inclusive.
    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // Uniform in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool chance(double p) { return unit() < p; }

  private:
    std::uint64_t state_;
};

// Child seed for a named stream, derived from the root seed. Distinct names
// give statistically independent streams.
std::uint64_t substream_seed(std::uint64_t root, std::string_view name);

// In-place Fisher-Yates shuffle driven by the given generator.
template <typename T>
void fisher_yates(std::vector<T>& v, SplitMix64& rng) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(v.size() - i));
        std::swap(v[i], v[j]);
    }
}

}  // namespace duologue
