#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cwbell {

// SplitMix64 finalizer, used to derive independent sub-stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

// mt19937_64 with explicitly defined transforms so that output does not
// depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    Rng(std::uint64_t seed, std::string_view stream) : eng_(derive_seed(seed, stream)) {}

    std::uint64_t next() { return eng_(); }
    // [0, 1) with 53 random bits
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    // (0, 1]
    double uniform_pos() { return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53; }
    bool bernoulli(double p) { return uniform() < p; }
    int bit() { return static_cast<int>(eng_() >> 63); }
    double exponential(double rate);
    double normal();

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace cwbell
