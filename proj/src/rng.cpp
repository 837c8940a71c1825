#include "cwbell/rng.hpp"

#include <cmath>
#include <numbers>

namespace cwbell {

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
    // FNV-1a over the stream name, mixed with the master seed
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : stream) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(splitmix64(seed) ^ h);
}

double Rng::exponential(double rate) { return -std::log(uniform_pos()) / rate; }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

}  // namespace cwbell
