// SPDX-License-Identifier: Apache-2.0
#include "baps/rng.hpp"

#include <cmath>

namespace baps {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr double kTwoPi = 6.283185307179586476925286766559;
} // namespace

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Rng::Rng(std::uint64_t seed, std::string_view tag, std::uint64_t rep) {
    std::uint64_t s = mix64(seed + kGolden * (rep + 1));
    state_ = mix64(s ^ hash_tag(tag));
}

std::uint64_t Rng::next_u64() {
    state_ += kGolden;
    return mix64(state_);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_angle() {
    return -3.14159265358979323846 + kTwoPi * uniform();
}

std::pair<double, double> Rng::normal_pair() {
    // u1 in (0, 1] so log() stays finite.
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = kTwoPi * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    auto [z0, z1] = normal_pair();
    spare_ = z1;
    has_spare_ = true;
    return z0;
}

} // namespace baps
