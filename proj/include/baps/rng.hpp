// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>
#include <utility>

namespace baps {

/// Counter-based deterministic random stream (SplitMix64 core).
///
/// Streams are keyed by (seed, tag, rep) so independent pipeline components
/// draw from disjoint substreams regardless of evaluation order. The same
/// key always reproduces the same sequence on any platform; no global state.
class Rng {
  public:
    Rng(std::uint64_t seed, std::string_view tag, std::uint64_t rep = 0);

    std::uint64_t next_u64();

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform();

    /// Uniform in [-pi, pi).
    double uniform_angle();

    /// Standard normal via Box-Muller; second value of each pair is cached.
    double normal();

    /// One Box-Muller pair (independent N(0,1) values). Bypasses the cache.
    std::pair<double, double> normal_pair();

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// 64-bit finalizer used for stream keying (SplitMix64 mix function).
std::uint64_t mix64(std::uint64_t x);

/// FNV-1a hash of a tag string.
std::uint64_t hash_tag(std::string_view tag);

} // namespace baps
