// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>

namespace meshstyle {

// Deterministic generator (xoshiro256++ seeded via splitmix64). The standard
// library distributions are implementation-defined, so uniform/normal draws
// are produced here directly to keep runs reproducible across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi);

    // Inclusive integer range.
    int uniform_int(int lo, int hi);

    // Standard normal via Box-Muller (second value cached).
    double normal();
    double normal(double mean, double sd);

    // Derives an independent substream; `purpose` keeps draws for different
    // pipeline stages decoupled from each other and from call order.
    static Rng stream(std::uint64_t seed, std::string_view purpose, std::uint64_t index = 0);

private:
    std::uint64_t state_[4];
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace meshstyle
