// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "core/exec.h"
#include "core/matrix.h"
#include "core/vec3.h"

namespace meshstyle {

// Fourier feature map gamma(p) = [cos(2 pi B p), sin(2 pi B p)] with
// B in R^{k x 3} drawn once from N(0, sigma_b^2) and never trained.
// sigma_b sets the spatial frequency of the style details the field can
// express. Symmetry axes replace the coordinate by its absolute value
// before encoding, which makes the field mirror-symmetric in that plane.
struct EncodingConfig {
    int k = 128;  // feature dimension is 2k
    double sigma_b = 5.0;
    bool symmetry_x = false;
    bool symmetry_y = false;
    bool symmetry_z = false;
    std::uint64_t rng_seed = 0;
};

Matrix make_encoding_matrix(const EncodingConfig& cfg);  // k x 3

inline Vec3 apply_symmetry(const EncodingConfig& cfg, Vec3 p) {
    if (cfg.symmetry_x) p.x = std::abs(p.x);
    if (cfg.symmetry_y) p.y = std::abs(p.y);
    if (cfg.symmetry_z) p.z = std::abs(p.z);
    return p;
}

// Row i of `out` (n x 2k): k cosines then k sines. The symmetry pre-map is
// applied here.
void encode_points(const Vec3* points, int n, const Matrix& B, const EncodingConfig& cfg,
                   Matrix& out, Exec exec);

// Mean over points, features and coordinates of |d gamma / d p|, the
// spectral-control surrogate: larger sigma_b must strictly increase it.
double mean_abs_encode_gradient(const Vec3* points, int n, const Matrix& B,
                                const EncodingConfig& cfg);

}  // namespace meshstyle
