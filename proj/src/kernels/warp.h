// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "core/exec.h"
#include "core/image.h"

namespace meshstyle::kernels {

// out(x, y) = in(H * (x, y, 1)) with bilinear filtering. H is row-major 3x3
// and maps output pixel coordinates to input pixel coordinates; integer
// coordinates address pixel centers. Samples falling outside the input
// replicate the nearest border pixel. Crops and resizes are expressed as
// affine H, so this is the only resampling kernel. The caller sets
// out.width and out.height; the data buffer is (re)allocated here.
void warp_forward(const Image& in, const double H[9], Image& out, Exec exec);

// Accumulates (+=) into d_in, which must match the forward input shape.
// The warp is linear in the pixel values; H carries no gradient.
void warp_backward(int in_width, int in_height, const double H[9], const Image& d_out,
                   Image& d_in, Exec exec);

// k x k mean pooling; in.width and in.height must be divisible by k.
void avg_pool_forward(const Image& in, int k, Image& out, Exec exec);

// Accumulates (+=) into d_in of shape (k * d_out.width, k * d_out.height).
void avg_pool_backward(const Image& d_out, int k, Image& d_in, Exec exec);

}  // namespace meshstyle::kernels
