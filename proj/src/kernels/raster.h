// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "core/exec.h"
#include "core/image.h"

namespace meshstyle::kernels {

// Screen-space soft rasterizer. Coverage per (pixel, face) is a sigmoid of
// the signed squared distance to the triangle boundary; faces and the
// background are blended with a depth softmax. Both make the image a smooth
// function of vertex screen positions, depths and colors, which is what the
// hand-written backward pass differentiates.
//
// All inputs are borrowed; the caller owns the buffers for the duration of
// the call.
struct RasterScene {
    int width = 0;
    int height = 0;
    int n_vertices = 0;
    int n_faces = 0;
    const double* sx = nullptr;            // [n] pixel x of each vertex
    const double* sy = nullptr;            // [n] pixel y (top-down)
    const double* zprime = nullptr;        // [n] normalized depth, near -> 1
    const double* rgb = nullptr;           // [3n] pre-shaded vertex colors
    const int* faces = nullptr;            // [3m]
    const unsigned char* face_valid = nullptr;  // [m], null => all valid
    double bg[3] = {0.0, 0.0, 0.0};
    double sigma = 1e-4;   // edge softness, squared NDC units
    double gamma = 1e-4;   // depth blend temperature
};

// Contributions with coverage sigmoid below exp(-kSoftCutoff) are dropped;
// face bounding boxes are dilated to exactly that radius, so forward and
// backward agree on the support of every face.
inline constexpr double kSoftCutoff = 30.0;

// Per-tile face lists (CSR). Built once per rendered frame and shared by the
// forward and backward passes.
struct FaceBins {
    int tile = 16;
    int tiles_x = 0;
    int tiles_y = 0;
    std::vector<int> offsets;  // tiles_x * tiles_y + 1
    std::vector<int> faces;    // face ids, bin-major, ascending within a bin
};

FaceBins build_face_bins(const RasterScene& scene);

void rasterize_forward(const RasterScene& scene, const FaceBins& bins, Image& out, Exec exec);

// Gradients are accumulated (+=) into the caller's buffers.
struct RasterGrads {
    double* sx = nullptr;      // [n]
    double* sy = nullptr;      // [n]
    double* zprime = nullptr;  // [n]
    double* rgb = nullptr;     // [3n]
};

void rasterize_backward(const RasterScene& scene, const FaceBins& bins, const Image& d_image,
                        const RasterGrads& grads, Exec exec);

}  // namespace meshstyle::kernels
