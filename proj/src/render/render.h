// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "core/exec.h"
#include "core/image.h"
#include "core/vec3.h"
#include "field/style_output.h"
#include "kernels/raster.h"
#include "mesh/mesh.h"
#include "view/camera.h"

namespace meshstyle {

class Rng;

struct RenderConfig {
    int resolution = 224;  // square training renders
    // Training default: a fresh uniform gray per render pair, so the
    // optimizer cannot exploit a fixed background color.
    bool random_background = true;
    Vec3 background{0.6, 0.6, 0.6};
    double background_gray_lo = 0.4;
    double background_gray_hi = 0.8;
    double ambient = 0.4;  // directional light fills the rest
    double sigma = 1e-4;   // rasterizer edge softness (squared NDC)
    double gamma = 1e-4;   // rasterizer depth temperature
};

// Everything the backward pass needs to chain image gradients down to the
// per-vertex style (color + displacement). Owns copies of the per-render
// buffers so it stays valid independent of the caller's mesh lifetime.
struct RenderTape {
    bool colored = false;
    std::vector<Vec3> content_normals;  // displacement directions
    std::vector<Vec3> styled_vertices;
    std::vector<Vec3> normals;          // displaced-geometry unit normals
    std::vector<double> normal_len;     // pre-normalization lengths, 0 if degenerate
    std::vector<Vec3> colors;           // colors fed to shading
    std::vector<double> shade;
    std::vector<double> rgb;            // pre-shaded per-vertex colors, 3n
    std::vector<int> faces;             // flat 3m
    ProjectedVerts proj;
    kernels::FaceBins bins;
    Vec3 light;
    double ambient = 0.4;
    Vec3 background;
    double sigma = 1e-4;
    double gamma = 1e-4;
};

// Gradients with respect to a StyleOutput, accumulated across renders.
struct StyleGrad {
    std::vector<Vec3> d_colors;
    std::vector<double> d_displacements;

    explicit StyleGrad(size_t n = 0)
        : d_colors(n, Vec3{0.0, 0.0, 0.0}), d_displacements(n, 0.0) {}
};

Vec3 draw_background(const RenderConfig& cfg, Rng& rng);

// Gouraud-shaded soft rasterization of a mesh that already carries colors
// (gray when absent). Forward only; used for anchor search, scoring, mesh
// targets and snapshots. Width/height default to cfg.resolution.
Image render_plain(const Mesh& mesh, const CameraPose& pose, const RenderConfig& cfg,
                   const Vec3& background, int width, int height, Exec exec = default_exec());

// Differentiable render of the styled content mesh. colored=false renders
// the displacement-only geometry in uniform gray, in which case the style's
// colors never enter the image (that is the gradient-routing guarantee).
struct RenderResult {
    Image image;
    RenderTape tape;
};

RenderResult render_styled(const Mesh& content, const StyleOutput& style, bool colored,
                           const CameraPose& pose, const RenderConfig& cfg,
                           const Vec3& background, Exec exec = default_exec());

// I_full (colored) and I_displ (gray) from the same pose, background and
// lighting draw.
struct RenderPairResult {
    RenderResult full;
    RenderResult displ;
};

RenderPairResult render_pair(const Mesh& content, const StyleOutput& style,
                             const CameraPose& pose, const RenderConfig& cfg,
                             const Vec3& background, Exec exec = default_exec());

// Accumulates d(loss)/d(style) into grad given d(loss)/d(image).
void render_backward(const RenderTape& tape, const Image& d_image, StyleGrad& grad,
                     Exec exec = default_exec());

}  // namespace meshstyle
