// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "core/vec3.h"

namespace meshstyle {

// Orbit camera: the eye sits at `distance` from look_at along the direction
// given by azimuth/elevation in a y-up frame, looking back at look_at.
struct CameraPose {
    double azimuth = 0.0;    // radians, 0 looks down -z toward +z eye
    double elevation = 0.0;  // radians, in (-pi/2, pi/2)
    double distance = 1.0;   // model units, > 0
    double fov_y = 1.0471975511965976;  // 60 degrees
    Vec3 look_at{0.0, 0.0, 0.0};
};

struct ViewSamplerConfig {
    int n_theta = 5;
    double jitter_sd = 0.7853981633974483;  // pi/4
    int anchor_grid_count = 100;
    std::uint64_t rng_seed = 0;
};

Vec3 camera_eye(const CameraPose& pose);

// A pose framing the whole mesh: look_at at the vertex centroid, distance
// 2.2 x bounding-box diagonal, 60 degree vertical fov. Azimuth/elevation 0.
CameraPose default_pose(const std::vector<Vec3>& vertices);

// Screen-space vertex data plus everything projection backward needs. Depth
// zprime is normalized to [0, 1] with larger values nearer, which is the
// convention the rasterizer's depth softmax expects. Faces touching a vertex
// at or behind the near plane are marked invalid and skipped entirely.
struct ProjectedVerts {
    int width = 0;
    int height = 0;
    std::vector<double> sx, sy, zprime;     // per vertex
    std::vector<unsigned char> vertex_ok;   // in front of the near plane
    std::vector<unsigned char> face_valid;  // all three vertices ok
    Vec3 eye, right, up, forward;
    double near = 0.0;
    double far = 0.0;
    double tan_x = 0.0;  // tan(fov/2) * aspect
    double tan_y = 0.0;  // tan(fov/2)
};

ProjectedVerts project_vertices(const std::vector<Vec3>& vertices,
                                const std::vector<std::array<int, 3>>& faces,
                                const CameraPose& pose, int width, int height);

// Chains screen-space gradients back to 3D vertex positions, accumulating
// (+=) into d_vertices. Gradients on invalid vertices are dropped (their
// faces never rasterized).
void project_backward(const ProjectedVerts& proj, const std::vector<Vec3>& vertices,
                      const std::vector<double>& d_sx, const std::vector<double>& d_sy,
                      const std::vector<double>& d_zprime, std::vector<Vec3>& d_vertices);

// Near-uniform directions on the sphere (Fibonacci lattice), returned as
// poses copying distance/fov/look_at from `base`. Index order is the
// tie-break order for anchor selection.
std::vector<CameraPose> anchor_grid(const CameraPose& base, int count);

class Rng;
// Independent Gaussian jitter on azimuth and elevation around the anchor;
// elevation clamped away from the poles.
std::vector<CameraPose> sample_views(const CameraPose& anchor, const ViewSamplerConfig& cfg,
                                     Rng& rng);

}  // namespace meshstyle
