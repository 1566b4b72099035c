// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "view/camera.h"

#include <algorithm>
#include <cmath>

#include "core/errors.h"
#include "core/rng.h"

namespace meshstyle {

namespace {
constexpr double kPi = 3.14159265358979323846;
// 2 * pi * (2 - golden ratio), the lattice azimuth step.
constexpr double kGoldenAngle = 2.3999632297286533222;
constexpr double kPoleMargin = 1e-3;
}  // namespace

Vec3 camera_eye(const CameraPose& pose) {
    const double ce = std::cos(pose.elevation);
    return pose.look_at + Vec3{ce * std::sin(pose.azimuth), std::sin(pose.elevation),
                               ce * std::cos(pose.azimuth)} *
                              pose.distance;
}

CameraPose default_pose(const std::vector<Vec3>& vertices) {
    if (vertices.empty()) {
        throw ArgumentError("default_pose: empty mesh");
    }
    Vec3 centroid{0.0, 0.0, 0.0};
    Vec3 lo = vertices[0];
    Vec3 hi = vertices[0];
    for (const Vec3& v : vertices) {
        centroid += v;
        lo = min(lo, v);
        hi = max(hi, v);
    }
    CameraPose pose;
    pose.look_at = centroid / static_cast<double>(vertices.size());
    const double diagonal = norm(hi - lo);
    pose.distance = 2.2 * (diagonal > 0.0 ? diagonal : 1.0);
    return pose;
}

ProjectedVerts project_vertices(const std::vector<Vec3>& vertices,
                                const std::vector<std::array<int, 3>>& faces,
                                const CameraPose& pose, int width, int height) {
    ProjectedVerts p;
    p.width = width;
    p.height = height;
    p.eye = camera_eye(pose);
    p.forward = normalized(pose.look_at - p.eye);
    Vec3 right = cross(p.forward, Vec3{0.0, 1.0, 0.0});
    if (norm(right) < 1e-12) {
        right = Vec3{1.0, 0.0, 0.0};  // looking straight along y
    }
    p.right = normalized(right);
    p.up = cross(p.right, p.forward);
    p.tan_y = std::tan(pose.fov_y * 0.5);
    p.tan_x = p.tan_y * (static_cast<double>(width) / height);
    p.near = std::max(1e-3, 0.05 * pose.distance);
    p.far = 2.0 * pose.distance;

    const size_t n = vertices.size();
    p.sx.assign(n, 0.0);
    p.sy.assign(n, 0.0);
    p.zprime.assign(n, 0.0);
    p.vertex_ok.assign(n, 0);
    for (size_t i = 0; i < n; ++i) {
        const Vec3 q = vertices[i] - p.eye;
        const double zv = dot(q, p.forward);
        if (zv <= p.near) {
            continue;
        }
        const double xv = dot(q, p.right);
        const double yv = dot(q, p.up);
        p.sx[i] = (xv / (zv * p.tan_x) + 1.0) * 0.5 * width;
        p.sy[i] = (1.0 - yv / (zv * p.tan_y)) * 0.5 * height;
        p.zprime[i] = std::clamp((p.far - zv) / (p.far - p.near), 0.0, 1.0);
        p.vertex_ok[i] = 1;
    }
    p.face_valid.assign(faces.size(), 0);
    for (size_t f = 0; f < faces.size(); ++f) {
        p.face_valid[f] = p.vertex_ok[static_cast<size_t>(faces[f][0])] &&
                          p.vertex_ok[static_cast<size_t>(faces[f][1])] &&
                          p.vertex_ok[static_cast<size_t>(faces[f][2])];
    }
    return p;
}

void project_backward(const ProjectedVerts& p, const std::vector<Vec3>& vertices,
                      const std::vector<double>& d_sx, const std::vector<double>& d_sy,
                      const std::vector<double>& d_zprime, std::vector<Vec3>& d_vertices) {
    const size_t n = vertices.size();
    const double depth_scale = -1.0 / (p.far - p.near);
    for (size_t i = 0; i < n; ++i) {
        if (!p.vertex_ok[i]) {
            continue;
        }
        const Vec3 q = vertices[i] - p.eye;
        const double zv = dot(q, p.forward);
        const double xv = dot(q, p.right);
        const double yv = dot(q, p.up);

        const double dsx_dxv = 0.5 * p.width / (zv * p.tan_x);
        const double dsy_dyv = -0.5 * p.height / (zv * p.tan_y);
        const double d_xv = d_sx[i] * dsx_dxv;
        const double d_yv = d_sy[i] * dsy_dyv;
        double d_zv = -d_sx[i] * dsx_dxv * xv / zv - d_sy[i] * dsy_dyv * yv / zv;
        // The clamp on zprime is inactive whenever the vertex is strictly
        // between the near and far planes.
        const double raw_zp = (p.far - zv) / (p.far - p.near);
        if (raw_zp > 0.0 && raw_zp < 1.0) {
            d_zv += d_zprime[i] * depth_scale;
        }
        d_vertices[i] += p.right * d_xv + p.up * d_yv + p.forward * d_zv;
    }
}

std::vector<CameraPose> anchor_grid(const CameraPose& base, int count) {
    if (count < 1) {
        throw ArgumentError("anchor_grid: count must be >= 1");
    }
    std::vector<CameraPose> poses;
    poses.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double y = 1.0 - 2.0 * (i + 0.5) / count;
        CameraPose pose = base;
        pose.elevation = std::asin(std::clamp(y, -1.0, 1.0));
        pose.azimuth = std::fmod(i * kGoldenAngle, 2.0 * kPi);
        poses.push_back(pose);
    }
    return poses;
}

std::vector<CameraPose> sample_views(const CameraPose& anchor, const ViewSamplerConfig& cfg,
                                     Rng& rng) {
    if (cfg.n_theta < 1 || cfg.jitter_sd <= 0.0) {
        throw ArgumentError("sample_views: n_theta >= 1 and jitter_sd > 0 required");
    }
    std::vector<CameraPose> views;
    views.reserve(static_cast<size_t>(cfg.n_theta));
    for (int i = 0; i < cfg.n_theta; ++i) {
        CameraPose v = anchor;
        v.azimuth = anchor.azimuth + rng.normal(0.0, cfg.jitter_sd);
        v.elevation = std::clamp(anchor.elevation + rng.normal(0.0, cfg.jitter_sd),
                                 -kPi / 2.0 + kPoleMargin, kPi / 2.0 - kPoleMargin);
        views.push_back(v);
    }
    return views;
}

}  // namespace meshstyle
