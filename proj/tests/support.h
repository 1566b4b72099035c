// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "core/rng.h"
#include "core/vec3.h"
#include "mesh/mesh.h"

namespace meshstyle::test {

inline Mesh finish(Mesh mesh) {
    mesh.vertex_normals = compute_vertex_normals(mesh.vertices, mesh.faces);
    return mesh;
}

// Single CCW triangle in the z=0 plane, facing +z.
inline Mesh make_triangle() {
    Mesh m;
    m.vertices = {{-0.4, -0.3, 0.0}, {0.4, -0.3, 0.0}, {0.0, 0.4, 0.0}};
    m.faces = {{0, 1, 2}};
    return finish(m);
}

// Three triangles sharing a center vertex, slightly non-planar so normals
// and depths vary across the fan. Faces +z.
inline Mesh make_fan() {
    Mesh m;
    m.vertices = {{0.0, 0.0, 0.05},
                  {0.45, -0.25, 0.0},
                  {0.0, 0.45, -0.05},
                  {-0.45, -0.25, 0.0},
                  {0.35, 0.35, 0.02}};
    m.faces = {{0, 1, 4}, {0, 4, 2}, {0, 2, 3}};
    return finish(m);
}

// Axis-aligned cube with side `side`, centered at the origin: 8 vertices,
// 12 triangles, outward orientation.
inline Mesh make_cube(double side = 1.0) {
    const double h = side * 0.5;
    Mesh m;
    m.vertices = {{-h, -h, -h}, {h, -h, -h}, {h, h, -h}, {-h, h, -h},
                  {-h, -h, h},  {h, -h, h},  {h, h, h},  {-h, h, h}};
    m.faces = {{0, 2, 1}, {0, 3, 2},   // z = -h
               {4, 5, 6}, {4, 6, 7},   // z = +h
               {0, 1, 5}, {0, 5, 4},   // y = -h
               {2, 3, 7}, {2, 7, 6},   // y = +h
               {1, 2, 6}, {1, 6, 5},   // x = +h
               {0, 4, 7}, {0, 7, 3}};  // x = -h
    return finish(m);
}

// Lat/long sphere: `stacks` latitude bands (>= 2), `slices` longitudes.
// Face count is 2 * slices * (stacks - 1); stacks=15, slices=18 gives 504.
inline Mesh make_uv_sphere(int stacks, int slices, double radius = 0.5) {
    Mesh m;
    m.vertices.push_back({0.0, radius, 0.0});  // north pole
    for (int i = 1; i < stacks; ++i) {
        const double phi = M_PI * i / stacks;  // from +y
        for (int j = 0; j < slices; ++j) {
            const double theta = 2.0 * M_PI * j / slices;
            m.vertices.push_back({radius * std::sin(phi) * std::cos(theta),
                                  radius * std::cos(phi),
                                  radius * std::sin(phi) * std::sin(theta)});
        }
    }
    m.vertices.push_back({0.0, -radius, 0.0});  // south pole
    const auto ring = [&](int i, int j) { return 1 + (i - 1) * slices + (j % slices); };
    for (int j = 0; j < slices; ++j) {
        m.faces.push_back({0, ring(1, j + 1), ring(1, j)});
    }
    for (int i = 1; i + 1 < stacks; ++i) {
        for (int j = 0; j < slices; ++j) {
            const int a = ring(i, j), b = ring(i, j + 1);
            const int c = ring(i + 1, j), d = ring(i + 1, j + 1);
            m.faces.push_back({a, b, d});
            m.faces.push_back({a, d, c});
        }
    }
    const int south = static_cast<int>(m.vertices.size()) - 1;
    for (int j = 0; j < slices; ++j) {
        m.faces.push_back({south, ring(stacks - 1, j), ring(stacks - 1, j + 1)});
    }
    return finish(m);
}

// Torus around the y axis, 2 * major_n * minor_n faces.
inline Mesh make_torus(int major_n = 16, int minor_n = 8, double major_r = 0.35,
                       double minor_r = 0.12) {
    Mesh m;
    for (int i = 0; i < major_n; ++i) {
        const double u = 2.0 * M_PI * i / major_n;
        for (int j = 0; j < minor_n; ++j) {
            const double v = 2.0 * M_PI * j / minor_n;
            const double r = major_r + minor_r * std::cos(v);
            m.vertices.push_back({r * std::cos(u), minor_r * std::sin(v), r * std::sin(u)});
        }
    }
    const auto idx = [&](int i, int j) {
        return (i % major_n) * minor_n + (j % minor_n);
    };
    for (int i = 0; i < major_n; ++i) {
        for (int j = 0; j < minor_n; ++j) {
            const int a = idx(i, j), b = idx(i + 1, j);
            const int c = idx(i, j + 1), d = idx(i + 1, j + 1);
            m.faces.push_back({a, b, d});
            m.faces.push_back({a, d, c});
        }
    }
    return finish(m);
}

// Fresh unique directory under the system temp root, removed by the caller
// or left for post-mortem inspection (the tree lives under one session dir).
inline std::string tmp_dir(const std::string& name) {
    static std::uint64_t counter = 0;
    const auto root = std::filesystem::temp_directory_path() / "meshstyle_tests";
    const auto dir = root / (name + "_" + std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir.string();
}

inline std::string write_text(const std::string& dir, const std::string& name,
                              const std::string& body) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << body;
    return path.string();
}

inline double rel_err(double analytic, double numeric) {
    const double denom = std::max(std::abs(analytic), std::abs(numeric));
    return denom == 0.0 ? 0.0 : std::abs(analytic - numeric) / denom;
}

// Gradient comparison with an absolute floor: tiny true gradients are
// dominated by finite-difference noise, so they are compared absolutely.
inline bool grad_close(double analytic, double numeric, double rel_tol,
                       double abs_floor = 1e-7) {
    if (std::abs(analytic) < abs_floor && std::abs(numeric) < abs_floor) {
        return true;
    }
    return rel_err(analytic, numeric) < rel_tol;
}

}  // namespace meshstyle::test
