// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "render/render.h"

#include <cmath>

#include "core/errors.h"
#include "core/rng.h"

namespace meshstyle {

namespace {

void check_config(const RenderConfig& cfg, int width, int height) {
    if (width < 32 || height < 32) {
        throw ArgumentError("render: resolution must be at least 32");
    }
    if (cfg.sigma <= 0.0 || cfg.gamma <= 0.0) {
        throw ArgumentError("render: sigma and gamma must be positive");
    }
    if (cfg.ambient < 0.0 || cfg.ambient > 1.0) {
        throw ArgumentError("render: ambient must be in [0, 1]");
    }
}

// Area-weighted normals of the (possibly displaced) geometry, keeping the
// pre-normalization length for the backward pass. Degenerate vertices get
// normal (0,0,1) and length 0, which drops their gradient.
void displaced_normals(const std::vector<Vec3>& vertices, const std::vector<int>& faces,
                       std::vector<Vec3>& normals, std::vector<double>& lengths) {
    normals.assign(vertices.size(), Vec3{0.0, 0.0, 0.0});
    lengths.assign(vertices.size(), 0.0);
    for (size_t f = 0; f < faces.size(); f += 3) {
        const Vec3& a = vertices[static_cast<size_t>(faces[f + 0])];
        const Vec3& b = vertices[static_cast<size_t>(faces[f + 1])];
        const Vec3& c = vertices[static_cast<size_t>(faces[f + 2])];
        const Vec3 fn = cross(b - a, c - a);
        for (int k = 0; k < 3; ++k) {
            normals[static_cast<size_t>(faces[f + k])] += fn;
        }
    }
    for (size_t i = 0; i < normals.size(); ++i) {
        const double len = norm(normals[i]);
        if (len > 1e-20) {
            lengths[i] = len;
            normals[i] = normals[i] / len;
        } else {
            lengths[i] = 0.0;
            normals[i] = Vec3{0.0, 0.0, 1.0};
        }
    }
}

// Shared forward: projection, shading, rasterization. `tape` may be null
// for plain renders.
Image render_forward(const std::vector<Vec3>& vertices, const std::vector<Vec3>& colors,
                     const std::vector<int>& faces, const CameraPose& pose,
                     const RenderConfig& cfg, const Vec3& background, int width, int height,
                     RenderTape* tape, Exec exec) {
    check_config(cfg, width, height);
    const size_t n = vertices.size();

    std::vector<Vec3> normals;
    std::vector<double> lengths;
    displaced_normals(vertices, faces, normals, lengths);

    std::vector<std::array<int, 3>> face_triples(faces.size() / 3);
    for (size_t f = 0; f < face_triples.size(); ++f) {
        face_triples[f] = {faces[3 * f], faces[3 * f + 1], faces[3 * f + 2]};
    }
    ProjectedVerts proj = project_vertices(vertices, face_triples, pose, width, height);

    // One directional light 45 degrees above the viewing direction, fixed
    // per render; ambient fills the unlit side.
    const Vec3 light = normalized(proj.up - proj.forward);
    std::vector<double> shade(n);
    std::vector<double> rgb(3 * n);
    for (size_t i = 0; i < n; ++i) {
        const double lambert = std::max(0.0, dot(normals[i], light));
        shade[i] = cfg.ambient + (1.0 - cfg.ambient) * lambert;
        for (int c = 0; c < 3; ++c) {
            rgb[3 * i + c] = colors[i][c] * shade[i];
        }
    }

    kernels::RasterScene scene;
    scene.width = width;
    scene.height = height;
    scene.n_vertices = static_cast<int>(n);
    scene.n_faces = static_cast<int>(faces.size() / 3);
    scene.sx = proj.sx.data();
    scene.sy = proj.sy.data();
    scene.zprime = proj.zprime.data();
    scene.rgb = rgb.data();
    scene.faces = faces.data();
    scene.face_valid = proj.face_valid.data();
    scene.bg[0] = background.x;
    scene.bg[1] = background.y;
    scene.bg[2] = background.z;
    scene.sigma = cfg.sigma;
    scene.gamma = cfg.gamma;

    kernels::FaceBins bins = kernels::build_face_bins(scene);
    Image image;
    kernels::rasterize_forward(scene, bins, image, exec);

    if (tape) {
        tape->styled_vertices = vertices;
        tape->normals = std::move(normals);
        tape->normal_len = std::move(lengths);
        tape->colors = colors;
        tape->shade = std::move(shade);
        tape->rgb = std::move(rgb);
        tape->faces = faces;
        tape->proj = std::move(proj);
        tape->bins = std::move(bins);
        tape->light = light;
        tape->ambient = cfg.ambient;
        tape->background = background;
        tape->sigma = cfg.sigma;
        tape->gamma = cfg.gamma;
    }
    return image;
}

std::vector<int> flat_faces(const Mesh& mesh) {
    std::vector<int> faces(static_cast<size_t>(mesh.n_faces()) * 3);
    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        faces[3 * f + 0] = mesh.faces[f][0];
        faces[3 * f + 1] = mesh.faces[f][1];
        faces[3 * f + 2] = mesh.faces[f][2];
    }
    return faces;
}

}  // namespace

Vec3 draw_background(const RenderConfig& cfg, Rng& rng) {
    if (!cfg.random_background) {
        return cfg.background;
    }
    const double g = rng.uniform(cfg.background_gray_lo, cfg.background_gray_hi);
    return Vec3{g, g, g};
}

Image render_plain(const Mesh& mesh, const CameraPose& pose, const RenderConfig& cfg,
                   const Vec3& background, int width, int height, Exec exec) {
    const std::vector<int> faces = flat_faces(mesh);
    std::vector<Vec3> colors;
    if (mesh.has_colors()) {
        colors = mesh.vertex_colors;
    } else {
        colors.assign(mesh.vertices.size(), Vec3{0.5, 0.5, 0.5});
    }
    return render_forward(mesh.vertices, colors, faces, pose, cfg, background, width, height,
                          nullptr, exec);
}

RenderResult render_styled(const Mesh& content, const StyleOutput& style, bool colored,
                           const CameraPose& pose, const RenderConfig& cfg,
                           const Vec3& background, Exec exec) {
    const size_t n = content.vertices.size();
    if (style.colors.size() != n || style.displacements.size() != n) {
        throw DimensionError("render_styled: style entry count mismatch");
    }
    if (content.vertex_normals.size() != n) {
        throw DimensionError("render_styled: content mesh is missing vertex normals");
    }
    std::vector<Vec3> displaced(n);
    for (size_t i = 0; i < n; ++i) {
        displaced[i] = content.vertices[i] + content.vertex_normals[i] * style.displacements[i];
    }
    std::vector<Vec3> colors;
    if (colored) {
        colors = style.colors;
    } else {
        colors.assign(n, Vec3{0.5, 0.5, 0.5});
    }
    RenderResult res;
    res.tape.colored = colored;
    res.tape.content_normals = content.vertex_normals;
    res.image = render_forward(displaced, colors, flat_faces(content), pose, cfg, background,
                               cfg.resolution, cfg.resolution, &res.tape, exec);
    return res;
}

RenderPairResult render_pair(const Mesh& content, const StyleOutput& style,
                             const CameraPose& pose, const RenderConfig& cfg,
                             const Vec3& background, Exec exec) {
    RenderPairResult pair;
    pair.full = render_styled(content, style, true, pose, cfg, background, exec);
    pair.displ = render_styled(content, style, false, pose, cfg, background, exec);
    return pair;
}

void render_backward(const RenderTape& tape, const Image& d_image, StyleGrad& grad, Exec exec) {
    const size_t n = tape.styled_vertices.size();
    if (grad.d_colors.size() != n || grad.d_displacements.size() != n) {
        throw DimensionError("render_backward: gradient buffer size mismatch");
    }

    kernels::RasterScene scene;
    scene.width = tape.proj.width;
    scene.height = tape.proj.height;
    scene.n_vertices = static_cast<int>(n);
    scene.n_faces = static_cast<int>(tape.faces.size() / 3);
    scene.sx = tape.proj.sx.data();
    scene.sy = tape.proj.sy.data();
    scene.zprime = tape.proj.zprime.data();
    scene.rgb = tape.rgb.data();
    scene.faces = tape.faces.data();
    scene.face_valid = tape.proj.face_valid.data();
    scene.bg[0] = tape.background.x;
    scene.bg[1] = tape.background.y;
    scene.bg[2] = tape.background.z;
    scene.sigma = tape.sigma;
    scene.gamma = tape.gamma;

    std::vector<double> d_sx(n, 0.0), d_sy(n, 0.0), d_zp(n, 0.0), d_rgb(3 * n, 0.0);
    kernels::RasterGrads rg{d_sx.data(), d_sy.data(), d_zp.data(), d_rgb.data()};
    kernels::rasterize_backward(scene, tape.bins, d_image, rg, exec);

    // Shading: rgb_v = color_v * shade_v, shade_v = ambient + (1-a) max(0, n.L).
    std::vector<Vec3> d_vertices(n, Vec3{0.0, 0.0, 0.0});
    std::vector<Vec3> d_normal(n, Vec3{0.0, 0.0, 0.0});
    for (size_t i = 0; i < n; ++i) {
        const Vec3 dc{tape.shade[i] * d_rgb[3 * i + 0], tape.shade[i] * d_rgb[3 * i + 1],
                      tape.shade[i] * d_rgb[3 * i + 2]};
        if (tape.colored) {
            grad.d_colors[i] += dc;
        }
        const double d_shade = tape.colors[i].x * d_rgb[3 * i + 0] +
                               tape.colors[i].y * d_rgb[3 * i + 1] +
                               tape.colors[i].z * d_rgb[3 * i + 2];
        if (dot(tape.normals[i], tape.light) > 0.0) {
            d_normal[i] = tape.light * ((1.0 - tape.ambient) * d_shade);
        }
    }

    // Unit-normal backward: d_g = (I - n n^T) d_n / |g|, then the summed
    // cross products distribute to the face corners.
    std::vector<Vec3> d_g(n, Vec3{0.0, 0.0, 0.0});
    for (size_t i = 0; i < n; ++i) {
        if (tape.normal_len[i] > 0.0) {
            const Vec3& nh = tape.normals[i];
            d_g[i] = (d_normal[i] - nh * dot(nh, d_normal[i])) / tape.normal_len[i];
        }
    }
    for (size_t f = 0; f < tape.faces.size(); f += 3) {
        const int ia = tape.faces[f + 0];
        const int ib = tape.faces[f + 1];
        const int ic = tape.faces[f + 2];
        const Vec3 dcr = d_g[static_cast<size_t>(ia)] + d_g[static_cast<size_t>(ib)] +
                         d_g[static_cast<size_t>(ic)];
        if (dcr.x == 0.0 && dcr.y == 0.0 && dcr.z == 0.0) {
            continue;
        }
        const Vec3& a = tape.styled_vertices[static_cast<size_t>(ia)];
        const Vec3& b = tape.styled_vertices[static_cast<size_t>(ib)];
        const Vec3& c = tape.styled_vertices[static_cast<size_t>(ic)];
        const Vec3 e1 = b - a;
        const Vec3 e2 = c - a;
        const Vec3 d_e1 = cross(e2, dcr);
        const Vec3 d_e2 = cross(dcr, e1);
        d_vertices[static_cast<size_t>(ib)] += d_e1;
        d_vertices[static_cast<size_t>(ic)] += d_e2;
        d_vertices[static_cast<size_t>(ia)] -= d_e1 + d_e2;
    }

    project_backward(tape.proj, tape.styled_vertices, d_sx, d_sy, d_zp, d_vertices);

    // Displacement chain: v' = v + d * content_normal.
    for (size_t i = 0; i < n; ++i) {
        grad.d_displacements[i] += dot(tape.content_normals[i], d_vertices[i]);
    }
}

}  // namespace meshstyle
