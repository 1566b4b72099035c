// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "core/vec3.h"
#include "field/style_output.h"

namespace meshstyle {

// Triangle mesh. No manifoldness or closedness requirements; degenerate
// faces are kept (they contribute nothing to normals) so vertex indexing
// stays stable for the style field.
struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::vector<Vec3> vertex_normals;  // unit length, area-weighted
    std::vector<Vec3> vertex_colors;   // empty, or one RGB in [0,1]^3 per vertex

    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_faces() const { return static_cast<int>(faces.size()); }
    bool has_colors() const { return !vertex_colors.empty(); }
};

struct MeshStats {
    int vertex_count = 0;
    int face_count = 0;
    double nonmanifold_edge_fraction = 0.0;
    double nonmanifold_vertex_fraction = 0.0;
    double boundary_edge_fraction = 0.0;
};

// Wavefront OBJ. Polygon faces are fan-triangulated; vt/vn records are
// ignored; negative face indices count back from the vertices defined so
// far. Vertex colors (the 6-number `v` extension) are kept only when every
// vertex carries them. Throws IoError and FormatError; a mesh without faces
// is a FormatError.
Mesh load_mesh(const std::string& path);

// `v x y z [r g b]` at %.17g so doubles round-trip exactly, then 1-based
// `f` records.
void export_obj(const Mesh& mesh, const std::string& path);

// ASCII PLY with uchar red/green/blue per vertex; colorless meshes export
// mid-gray.
void export_ply(const Mesh& mesh, const std::string& path);

// Area-weighted vertex normals: normalize(sum of face cross products).
// Vertices with no well-defined normal get (0,0,1).
std::vector<Vec3> compute_vertex_normals(const std::vector<Vec3>& vertices,
                                         const std::vector<std::array<int, 3>>& faces);

struct NormalizeResult {
    Mesh mesh;
    Vec3 center{0.0, 0.0, 0.0};
    double scale = 1.0;    // factor applied to the input coordinates
    bool degenerate = false;  // all vertices coincident; centered copy returned
};

// Uniform rescale so the longest bounding-box side is 1, centered at the
// origin.
NormalizeResult normalize_to_unit_box(const Mesh& mesh);

// Inserts the barycenter of every face as a new degree-3 vertex:
// n' = n + m, m' = 3m. Child faces keep the parent orientation; barycenter
// colors average the corners.
Mesh subdivide_barycentric(const Mesh& mesh);

// vertices + d * content normal per vertex; colors from the style when
// colored, uniform (0.5,0.5,0.5) otherwise. Normals are recomputed on the
// displaced geometry.
Mesh apply_style(const Mesh& mesh, const StyleOutput& style, bool colored);

// Per-vertex linear interpolation of color and displacement.
StyleOutput morph_styles(const StyleOutput& a, const StyleOutput& b, double alpha);

// Edge shared by >2 faces: nonmanifold; by exactly 1: boundary. Vertex whose
// incident-face fan is not a single disk or half-disk: nonmanifold.
MeshStats compute_stats(const Mesh& mesh);

double total_area(const Mesh& mesh);

// FNV-1a over vertex coordinates and face indices; colors and normals
// excluded. Checkpoints store this to detect mesh/field mismatches.
uint64_t mesh_hash(const Mesh& mesh);

}  // namespace meshstyle
