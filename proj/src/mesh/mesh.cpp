// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "mesh/mesh.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include "core/errors.h"
#include "core/hash.h"

namespace meshstyle {

namespace {

[[noreturn]] void format_error(const std::string& path, int line, const std::string& what) {
    throw FormatError(path + ":" + std::to_string(line) + ": " + what);
}

// Leading vertex index of an OBJ face token ("7", "7/2", "7//3", "7/2/3").
int parse_face_index(const std::string& token, const std::string& path, int line) {
    const size_t slash = token.find('/');
    const std::string head = slash == std::string::npos ? token : token.substr(0, slash);
    try {
        size_t used = 0;
        const int idx = std::stoi(head, &used);
        if (used != head.size() || idx == 0) {
            format_error(path, line, "bad face index '" + token + "'");
        }
        return idx;
    } catch (const std::logic_error&) {
        format_error(path, line, "bad face index '" + token + "'");
    }
}

}  // namespace

Mesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open mesh file: " + path);
    }
    Mesh mesh;
    std::vector<bool> has_color;
    bool any_color = false;
    bool all_color = true;

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string keyword;
        if (!(ls >> keyword) || keyword[0] == '#') {
            continue;
        }
        if (keyword == "v") {
            std::vector<double> nums;
            double x = 0.0;
            while (ls >> x) {
                nums.push_back(x);
            }
            if (nums.size() != 3 && nums.size() != 4 && nums.size() != 6) {
                format_error(path, line_no, "vertex needs 3, 4 or 6 numbers");
            }
            mesh.vertices.push_back({nums[0], nums[1], nums[2]});
            const bool colored = nums.size() == 6;
            has_color.push_back(colored);
            any_color = any_color || colored;
            all_color = all_color && colored;
            if (colored) {
                mesh.vertex_colors.push_back({nums[3], nums[4], nums[5]});
            } else {
                mesh.vertex_colors.push_back({0.0, 0.0, 0.0});
            }
        } else if (keyword == "f") {
            std::vector<int> idx;
            std::string token;
            while (ls >> token) {
                int i = parse_face_index(token, path, line_no);
                if (i < 0) {
                    // Relative to the vertices defined so far.
                    i = static_cast<int>(mesh.vertices.size()) + i;
                    if (i < 0) {
                        format_error(path, line_no, "relative index out of range");
                    }
                } else {
                    i -= 1;  // 1-based; bounds checked after the full parse
                }
                idx.push_back(i);
            }
            if (idx.size() < 3) {
                format_error(path, line_no, "face needs at least 3 indices");
            }
            for (size_t k = 1; k + 1 < idx.size(); ++k) {
                mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
            }
        }
        // Every other keyword (vn, vt, o, g, s, usemtl, mtllib, ...) is
        // intentionally ignored.
    }
    if (mesh.faces.empty()) {
        throw FormatError(path + ": mesh has no faces");
    }
    const int n = mesh.n_vertices();
    for (const auto& f : mesh.faces) {
        for (int k = 0; k < 3; ++k) {
            if (f[k] < 0 || f[k] >= n) {
                throw FormatError(path + ": face index " + std::to_string(f[k] + 1) +
                                  " out of range (1.." + std::to_string(n) + ")");
            }
        }
    }
    if (!(any_color && all_color)) {
        mesh.vertex_colors.clear();
    }
    mesh.vertex_normals = compute_vertex_normals(mesh.vertices, mesh.faces);
    return mesh;
}

void export_obj(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write mesh file: " + path);
    }
    char buf[256];
    const bool colored = mesh.has_colors();
    for (int i = 0; i < mesh.n_vertices(); ++i) {
        const Vec3& v = mesh.vertices[static_cast<size_t>(i)];
        if (colored) {
            const Vec3& c = mesh.vertex_colors[static_cast<size_t>(i)];
            std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g %.17g %.17g %.17g\n", v.x, v.y,
                          v.z, c.x, c.y, c.z);
        } else {
            std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
        }
        out << buf;
    }
    for (const auto& f : mesh.faces) {
        out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

void export_ply(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write mesh file: " + path);
    }
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << mesh.n_vertices() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out << "element face " << mesh.n_faces() << "\n";
    out << "property list uchar int vertex_indices\nend_header\n";
    char buf[256];
    for (int i = 0; i < mesh.n_vertices(); ++i) {
        const Vec3& v = mesh.vertices[static_cast<size_t>(i)];
        Vec3 c{0.5, 0.5, 0.5};
        if (mesh.has_colors()) {
            c = mesh.vertex_colors[static_cast<size_t>(i)];
        }
        const auto q = [](double x) {
            return static_cast<int>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0));
        };
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %d %d %d\n", v.x, v.y, v.z, q(c.x),
                      q(c.y), q(c.z));
        out << buf;
    }
    for (const auto& f : mesh.faces) {
        out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

std::vector<Vec3> compute_vertex_normals(const std::vector<Vec3>& vertices,
                                         const std::vector<std::array<int, 3>>& faces) {
    std::vector<Vec3> normals(vertices.size(), Vec3{0.0, 0.0, 0.0});
    for (const auto& f : faces) {
        const Vec3& a = vertices[static_cast<size_t>(f[0])];
        const Vec3& b = vertices[static_cast<size_t>(f[1])];
        const Vec3& c = vertices[static_cast<size_t>(f[2])];
        // Cross product length is twice the face area, so summing raw cross
        // products is the area weighting.
        const Vec3 fn = cross(b - a, c - a);
        for (int k = 0; k < 3; ++k) {
            normals[static_cast<size_t>(f[k])] += fn;
        }
    }
    for (auto& nrm : normals) {
        const double len = norm(nrm);
        if (len > 1e-20) {
            nrm = nrm / len;
        } else {
            nrm = Vec3{0.0, 0.0, 1.0};
        }
    }
    return normals;
}

NormalizeResult normalize_to_unit_box(const Mesh& mesh) {
    if (mesh.vertices.empty()) {
        throw ArgumentError("normalize_to_unit_box: empty mesh");
    }
    Vec3 lo = mesh.vertices[0];
    Vec3 hi = mesh.vertices[0];
    for (const Vec3& v : mesh.vertices) {
        lo = min(lo, v);
        hi = max(hi, v);
    }
    NormalizeResult res;
    res.center = (lo + hi) * 0.5;
    const Vec3 extent = hi - lo;
    const double longest = std::max({extent.x, extent.y, extent.z});
    res.degenerate = longest <= 0.0;
    res.scale = res.degenerate ? 1.0 : 1.0 / longest;
    res.mesh = mesh;
    for (Vec3& v : res.mesh.vertices) {
        v = (v - res.center) * res.scale;
    }
    res.mesh.vertex_normals = compute_vertex_normals(res.mesh.vertices, res.mesh.faces);
    return res;
}

Mesh subdivide_barycentric(const Mesh& mesh) {
    Mesh out;
    out.vertices = mesh.vertices;
    out.vertices.reserve(mesh.vertices.size() + mesh.faces.size());
    out.faces.reserve(3 * mesh.faces.size());
    if (mesh.has_colors()) {
        out.vertex_colors = mesh.vertex_colors;
        out.vertex_colors.reserve(out.vertices.capacity());
    }
    for (const auto& f : mesh.faces) {
        const int bi = static_cast<int>(out.vertices.size());
        const Vec3& a = mesh.vertices[static_cast<size_t>(f[0])];
        const Vec3& b = mesh.vertices[static_cast<size_t>(f[1])];
        const Vec3& c = mesh.vertices[static_cast<size_t>(f[2])];
        out.vertices.push_back((a + b + c) / 3.0);
        if (mesh.has_colors()) {
            const Vec3& ca = mesh.vertex_colors[static_cast<size_t>(f[0])];
            const Vec3& cb = mesh.vertex_colors[static_cast<size_t>(f[1])];
            const Vec3& cc = mesh.vertex_colors[static_cast<size_t>(f[2])];
            out.vertex_colors.push_back((ca + cb + cc) / 3.0);
        }
        out.faces.push_back({f[0], f[1], bi});
        out.faces.push_back({f[1], f[2], bi});
        out.faces.push_back({f[2], f[0], bi});
    }
    out.vertex_normals = compute_vertex_normals(out.vertices, out.faces);
    return out;
}

Mesh apply_style(const Mesh& mesh, const StyleOutput& style, bool colored) {
    const size_t n = mesh.vertices.size();
    if (style.displacements.size() != n || style.colors.size() != n) {
        throw DimensionError("apply_style: style has " + std::to_string(style.size()) +
                             " entries for " + std::to_string(n) + " vertices");
    }
    if (mesh.vertex_normals.size() != n) {
        throw DimensionError("apply_style: mesh is missing vertex normals");
    }
    Mesh out;
    out.faces = mesh.faces;
    out.vertices.resize(n);
    out.vertex_colors.resize(n);
    for (size_t i = 0; i < n; ++i) {
        out.vertices[i] = mesh.vertices[i] + mesh.vertex_normals[i] * style.displacements[i];
        out.vertex_colors[i] = colored ? style.colors[i] : Vec3{0.5, 0.5, 0.5};
    }
    out.vertex_normals = compute_vertex_normals(out.vertices, out.faces);
    return out;
}

StyleOutput morph_styles(const StyleOutput& a, const StyleOutput& b, double alpha) {
    if (a.colors.size() != b.colors.size() || a.displacements.size() != b.displacements.size()) {
        throw DimensionError("morph_styles: style sizes differ");
    }
    StyleOutput out;
    out.colors.resize(a.colors.size());
    out.displacements.resize(a.displacements.size());
    const double ia = 1.0 - alpha;
    for (size_t i = 0; i < a.colors.size(); ++i) {
        out.colors[i] = a.colors[i] * ia + b.colors[i] * alpha;
    }
    for (size_t i = 0; i < a.displacements.size(); ++i) {
        out.displacements[i] = ia * a.displacements[i] + alpha * b.displacements[i];
    }
    return out;
}

MeshStats compute_stats(const Mesh& mesh) {
    MeshStats stats;
    stats.vertex_count = mesh.n_vertices();
    stats.face_count = mesh.n_faces();

    std::map<std::pair<int, int>, int> edge_faces;
    for (const auto& f : mesh.faces) {
        for (int k = 0; k < 3; ++k) {
            const int u = f[k];
            const int v = f[(k + 1) % 3];
            ++edge_faces[{std::min(u, v), std::max(u, v)}];
        }
    }
    int boundary = 0;
    int nonmanifold = 0;
    for (const auto& [edge, count] : edge_faces) {
        if (count == 1) {
            ++boundary;
        } else if (count > 2) {
            ++nonmanifold;
        }
    }
    if (!edge_faces.empty()) {
        stats.boundary_edge_fraction = static_cast<double>(boundary) / edge_faces.size();
        stats.nonmanifold_edge_fraction = static_cast<double>(nonmanifold) / edge_faces.size();
    }

    // Link of each vertex: one edge between the two opposite corners of every
    // incident face. A manifold fan is a single cycle (disk, all link degrees
    // 2) or a single path (half-disk, exactly two degree-1 ends). Vertices
    // with no incident face count as nonmanifold.
    std::vector<std::vector<std::pair<int, int>>> links(static_cast<size_t>(mesh.n_vertices()));
    for (const auto& f : mesh.faces) {
        for (int k = 0; k < 3; ++k) {
            links[static_cast<size_t>(f[k])].push_back({f[(k + 1) % 3], f[(k + 2) % 3]});
        }
    }
    int bad_vertices = 0;
    std::map<int, int> degree;
    std::map<int, int> comp;
    for (const auto& link : links) {
        if (link.empty()) {
            ++bad_vertices;
            continue;
        }
        degree.clear();
        comp.clear();
        int next_comp = 0;
        const auto find = [&](int x) {
            while (comp[x] != x) {
                x = comp[x] = comp[comp[x]];
            }
            return x;
        };
        for (const auto& [a, b] : link) {
            for (int node : {a, b}) {
                if (comp.find(node) == comp.end()) {
                    comp[node] = node;
                    ++next_comp;
                }
            }
            ++degree[a];
            ++degree[b];
            const int ra = find(a);
            const int rb = find(b);
            if (ra != rb) {
                comp[ra] = rb;
                --next_comp;
            }
        }
        int deg1 = 0;
        bool over = false;
        for (const auto& [node, d] : degree) {
            if (d == 1) {
                ++deg1;
            } else if (d != 2) {
                over = true;
            }
        }
        const size_t nodes = degree.size();
        const size_t edges = link.size();
        const bool disk = !over && deg1 == 0 && next_comp == 1 && edges == nodes;
        const bool half_disk = !over && deg1 == 2 && next_comp == 1 && edges + 1 == nodes;
        if (!disk && !half_disk) {
            ++bad_vertices;
        }
    }
    if (mesh.n_vertices() > 0) {
        stats.nonmanifold_vertex_fraction =
            static_cast<double>(bad_vertices) / mesh.n_vertices();
    }
    return stats;
}

double total_area(const Mesh& mesh) {
    double area = 0.0;
    for (const auto& f : mesh.faces) {
        const Vec3& a = mesh.vertices[static_cast<size_t>(f[0])];
        const Vec3& b = mesh.vertices[static_cast<size_t>(f[1])];
        const Vec3& c = mesh.vertices[static_cast<size_t>(f[2])];
        area += 0.5 * norm(cross(b - a, c - a));
    }
    return area;
}

uint64_t mesh_hash(const Mesh& mesh) {
    Fnv1a h;
    h.update_value<uint64_t>(static_cast<uint64_t>(mesh.n_vertices()));
    for (const Vec3& v : mesh.vertices) {
        h.update_value(v.x);
        h.update_value(v.y);
        h.update_value(v.z);
    }
    h.update_value<uint64_t>(static_cast<uint64_t>(mesh.n_faces()));
    for (const auto& f : mesh.faces) {
        h.update_value<int32_t>(f[0]);
        h.update_value<int32_t>(f[1]);
        h.update_value<int32_t>(f[2]);
    }
    return h.digest();
}

}  // namespace meshstyle
