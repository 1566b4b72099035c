// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

// Serial vs OpenMP-parallel kernel comparison. Run with
// --benchmark_filter=... to narrow; Arg(0) is Serial, Arg(1) is Parallel.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "core/image.h"
#include "core/rng.h"
#include "field/field.h"
#include "kernels/dense.h"
#include "kernels/raster.h"
#include "kernels/warp.h"

namespace {

using namespace meshstyle;

Exec arg_exec(const benchmark::State& state) {
    return state.range(0) ? Exec::Parallel : Exec::Serial;
}

void BM_DenseForward(benchmark::State& state) {
    const Exec exec = arg_exec(state);
    const int n = 2048, in = 256, out = 256;
    Rng rng(1);
    std::vector<double> x(static_cast<size_t>(n) * in), w(static_cast<size_t>(in) * out),
        b(out), y(static_cast<size_t>(n) * out);
    for (double& v : x) v = rng.normal();
    for (double& v : w) v = rng.normal();
    for (double& v : b) v = rng.normal();
    for (auto _ : state) {
        kernels::linear_forward(x.data(), w.data(), b.data(), y.data(), n, in, out, exec);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long long>(n) * in * out);
}
BENCHMARK(BM_DenseForward)->Arg(0)->Arg(1);

// A grid of camera-facing triangles covering most of the frame.
struct SyntheticScene {
    std::vector<double> sx, sy, zprime, rgb;
    std::vector<int> faces;
    std::vector<unsigned char> face_valid;
    kernels::RasterScene scene;
    kernels::FaceBins bins;
    int width, height;

    SyntheticScene(int res, int grid) : width(res), height(res) {
        Rng rng(7);
        const int verts_per_side = grid + 1;
        for (int gy = 0; gy < verts_per_side; ++gy) {
            for (int gx = 0; gx < verts_per_side; ++gx) {
                const double fx = static_cast<double>(gx) / grid;
                const double fy = static_cast<double>(gy) / grid;
                sx.push_back((0.1 + 0.8 * fx) * res);
                sy.push_back((0.1 + 0.8 * fy) * res);
                zprime.push_back(0.5 + 0.3 * rng.uniform());
                for (int c = 0; c < 3; ++c) rgb.push_back(rng.uniform());
            }
        }
        for (int gy = 0; gy < grid; ++gy) {
            for (int gx = 0; gx < grid; ++gx) {
                const int v0 = gy * verts_per_side + gx;
                const int v1 = v0 + 1;
                const int v2 = v0 + verts_per_side;
                const int v3 = v2 + 1;
                faces.insert(faces.end(), {v0, v1, v2});
                faces.insert(faces.end(), {v1, v3, v2});
            }
        }
        face_valid.assign(faces.size() / 3, 1);
        scene.width = res;
        scene.height = res;
        scene.n_vertices = static_cast<int>(sx.size());
        scene.n_faces = static_cast<int>(faces.size() / 3);
        scene.sx = sx.data();
        scene.sy = sy.data();
        scene.zprime = zprime.data();
        scene.rgb = rgb.data();
        scene.faces = faces.data();
        scene.face_valid = face_valid.data();
        scene.bg[0] = scene.bg[1] = scene.bg[2] = 0.6;
        bins = kernels::build_face_bins(scene);
    }
};

void BM_RasterForward(benchmark::State& state) {
    const Exec exec = arg_exec(state);
    SyntheticScene s(224, 24);
    Image image(s.width, s.height, 0.0);
    for (auto _ : state) {
        kernels::rasterize_forward(s.scene, s.bins, image, exec);
        benchmark::DoNotOptimize(image.data.data());
    }
    state.SetItemsProcessed(state.iterations() * s.width * s.height);
}
BENCHMARK(BM_RasterForward)->Arg(0)->Arg(1);

void BM_RasterBackward(benchmark::State& state) {
    const Exec exec = arg_exec(state);
    SyntheticScene s(224, 24);
    Image d_image(s.width, s.height, 1e-3);
    const size_t n_verts = s.sx.size();
    std::vector<double> gsx(n_verts, 0.0), gsy(n_verts, 0.0), gzp(n_verts, 0.0),
        grgb(n_verts * 3, 0.0);
    kernels::RasterGrads grads{gsx.data(), gsy.data(), gzp.data(), grgb.data()};
    for (auto _ : state) {
        kernels::rasterize_backward(s.scene, s.bins, d_image, grads, exec);
        benchmark::DoNotOptimize(gsx.data());
    }
    state.SetItemsProcessed(state.iterations() * s.width * s.height);
}
BENCHMARK(BM_RasterBackward)->Arg(0)->Arg(1);

void BM_WarpForward(benchmark::State& state) {
    const Exec exec = arg_exec(state);
    Rng rng(3);
    Image in(224, 224, 0.0);
    for (double& v : in.data) v = rng.uniform();
    // Mild projective map.
    const double H[9] = {1.02, 0.01, -2.0, -0.015, 0.99, 1.5, 1e-5, -2e-5, 1.0};
    Image out;
    out.width = 224;
    out.height = 224;
    for (auto _ : state) {
        kernels::warp_forward(in, H, out, exec);
        benchmark::DoNotOptimize(out.data.data());
    }
    state.SetItemsProcessed(state.iterations() * 224 * 224);
}
BENCHMARK(BM_WarpForward)->Arg(0)->Arg(1);

void BM_FieldEvaluate(benchmark::State& state) {
    const Exec exec = arg_exec(state);
    StyleFieldConfig cfg;
    cfg.encoding.rng_seed = 11;
    StyleField field = StyleField::create(cfg);
    Rng rng(5);
    std::vector<Vec3> points(5000);
    for (Vec3& p : points) {
        p = Vec3{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    }
    for (auto _ : state) {
        StyleOutput out = field.evaluate(points, exec);
        benchmark::DoNotOptimize(out.colors.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long long>(points.size()));
}
BENCHMARK(BM_FieldEvaluate)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
