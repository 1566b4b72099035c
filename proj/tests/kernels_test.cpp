// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <vector>

#include "core/image.h"
#include "core/rng.h"
#include "kernels/dense.h"
#include "kernels/raster.h"
#include "kernels/warp.h"
#include "support.h"

using namespace meshstyle;
using namespace meshstyle::kernels;
using meshstyle::test::grad_close;

namespace {

std::vector<double> random_vec(size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

// A small two-triangle scene with vertices in general position, used by the
// rasterizer gradient checks.
struct Scene {
    int width = 24, height = 24;
    std::vector<double> sx, sy, zprime, rgb;
    std::vector<int> faces;
    std::vector<unsigned char> face_valid;

    RasterScene view(double bg_r = 0.2, double bg_g = 0.3, double bg_b = 0.4) const {
        RasterScene s;
        s.width = width;
        s.height = height;
        s.n_vertices = static_cast<int>(sx.size());
        s.n_faces = static_cast<int>(faces.size() / 3);
        s.sx = sx.data();
        s.sy = sy.data();
        s.zprime = zprime.data();
        s.rgb = rgb.data();
        s.faces = faces.data();
        s.face_valid = face_valid.empty() ? nullptr : face_valid.data();
        s.bg[0] = bg_r;
        s.bg[1] = bg_g;
        s.bg[2] = bg_b;
        return s;
    }
};

Scene make_scene() {
    Scene s;
    s.sx = {3.2, 20.5, 11.8, 21.0, 14.3};
    s.sy = {19.7, 18.9, 3.4, 4.2, 21.6};
    s.zprime = {0.55, 0.48, 0.62, 0.40, 0.51};
    s.faces = {0, 1, 2, 1, 3, 4};
    s.rgb = {0.9, 0.1, 0.2, 0.15, 0.8, 0.3, 0.2, 0.3, 0.95, 0.7, 0.7, 0.1, 0.4, 0.9, 0.6};
    return s;
}

double image_dot(const Image& a, const std::vector<double>& r) {
    double s = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * r[i];
    return s;
}

Image raster_run(const Scene& s, Exec exec = Exec::Serial) {
    const RasterScene scene = s.view();
    const FaceBins bins = build_face_bins(scene);
    Image out(s.width, s.height);
    rasterize_forward(scene, bins, out, exec);
    return out;
}

}  // namespace

TEST_CASE("linear_forward matches a hand-computed example", "[kernels]") {
    const double x[2] = {1.0, 2.0};
    const double w[6] = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};  // 2x3 row-major
    const double b[3] = {0.5, -0.5, 0.0};
    double y[3] = {};
    linear_forward(x, w, b, y, 1, 2, 3, Exec::Serial);
    CHECK(y[0] == Catch::Approx(9.5).epsilon(1e-14));
    CHECK(y[1] == Catch::Approx(11.5).epsilon(1e-14));
    CHECK(y[2] == Catch::Approx(15.0).epsilon(1e-14));

    double y_nb[3] = {};
    linear_forward(x, w, nullptr, y_nb, 1, 2, 3, Exec::Serial);
    CHECK(y_nb[0] == Catch::Approx(9.0).epsilon(1e-14));
}

TEST_CASE("linear backward kernels match finite differences", "[kernels]") {
    const int n = 4, in = 5, out = 3;
    Rng rng(7);
    std::vector<double> x = random_vec(n * in, rng);
    std::vector<double> w = random_vec(in * out, rng);
    std::vector<double> b = random_vec(out, rng);
    std::vector<double> t = random_vec(n * out, rng);  // loss = sum(y * t)

    const auto loss = [&](const std::vector<double>& xv, const std::vector<double>& wv) {
        std::vector<double> y(n * out);
        linear_forward(xv.data(), wv.data(), b.data(), y.data(), n, in, out, Exec::Serial);
        double s = 0.0;
        for (int i = 0; i < n * out; ++i) s += y[i] * t[i];
        return s;
    };

    std::vector<double> dw(in * out, 0.0), db(out, 0.0), dx(n * in);
    linear_backward_params(x.data(), t.data(), dw.data(), db.data(), n, in, out, Exec::Serial);
    linear_backward_input(t.data(), w.data(), dx.data(), n, in, out, Exec::Serial);

    const double h = 1e-6;
    for (int i = 0; i < in * out; ++i) {
        std::vector<double> wp = w, wm = w;
        wp[i] += h;
        wm[i] -= h;
        const double fd = (loss(x, wp) - loss(x, wm)) / (2 * h);
        REQUIRE(grad_close(dw[i], fd, 1e-6));
    }
    for (int i = 0; i < n * in; ++i) {
        std::vector<double> xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = (loss(xp, w) - loss(xm, w)) / (2 * h);
        REQUIRE(grad_close(dx[i], fd, 1e-6));
    }
    // db is the column sums of dy.
    for (int j = 0; j < out; ++j) {
        double expect = 0.0;
        for (int i = 0; i < n; ++i) expect += t[i * out + j];
        REQUIRE(db[j] == Catch::Approx(expect).margin(1e-12));
    }
}

TEST_CASE("linear_backward_params accumulates across calls", "[kernels]") {
    Rng rng(11);
    const int n = 2, in = 3, out = 2;
    std::vector<double> x = random_vec(n * in, rng);
    std::vector<double> dy = random_vec(n * out, rng);
    std::vector<double> once(in * out, 0.0), twice(in * out, 0.0);
    std::vector<double> db1(out, 0.0), db2(out, 0.0);
    linear_backward_params(x.data(), dy.data(), once.data(), db1.data(), n, in, out,
                           Exec::Serial);
    linear_backward_params(x.data(), dy.data(), twice.data(), db2.data(), n, in, out,
                           Exec::Serial);
    linear_backward_params(x.data(), dy.data(), twice.data(), db2.data(), n, in, out,
                           Exec::Serial);
    for (int i = 0; i < in * out; ++i) {
        REQUIRE(twice[i] == Catch::Approx(2.0 * once[i]).margin(1e-15));
    }
    for (int j = 0; j < out; ++j) {
        REQUIRE(db2[j] == Catch::Approx(2.0 * db1[j]).margin(1e-15));
    }
}

TEST_CASE("relu forward and backward", "[kernels]") {
    const double x[5] = {-1.0, 0.0, 2.0, -0.5, 3.5};
    const double dy[5] = {1.0, 1.0, 0.5, 2.0, -1.0};
    double y[5], dx[5];
    relu_forward(x, y, 5, Exec::Serial);
    relu_backward(x, dy, dx, 5, Exec::Serial);
    const double y_expect[5] = {0.0, 0.0, 2.0, 0.0, 3.5};
    const double dx_expect[5] = {0.0, 0.0, 0.5, 0.0, -1.0};
    for (int i = 0; i < 5; ++i) {
        CHECK(y[i] == y_expect[i]);
        CHECK(dx[i] == dx_expect[i]);
    }
}

TEST_CASE("dense kernels: Serial and Parallel are bit-identical", "[kernels]") {
    Rng rng(23);
    const int n = 37, in = 29, out = 31;
    std::vector<double> x = random_vec(n * in, rng);
    std::vector<double> w = random_vec(in * out, rng);
    std::vector<double> b = random_vec(out, rng);
    std::vector<double> dy = random_vec(n * out, rng);

    std::vector<double> y_s(n * out), y_p(n * out);
    linear_forward(x.data(), w.data(), b.data(), y_s.data(), n, in, out, Exec::Serial);
    linear_forward(x.data(), w.data(), b.data(), y_p.data(), n, in, out, Exec::Parallel);
    REQUIRE(std::memcmp(y_s.data(), y_p.data(), y_s.size() * sizeof(double)) == 0);

    std::vector<double> dx_s(n * in), dx_p(n * in);
    linear_backward_input(dy.data(), w.data(), dx_s.data(), n, in, out, Exec::Serial);
    linear_backward_input(dy.data(), w.data(), dx_p.data(), n, in, out, Exec::Parallel);
    REQUIRE(std::memcmp(dx_s.data(), dx_p.data(), dx_s.size() * sizeof(double)) == 0);

    std::vector<double> dw_s(in * out, 0.0), dw_p(in * out, 0.0);
    std::vector<double> db_s(out, 0.0), db_p(out, 0.0);
    linear_backward_params(x.data(), dy.data(), dw_s.data(), db_s.data(), n, in, out,
                           Exec::Serial);
    linear_backward_params(x.data(), dy.data(), dw_p.data(), db_p.data(), n, in, out,
                           Exec::Parallel);
    REQUIRE(std::memcmp(dw_s.data(), dw_p.data(), dw_s.size() * sizeof(double)) == 0);
    REQUIRE(std::memcmp(db_s.data(), db_p.data(), db_s.size() * sizeof(double)) == 0);

    std::vector<double> r_s(n * in), r_p(n * in);
    relu_forward(x.data(), r_s.data(), n * in, Exec::Serial);
    relu_forward(x.data(), r_p.data(), n * in, Exec::Parallel);
    REQUIRE(std::memcmp(r_s.data(), r_p.data(), r_s.size() * sizeof(double)) == 0);
}

TEST_CASE("warp_forward with the identity map reproduces the input", "[kernels]") {
    Rng rng(3);
    Image in(9, 9);
    for (double& v : in.data) v = rng.uniform();
    const double H[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    Image out;
    out.width = 9;
    out.height = 9;
    warp_forward(in, H, out, Exec::Serial);
    REQUIRE(out.data == in.data);
}

TEST_CASE("warp_forward translates and replicates the border", "[kernels]") {
    Image in(4, 4);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) {
            in.at(y, x, 0) = y * 4 + x;
        }
    }
    // out(x, y) = in(x + 1, y): integer shift, exact under bilinear.
    const double H[9] = {1, 0, 1, 0, 1, 0, 0, 0, 1};
    Image out;
    out.width = 4;
    out.height = 4;
    warp_forward(in, H, out, Exec::Serial);
    CHECK(out.at(0, 0, 0) == 1.0);
    CHECK(out.at(0, 2, 0) == 3.0);
    // x=3 samples in(4, y), clamped to the border column x=3.
    CHECK(out.at(0, 3, 0) == 3.0);
    CHECK(out.at(2, 3, 0) == 11.0);
}

TEST_CASE("warp_backward is the exact adjoint of warp_forward", "[kernels]") {
    Rng rng(5);
    Image in(11, 7);
    for (double& v : in.data) v = rng.uniform();
    // Mildly projective map exercising bilinear weights and border clamps.
    const double H[9] = {0.92, 0.08, 0.4, -0.05, 1.04, -0.3, 0.003, -0.002, 1.0};
    Image out;
    out.width = 10;
    out.height = 8;
    warp_forward(in, H, out, Exec::Serial);

    Image d_out(10, 8);
    for (double& v : d_out.data) v = rng.uniform(-1.0, 1.0);
    Image d_in(11, 7, 0.0);
    warp_backward(in.width, in.height, H, d_out, d_in, Exec::Serial);

    // <warp(in), d_out> == <in, warp^T(d_out)> because warp is linear.
    CHECK(image_dot(out, d_out.data) ==
          Catch::Approx(image_dot(in, d_in.data)).epsilon(1e-12));

    // Accumulation: a second backward doubles d_in.
    Image d_in2 = d_in;
    warp_backward(in.width, in.height, H, d_out, d_in2, Exec::Serial);
    for (size_t i = 0; i < d_in.data.size(); ++i) {
        REQUIRE(d_in2.data[i] == Catch::Approx(2.0 * d_in.data[i]).margin(1e-15));
    }
}

TEST_CASE("warp kernels: Serial and Parallel are bit-identical", "[kernels]") {
    Rng rng(9);
    Image in(16, 16);
    for (double& v : in.data) v = rng.uniform();
    const double H[9] = {0.8, 0.1, 1.0, -0.1, 0.9, 0.5, 0.001, 0.002, 1.0};
    Image a, b;
    a.width = b.width = 14;
    a.height = b.height = 15;
    warp_forward(in, H, a, Exec::Serial);
    warp_forward(in, H, b, Exec::Parallel);
    REQUIRE(a.data == b.data);

    Image d_out(14, 15);
    for (double& v : d_out.data) v = rng.uniform(-1.0, 1.0);
    Image gs(16, 16, 0.0), gp(16, 16, 0.0);
    warp_backward(16, 16, H, d_out, gs, Exec::Serial);
    warp_backward(16, 16, H, d_out, gp, Exec::Parallel);
    REQUIRE(gs.data == gp.data);
}

TEST_CASE("avg_pool computes block means and an exact adjoint", "[kernels]") {
    Image in(4, 4);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) {
            for (int c = 0; c < 3; ++c) {
                in.at(y, x, c) = (y * 4 + x) + 100.0 * c;
            }
        }
    }
    Image out;
    avg_pool_forward(in, 2, out, Exec::Serial);
    REQUIRE(out.width == 2);
    REQUIRE(out.height == 2);
    CHECK(out.at(0, 0, 0) == Catch::Approx((0 + 1 + 4 + 5) / 4.0));
    CHECK(out.at(1, 1, 0) == Catch::Approx((10 + 11 + 14 + 15) / 4.0));
    CHECK(out.at(0, 1, 2) == Catch::Approx((2 + 3 + 6 + 7) / 4.0 + 100.0 * 2));

    Rng rng(13);
    Image d_out(2, 2);
    for (double& v : d_out.data) v = rng.uniform(-1.0, 1.0);
    Image d_in(4, 4, 0.0);
    avg_pool_backward(d_out, 2, d_in, Exec::Serial);
    CHECK(image_dot(out, d_out.data) ==
          Catch::Approx(image_dot(in, d_in.data)).epsilon(1e-12));
}

TEST_CASE("rasterizer covers the interior and leaves the background", "[kernels]") {
    Scene s;
    s.width = 32;
    s.height = 32;
    s.sx = {4.0, 28.0, 16.0};
    s.sy = {28.0, 28.0, 4.0};
    s.zprime = {0.5, 0.5, 0.5};
    s.faces = {0, 1, 2};
    s.rgb = {0.9, 0.1, 0.1, 0.9, 0.1, 0.1, 0.9, 0.1, 0.1};
    const Image img = raster_run(s);

    // Deep interior: the face dominates the depth softmax entirely.
    CHECK(img.at(20, 16, 0) == Catch::Approx(0.9).margin(1e-9));
    CHECK(img.at(20, 16, 1) == Catch::Approx(0.1).margin(1e-9));
    // Far corner: pure background.
    CHECK(img.at(0, 0, 0) == Catch::Approx(0.2).margin(1e-9));
    CHECK(img.at(0, 31, 2) == Catch::Approx(0.4).margin(1e-9));
}

TEST_CASE("rasterizer respects face_valid", "[kernels]") {
    Scene s = make_scene();
    Image both = raster_run(s);

    s.face_valid = {1, 0};  // drop the second face
    Image one = raster_run(s);

    Scene only_first = make_scene();
    only_first.faces = {0, 1, 2};
    Image expect = raster_run(only_first);
    REQUIRE(one.data == expect.data);
    REQUIRE(both.data != expect.data);
}

TEST_CASE("rasterizer gradients match central differences", "[kernels]") {
    Scene s = make_scene();
    Rng rng(31);
    std::vector<double> r = random_vec(static_cast<size_t>(s.width) * s.height * 3, rng, 0.0,
                                       1.0);

    const auto loss = [&](const Scene& sc) { return image_dot(raster_run(sc), r); };

    std::vector<double> d_sx(s.sx.size(), 0.0), d_sy(s.sx.size(), 0.0);
    std::vector<double> d_z(s.sx.size(), 0.0), d_rgb(s.rgb.size(), 0.0);
    {
        const RasterScene scene = s.view();
        const FaceBins bins = build_face_bins(scene);
        Image d_image(s.width, s.height);
        d_image.data = r;
        RasterGrads grads{d_sx.data(), d_sy.data(), d_z.data(), d_rgb.data()};
        rasterize_backward(scene, bins, d_image, grads, Exec::Serial);
    }

    for (size_t i = 0; i < s.sx.size(); ++i) {
        const double h = 1e-5;
        Scene p = s, m = s;
        p.sx[i] += h;
        m.sx[i] -= h;
        REQUIRE(grad_close(d_sx[i], (loss(p) - loss(m)) / (2 * h), 2e-3, 1e-6));
        p = s;
        m = s;
        p.sy[i] += h;
        m.sy[i] -= h;
        REQUIRE(grad_close(d_sy[i], (loss(p) - loss(m)) / (2 * h), 2e-3, 1e-6));
        p = s;
        m = s;
        const double hz = 1e-7;
        p.zprime[i] += hz;
        m.zprime[i] -= hz;
        REQUIRE(grad_close(d_z[i], (loss(p) - loss(m)) / (2 * hz), 2e-3, 1e-4));
    }
    for (size_t i = 0; i < s.rgb.size(); ++i) {
        const double h = 1e-6;
        Scene p = s, m = s;
        p.rgb[i] += h;
        m.rgb[i] -= h;
        REQUIRE(grad_close(d_rgb[i], (loss(p) - loss(m)) / (2 * h), 1e-4, 1e-9));
    }
}

TEST_CASE("rasterizer: Serial and Parallel are bit-identical", "[kernels]") {
    Scene s = make_scene();
    const Image a = raster_run(s, Exec::Serial);
    const Image b = raster_run(s, Exec::Parallel);
    REQUIRE(a.data == b.data);

    Rng rng(41);
    Image d_image(s.width, s.height);
    for (double& v : d_image.data) v = rng.uniform();
    const RasterScene scene = s.view();
    const FaceBins bins = build_face_bins(scene);

    const auto run_backward = [&](Exec exec) {
        std::vector<std::vector<double>> g;
        g.emplace_back(s.sx.size(), 0.0);
        g.emplace_back(s.sx.size(), 0.0);
        g.emplace_back(s.sx.size(), 0.0);
        g.emplace_back(s.rgb.size(), 0.0);
        RasterGrads grads{g[0].data(), g[1].data(), g[2].data(), g[3].data()};
        rasterize_backward(scene, bins, d_image, grads, exec);
        return g;
    };
    REQUIRE(run_backward(Exec::Serial) == run_backward(Exec::Parallel));
}

TEST_CASE("face bins cover every face exactly where it can contribute", "[kernels]") {
    Scene s = make_scene();
    const RasterScene scene = s.view();
    const FaceBins bins = build_face_bins(scene);
    REQUIRE(bins.tiles_x == (s.width + bins.tile - 1) / bins.tile);
    REQUIRE(bins.tiles_y == (s.height + bins.tile - 1) / bins.tile);
    REQUIRE(bins.offsets.size() ==
            static_cast<size_t>(bins.tiles_x) * bins.tiles_y + 1);
    REQUIRE(bins.offsets.front() == 0);
    REQUIRE(bins.offsets.back() == static_cast<int>(bins.faces.size()));
    for (int f : bins.faces) {
        REQUIRE(f >= 0);
        REQUIRE(f < scene.n_faces);
    }
}
