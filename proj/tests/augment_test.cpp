// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "augment/augment.h"
#include "core/errors.h"
#include "core/rng.h"

using namespace meshstyle;

namespace {

Image random_image(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    Image img(w, h);
    for (double& v : img.data) v = rng.uniform();
    return img;
}

double image_dot(const Image& a, const Image& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

double max_abs_diff(const Image& a, const Image& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    }
    return m;
}

}  // namespace

TEST_CASE("local crop side follows the 10%-area rule", "[augment]") {
    CHECK(local_crop_side(224, 0.10) == 70);
    CHECK(local_crop_side(224, 1.0) == 224);
    CHECK(local_crop_side(64, 0.10) == 20);
    CHECK(local_crop_side(32, 0.10) == 10);
    CHECK(local_crop_side(4, 0.01) == 1);  // floor clamps at 1
}

TEST_CASE("psi_global with zero distortion is the identity", "[augment]") {
    const Image img = random_image(32, 32, 1);
    AugmentConfig cfg;
    cfg.perspective_distortion = 0.0;
    Rng rng(2);
    AugTape tape;
    const Image out = psi_global(img, cfg, rng, tape);
    REQUIRE(out.width == 32);
    REQUIRE(out.height == 32);
    REQUIRE(max_abs_diff(out, img) < 1e-6);
}

TEST_CASE("psi_global preserves shape and is deterministic", "[augment]") {
    const Image img = random_image(48, 48, 3);
    AugmentConfig cfg;
    Rng rng_a(7), rng_b(7), rng_c(8);
    AugTape ta, tb, tc;
    const Image a = psi_global(img, cfg, rng_a, ta);
    const Image b = psi_global(img, cfg, rng_b, tb);
    const Image c = psi_global(img, cfg, rng_c, tc);
    REQUIRE(a.width == img.width);
    REQUIRE(a.height == img.height);
    REQUIRE(a.data == b.data);       // same draws, bit-identical
    REQUIRE(a.data != c.data);       // different draws actually vary
    REQUIRE(ta.stages.size() == 1);

    REQUIRE_THROWS_AS(psi_global(random_image(8, 12, 0), cfg, rng_a, ta), DimensionError);
}

TEST_CASE("psi_local with a full crop and zero distortion is the identity", "[augment]") {
    const Image img = random_image(40, 40, 5);
    AugmentConfig cfg;
    cfg.crop_area_fraction = 1.0;
    cfg.perspective_distortion = 0.0;
    Rng rng(11);
    AugTape tape;
    const Image out = psi_local(img, cfg, rng, tape);
    REQUIRE(max_abs_diff(out, img) < 1e-6);
    REQUIRE(tape.stages.size() == 2);  // crop/resize stage + perspective stage
}

TEST_CASE("psi_local of a constant image stays constant", "[augment]") {
    Image img(64, 64, 0.0);
    for (size_t i = 0; i < img.data.size(); i += 3) {
        img.data[i] = 0.7;
        img.data[i + 1] = 0.3;
        img.data[i + 2] = 0.1;
    }
    AugmentConfig cfg;
    Rng rng(13);
    AugTape tape;
    const Image out = psi_local(img, cfg, rng, tape);
    for (size_t i = 0; i < out.data.size(); i += 3) {
        REQUIRE(out.data[i] == Catch::Approx(0.7).margin(1e-9));
        REQUIRE(out.data[i + 1] == Catch::Approx(0.3).margin(1e-9));
        REQUIRE(out.data[i + 2] == Catch::Approx(0.1).margin(1e-9));
    }

    REQUIRE_THROWS_AS([&] {
        AugmentConfig bad;
        bad.crop_area_fraction = 0.0;
        psi_local(img, bad, rng, tape);
    }(), ArgumentError);
}

TEST_CASE("psi_local crops cover every pixel over many draws", "[augment]") {
    const int res = 224;
    const Image img(res, res, 0.5);
    AugmentConfig cfg;
    const int side = local_crop_side(res, cfg.crop_area_fraction);
    Rng rng(2027);
    std::vector<int> covered(static_cast<size_t>(res) * res, 0);
    int lowest_x0 = res, highest_x0 = -1;
    for (int draw = 0; draw < 10000; ++draw) {
        AugTape tape;
        Image scratch = img;
        psi_local(scratch, cfg, rng, tape);
        // Stage 0 is the crop/resize: src = (dst + 0.5) * s - 0.5 + origin.
        const auto& stage = tape.stages.at(0);
        const double s = stage.H[0];
        const int x0 = static_cast<int>(std::lround(stage.H[2] - (0.5 * s - 0.5)));
        const int y0 = static_cast<int>(std::lround(stage.H[5] - (0.5 * s - 0.5)));
        REQUIRE(x0 >= 0);
        REQUIRE(y0 >= 0);
        REQUIRE(x0 + side <= res);
        REQUIRE(y0 + side <= res);
        lowest_x0 = std::min(lowest_x0, x0);
        highest_x0 = std::max(highest_x0, x0);
        for (int y = y0; y < y0 + side; ++y) {
            for (int x = x0; x < x0 + side; ++x) {
                ++covered[static_cast<size_t>(y) * res + x];
            }
        }
    }
    for (int count : covered) {
        REQUIRE(count > 0);
    }
    REQUIRE(lowest_x0 == 0);
    REQUIRE(highest_x0 == res - side);
}

TEST_CASE("augment_backward is the adjoint of the forward resampling", "[augment]") {
    const Image img = random_image(64, 64, 21);
    AugmentConfig cfg;
    Rng rng(23);
    AugTape tape;
    const Image out = psi_local(img, cfg, rng, tape);

    const Image d_out = random_image(out.width, out.height, 24);
    Image d_in(img.width, img.height, 0.0);
    augment_backward(tape, d_out, d_in);
    // Forward is linear in pixel values, so <A x, y> == <x, A^T y>.
    REQUIRE(image_dot(out, d_out) == Catch::Approx(image_dot(img, d_in)).epsilon(1e-12));

    AugTape empty;
    Image d2(4, 4, 0.0);
    REQUIRE_THROWS_AS(augment_backward(empty, d_out, d2), ArgumentError);
}

TEST_CASE("augmentation pixel gradients match finite differences", "[augment]") {
    Image img = random_image(24, 24, 31);
    AugmentConfig cfg;
    const Image weights = random_image(24, 24, 32);  // loss = <psi(img), weights>

    const auto run = [&](const Image& input, AugTape* tape_out) {
        Rng rng(37);  // same augmentation draw every evaluation
        AugTape tape;
        const Image out = psi_local(input, cfg, rng, tape);
        if (tape_out) *tape_out = tape;
        return image_dot(out, weights);
    };

    AugTape tape;
    run(img, &tape);
    Image d_in(24, 24, 0.0);
    augment_backward(tape, weights, d_in);

    Rng pick(41);
    for (int probe = 0; probe < 3; ++probe) {
        const int y = pick.uniform_int(0, 23);
        const int x = pick.uniform_int(0, 23);
        const int c = pick.uniform_int(0, 2);
        const double h = 1e-6;
        Image up = img, down = img;
        up.at(y, x, c) += h;
        down.at(y, x, c) -= h;
        const double fd = (run(up, nullptr) - run(down, nullptr)) / (2 * h);
        const double analytic = d_in.at(y, x, c);
        if (std::abs(analytic) > 1e-12 || std::abs(fd) > 1e-12) {
            REQUIRE(std::abs(analytic - fd) / std::max(std::abs(analytic), std::abs(fd)) <
                    1e-2);
        }
    }
}

TEST_CASE("clip_normalize maps the reference constants exactly", "[augment]") {
    AugmentConfig cfg;
    Image img(2, 1);
    // First pixel: the normalization mean; second: pure white.
    img.at(0, 0, 0) = 0.48145466;
    img.at(0, 0, 1) = 0.4578275;
    img.at(0, 0, 2) = 0.40821073;
    img.at(0, 1, 0) = 1.0;
    img.at(0, 1, 1) = 1.0;
    img.at(0, 1, 2) = 1.0;

    const Image out = clip_normalize(img, cfg);
    REQUIRE(out.at(0, 0, 0) == 0.0);
    REQUIRE(out.at(0, 0, 1) == 0.0);
    REQUIRE(out.at(0, 0, 2) == 0.0);
    REQUIRE(out.at(0, 1, 0) ==
            Catch::Approx((1.0 - 0.48145466) / 0.26862954).margin(1e-12));
    REQUIRE(out.at(0, 1, 1) ==
            Catch::Approx((1.0 - 0.4578275) / 0.26130258).margin(1e-12));
    REQUIRE(out.at(0, 1, 2) ==
            Catch::Approx((1.0 - 0.40821073) / 0.27577711).margin(1e-12));
    REQUIRE(out.at(0, 1, 0) == Catch::Approx(1.9303).margin(5e-4));
    REQUIRE(out.at(0, 1, 1) == Catch::Approx(2.0749).margin(5e-4));
    REQUIRE(out.at(0, 1, 2) == Catch::Approx(2.1459).margin(5e-4));
}

TEST_CASE("clip_normalize round-trips through its inverse", "[augment]") {
    AugmentConfig cfg;
    const Image img = random_image(16, 16, 43);
    const Image back = clip_denormalize(clip_normalize(img, cfg), cfg);
    REQUIRE(max_abs_diff(back, img) < 1e-6);
}

TEST_CASE("clip_normalize_backward scales by 1/std and accumulates", "[augment]") {
    AugmentConfig cfg;
    Image d_out(2, 2, 1.0);
    Image d_in(2, 2, 0.5);
    clip_normalize_backward(d_out, cfg, d_in);
    REQUIRE(d_in.at(0, 0, 0) == Catch::Approx(0.5 + 1.0 / 0.26862954).margin(1e-12));
    REQUIRE(d_in.at(1, 1, 1) == Catch::Approx(0.5 + 1.0 / 0.26130258).margin(1e-12));
    REQUIRE(d_in.at(0, 1, 2) == Catch::Approx(0.5 + 1.0 / 0.27577711).margin(1e-12));
}

TEST_CASE("augment kernels: Serial and Parallel are bit-identical", "[augment]") {
    const Image img = random_image(56, 56, 51);
    AugmentConfig cfg;
    Rng rng_s(77), rng_p(77);
    AugTape ts, tp;
    const Image a = psi_local(img, cfg, rng_s, ts, Exec::Serial);
    const Image b = psi_local(img, cfg, rng_p, tp, Exec::Parallel);
    REQUIRE(a.data == b.data);

    const Image d_out = random_image(56, 56, 52);
    Image gs(56, 56, 0.0), gp(56, 56, 0.0);
    augment_backward(ts, d_out, gs, Exec::Serial);
    augment_backward(tp, d_out, gp, Exec::Parallel);
    REQUIRE(gs.data == gp.data);

    const Image ns = clip_normalize(img, cfg, Exec::Serial);
    const Image np = clip_normalize(img, cfg, Exec::Parallel);
    REQUIRE(ns.data == np.data);
}
