// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "augment/augment.h"

#include <algorithm>
#include <cmath>

#include "core/errors.h"
#include "core/rng.h"
#include "kernels/warp.h"

namespace meshstyle {

namespace {

// Homography h (h22 fixed to 1) with H * src_i ~ dst_i for four point
// pairs: two linear equations per pair, solved by Gaussian elimination with
// partial pivoting.
void solve_homography(const double src[4][2], const double dst[4][2], double H[9]) {
    double A[8][9] = {};
    for (int i = 0; i < 4; ++i) {
        const double x = src[i][0], y = src[i][1];
        const double u = dst[i][0], v = dst[i][1];
        double* r0 = A[2 * i];
        double* r1 = A[2 * i + 1];
        r0[0] = x; r0[1] = y; r0[2] = 1.0; r0[6] = -u * x; r0[7] = -u * y; r0[8] = u;
        r1[3] = x; r1[4] = y; r1[5] = 1.0; r1[6] = -v * x; r1[7] = -v * y; r1[8] = v;
    }
    for (int col = 0; col < 8; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 8; ++r) {
            if (std::abs(A[r][col]) > std::abs(A[pivot][col])) {
                pivot = r;
            }
        }
        if (std::abs(A[pivot][col]) < 1e-12) {
            throw NumericsError("perspective warp: degenerate corner configuration");
        }
        std::swap(A[col], A[pivot]);
        for (int r = col + 1; r < 8; ++r) {
            const double f = A[r][col] / A[col][col];
            for (int c = col; c < 9; ++c) {
                A[r][c] -= f * A[col][c];
            }
        }
    }
    double h[8];
    for (int r = 7; r >= 0; --r) {
        double acc = A[r][8];
        for (int c = r + 1; c < 8; ++c) {
            acc -= A[r][c] * h[c];
        }
        h[r] = acc / A[r][r];
    }
    for (int i = 0; i < 8; ++i) {
        H[i] = h[i];
    }
    H[8] = 1.0;
}

void require_square(const Image& image, const char* op) {
    if (image.width != image.height || image.width <= 0) {
        throw DimensionError(std::string(op) + ": square image required");
    }
}

Image run_stage(const Image& in, const double H[9], int out_w, int out_h, AugTape& tape,
                Exec exec) {
    AugTape::Stage stage;
    std::copy(H, H + 9, stage.H);
    stage.in_width = in.width;
    stage.in_height = in.height;
    stage.out_width = out_w;
    stage.out_height = out_h;
    tape.stages.push_back(stage);

    Image out;
    out.width = out_w;
    out.height = out_h;
    kernels::warp_forward(in, H, out, exec);
    return out;
}

}  // namespace

Image psi_global(const Image& image, const AugmentConfig& cfg, Rng& rng, AugTape& tape,
                 Exec exec) {
    require_square(image, "psi_global");
    if (cfg.perspective_distortion < 0.0 || cfg.perspective_distortion > 1.0) {
        throw ArgumentError("psi_global: perspective_distortion must be in [0, 1]");
    }
    const double w1 = image.width - 1.0;
    const double h1 = image.height - 1.0;
    // Sampling-grid corners in output order: tl, tr, br, bl; each moves away
    // from the center. Draw order (per corner: dx then dy) is part of the
    // deterministic contract.
    const double out_corners[4][2] = {{0.0, 0.0}, {w1, 0.0}, {w1, h1}, {0.0, h1}};
    const double dir[4][2] = {{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}};
    double in_corners[4][2];
    for (int i = 0; i < 4; ++i) {
        const double dx = rng.uniform(0.0, cfg.perspective_distortion * w1 * 0.5);
        const double dy = rng.uniform(0.0, cfg.perspective_distortion * h1 * 0.5);
        in_corners[i][0] = out_corners[i][0] + dir[i][0] * dx;
        in_corners[i][1] = out_corners[i][1] + dir[i][1] * dy;
    }
    double H[9];
    solve_homography(out_corners, in_corners, H);
    return run_stage(image, H, image.width, image.height, tape, exec);
}

int local_crop_side(int resolution, double area_fraction) {
    return std::max(1, static_cast<int>(std::floor(std::sqrt(area_fraction) * resolution)));
}

Image psi_local(const Image& image, const AugmentConfig& cfg, Rng& rng, AugTape& tape,
                Exec exec) {
    require_square(image, "psi_local");
    if (cfg.crop_area_fraction <= 0.0 || cfg.crop_area_fraction > 1.0) {
        throw ArgumentError("psi_local: crop_area_fraction must be in (0, 1]");
    }
    const int res = image.width;
    const int side = local_crop_side(res, cfg.crop_area_fraction);
    // Uniform crop CENTER clamped into bounds: every pixel, including the
    // corners, lands inside some crop with non-vanishing probability.
    const int cx = rng.uniform_int(0, res - 1);
    const int cy = rng.uniform_int(0, res - 1);
    const int x0 = std::clamp(cx - side / 2, 0, res - side);
    const int y0 = std::clamp(cy - side / 2, 0, res - side);

    // Affine resize map: src = (dst + 0.5) * side/res - 0.5 + origin.
    const double s = static_cast<double>(side) / res;
    const double H[9] = {s, 0.0, 0.5 * s - 0.5 + x0, 0.0, s, 0.5 * s - 0.5 + y0,
                         0.0, 0.0, 1.0};
    const Image cropped = run_stage(image, H, res, res, tape, exec);
    return psi_global(cropped, cfg, rng, tape, exec);
}

void augment_backward(const AugTape& tape, const Image& d_out, Image& d_in, Exec exec) {
    if (tape.stages.empty()) {
        throw ArgumentError("augment_backward: empty tape");
    }
    Image current = d_out;
    for (size_t i = tape.stages.size(); i-- > 0;) {
        const AugTape::Stage& st = tape.stages[i];
        if (current.width != st.out_width || current.height != st.out_height) {
            throw DimensionError("augment_backward: gradient shape mismatch");
        }
        if (i == 0) {
            kernels::warp_backward(st.in_width, st.in_height, st.H, current, d_in, exec);
        } else {
            Image next(st.in_width, st.in_height, 0.0);
            kernels::warp_backward(st.in_width, st.in_height, st.H, current, next, exec);
            current = std::move(next);
        }
    }
}

Image clip_normalize(const Image& image, const AugmentConfig& cfg, Exec exec) {
    Image out = image;
    const double mean[3] = {cfg.normalization_mean.x, cfg.normalization_mean.y,
                            cfg.normalization_mean.z};
    const double inv_std[3] = {1.0 / cfg.normalization_std.x, 1.0 / cfg.normalization_std.y,
                               1.0 / cfg.normalization_std.z};
    const long long pixels = static_cast<long long>(image.width) * image.height;
    const auto run = [&](long long i) {
        for (int c = 0; c < 3; ++c) {
            out.data[static_cast<size_t>(i) * 3 + c] =
                (image.data[static_cast<size_t>(i) * 3 + c] - mean[c]) * inv_std[c];
        }
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < pixels; ++i) {
            run(i);
        }
    } else {
        for (long long i = 0; i < pixels; ++i) {
            run(i);
        }
    }
    return out;
}

Image clip_denormalize(const Image& image, const AugmentConfig& cfg, Exec exec) {
    (void)exec;
    Image out = image;
    const double mean[3] = {cfg.normalization_mean.x, cfg.normalization_mean.y,
                            cfg.normalization_mean.z};
    const double std3[3] = {cfg.normalization_std.x, cfg.normalization_std.y,
                            cfg.normalization_std.z};
    const long long pixels = static_cast<long long>(image.width) * image.height;
    for (long long i = 0; i < pixels; ++i) {
        for (int c = 0; c < 3; ++c) {
            out.data[static_cast<size_t>(i) * 3 + c] =
                image.data[static_cast<size_t>(i) * 3 + c] * std3[c] + mean[c];
        }
    }
    return out;
}

void clip_normalize_backward(const Image& d_out, const AugmentConfig& cfg, Image& d_in,
                             Exec exec) {
    if (!d_in.same_shape(d_out)) {
        throw DimensionError("clip_normalize_backward: shape mismatch");
    }
    const double inv_std[3] = {1.0 / cfg.normalization_std.x, 1.0 / cfg.normalization_std.y,
                               1.0 / cfg.normalization_std.z};
    const long long pixels = static_cast<long long>(d_out.width) * d_out.height;
    const auto run = [&](long long i) {
        for (int c = 0; c < 3; ++c) {
            d_in.data[static_cast<size_t>(i) * 3 + c] +=
                d_out.data[static_cast<size_t>(i) * 3 + c] * inv_std[c];
        }
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < pixels; ++i) {
            run(i);
        }
    } else {
        for (long long i = 0; i < pixels; ++i) {
            run(i);
        }
    }
}

}  // namespace meshstyle
