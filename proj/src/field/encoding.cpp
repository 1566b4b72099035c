// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "field/encoding.h"

#include <cmath>

#include "core/errors.h"
#include "core/rng.h"

namespace meshstyle {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

Matrix make_encoding_matrix(const EncodingConfig& cfg) {
    if (cfg.k < 1 || cfg.sigma_b <= 0.0) {
        throw ArgumentError("encoding: k must be >= 1 and sigma_b > 0");
    }
    Rng rng = Rng::stream(cfg.rng_seed, "encoding_B");
    Matrix B(cfg.k, 3);
    for (double& v : B.data) {
        v = rng.normal(0.0, cfg.sigma_b);
    }
    return B;
}

void encode_points(const Vec3* points, int n, const Matrix& B, const EncodingConfig& cfg,
                   Matrix& out, Exec exec) {
    const int k = B.rows;
    out = Matrix(n, 2 * k);
    const auto encode_row = [&](int i) {
        const Vec3 p = apply_symmetry(cfg, points[i]);
        double* row = out.row(i);
        for (int j = 0; j < k; ++j) {
            const double* bj = B.row(j);
            const double phase = kTwoPi * (bj[0] * p.x + bj[1] * p.y + bj[2] * p.z);
            row[j] = std::cos(phase);
            row[k + j] = std::sin(phase);
        }
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            encode_row(i);
        }
    } else {
        for (int i = 0; i < n; ++i) {
            encode_row(i);
        }
    }
}

double mean_abs_encode_gradient(const Vec3* points, int n, const Matrix& B,
                                const EncodingConfig& cfg) {
    const int k = B.rows;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vec3 p = apply_symmetry(cfg, points[i]);
        for (int j = 0; j < k; ++j) {
            const double* bj = B.row(j);
            const double phase = kTwoPi * (bj[0] * p.x + bj[1] * p.y + bj[2] * p.z);
            const double s = std::abs(std::sin(phase));
            const double c = std::abs(std::cos(phase));
            // |d cos/d p_l| = 2 pi |b_jl sin|, |d sin/d p_l| = 2 pi |b_jl cos|.
            for (int l = 0; l < 3; ++l) {
                acc += kTwoPi * std::abs(bj[l]) * (s + c);
            }
        }
    }
    return acc / (static_cast<double>(n) * k * 6.0);
}

}  // namespace meshstyle
