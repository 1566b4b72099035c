// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "kernels/warp.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "core/errors.h"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace meshstyle::kernels {

namespace {

// Bilinear taps at (qx, qy) with border replication. Indices are valid even
// when the sample is fully outside the image.
struct Taps {
    int x0, x1, y0, y1;
    double fx, fy;
};

inline Taps make_taps(double qx, double qy, int w, int h) {
    qx = std::clamp(qx, 0.0, static_cast<double>(w - 1));
    qy = std::clamp(qy, 0.0, static_cast<double>(h - 1));
    Taps t;
    t.x0 = static_cast<int>(std::floor(qx));
    t.y0 = static_cast<int>(std::floor(qy));
    t.x0 = std::min(t.x0, w - 1);
    t.y0 = std::min(t.y0, h - 1);
    t.x1 = std::min(t.x0 + 1, w - 1);
    t.y1 = std::min(t.y0 + 1, h - 1);
    t.fx = qx - t.x0;
    t.fy = qy - t.y0;
    return t;
}

inline void apply_h(const double H[9], double x, double y, double* qx, double* qy) {
    const double hw = H[6] * x + H[7] * y + H[8];
    *qx = (H[0] * x + H[1] * y + H[2]) / hw;
    *qy = (H[3] * x + H[4] * y + H[5]) / hw;
}

void warp_rows(const Image& in, const double H[9], Image& out, int y_begin, int y_end) {
    for (int y = y_begin; y < y_end; ++y) {
        for (int x = 0; x < out.width; ++x) {
            double qx, qy;
            apply_h(H, x, y, &qx, &qy);
            const Taps t = make_taps(qx, qy, in.width, in.height);
            const double w00 = (1.0 - t.fx) * (1.0 - t.fy);
            const double w10 = t.fx * (1.0 - t.fy);
            const double w01 = (1.0 - t.fx) * t.fy;
            const double w11 = t.fx * t.fy;
            for (int c = 0; c < 3; ++c) {
                out.at(y, x, c) = w00 * in.at(t.y0, t.x0, c) + w10 * in.at(t.y0, t.x1, c) +
                                  w01 * in.at(t.y1, t.x0, c) + w11 * in.at(t.y1, t.x1, c);
            }
        }
    }
}

void warp_back_rows(int iw, int ih, const double H[9], const Image& d_out, Image& d_in,
                    int y_begin, int y_end) {
    for (int y = y_begin; y < y_end; ++y) {
        for (int x = 0; x < d_out.width; ++x) {
            double qx, qy;
            apply_h(H, x, y, &qx, &qy);
            const Taps t = make_taps(qx, qy, iw, ih);
            const double w00 = (1.0 - t.fx) * (1.0 - t.fy);
            const double w10 = t.fx * (1.0 - t.fy);
            const double w01 = (1.0 - t.fx) * t.fy;
            const double w11 = t.fx * t.fy;
            for (int c = 0; c < 3; ++c) {
                const double g = d_out.at(y, x, c);
                d_in.at(t.y0, t.x0, c) += w00 * g;
                d_in.at(t.y0, t.x1, c) += w10 * g;
                d_in.at(t.y1, t.x0, c) += w01 * g;
                d_in.at(t.y1, t.x1, c) += w11 * g;
            }
        }
    }
}

}  // namespace

void warp_forward(const Image& in, const double H[9], Image& out, Exec exec) {
    if (in.width <= 0 || in.height <= 0) {
        throw DimensionError("warp_forward: empty input image");
    }
    if (out.width <= 0 || out.height <= 0) {
        throw DimensionError("warp_forward: output shape must be set by the caller");
    }
    out.data.assign(static_cast<size_t>(out.width) * out.height * 3, 0.0);
#ifdef _OPENMP
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int y = 0; y < out.height; ++y) {
            warp_rows(in, H, out, y, y + 1);
        }
        return;
    }
#else
    (void)exec;
#endif
    warp_rows(in, H, out, 0, out.height);
}

void warp_backward(int in_width, int in_height, const double H[9], const Image& d_out,
                   Image& d_in, Exec exec) {
    if (d_in.width != in_width || d_in.height != in_height) {
        throw DimensionError("warp_backward: d_in shape mismatch");
    }
#ifdef _OPENMP
    if (exec == Exec::Parallel && max_threads() > 1) {
        const int nt = max_threads();
        std::vector<std::vector<double>> bufs(nt);
#pragma omp parallel num_threads(nt)
        {
            const int t = omp_get_thread_num();
            bufs[t].assign(d_in.data.size(), 0.0);
            Image local;
            local.width = in_width;
            local.height = in_height;
            local.data.swap(bufs[t]);
#pragma omp for schedule(static)
            for (int y = 0; y < d_out.height; ++y) {
                warp_back_rows(in_width, in_height, H, d_out, local, y, y + 1);
            }
            local.data.swap(bufs[t]);
        }
        for (int t = 0; t < nt; ++t) {
            for (size_t i = 0; i < d_in.data.size(); ++i) {
                d_in.data[i] += bufs[t][i];
            }
        }
        return;
    }
#else
    (void)exec;
#endif
    warp_back_rows(in_width, in_height, H, d_out, d_in, 0, d_out.height);
}

void avg_pool_forward(const Image& in, int k, Image& out, Exec exec) {
    if (k <= 0 || in.width % k != 0 || in.height % k != 0) {
        throw DimensionError("avg_pool_forward: size not divisible by kernel");
    }
    out.width = in.width / k;
    out.height = in.height / k;
    out.data.assign(static_cast<size_t>(out.width) * out.height * 3, 0.0);
    const double inv = 1.0 / (static_cast<double>(k) * k);
    const auto pool_row = [&](int ty) {
        for (int tx = 0; tx < out.width; ++tx) {
            double acc[3] = {0.0, 0.0, 0.0};
            for (int dy = 0; dy < k; ++dy) {
                for (int dx = 0; dx < k; ++dx) {
                    for (int c = 0; c < 3; ++c) {
                        acc[c] += in.at(ty * k + dy, tx * k + dx, c);
                    }
                }
            }
            for (int c = 0; c < 3; ++c) {
                out.at(ty, tx, c) = acc[c] * inv;
            }
        }
    };
#ifdef _OPENMP
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int ty = 0; ty < out.height; ++ty) {
            pool_row(ty);
        }
        return;
    }
#else
    (void)exec;
#endif
    for (int ty = 0; ty < out.height; ++ty) {
        pool_row(ty);
    }
}

void avg_pool_backward(const Image& d_out, int k, Image& d_in, Exec exec) {
    if (d_in.width != d_out.width * k || d_in.height != d_out.height * k) {
        throw DimensionError("avg_pool_backward: d_in shape mismatch");
    }
    const double inv = 1.0 / (static_cast<double>(k) * k);
    const auto spread_row = [&](int y) {
        const int ty = y / k;
        for (int x = 0; x < d_in.width; ++x) {
            const int tx = x / k;
            for (int c = 0; c < 3; ++c) {
                d_in.at(y, x, c) += d_out.at(ty, tx, c) * inv;
            }
        }
    };
#ifdef _OPENMP
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int y = 0; y < d_in.height; ++y) {
            spread_row(y);
        }
        return;
    }
#else
    (void)exec;
#endif
    for (int y = 0; y < d_in.height; ++y) {
        spread_row(y);
    }
}

}  // namespace meshstyle::kernels
