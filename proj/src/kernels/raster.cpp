// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "kernels/raster.h"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace meshstyle::kernels {

namespace {

inline double cross2(double rx, double ry, double sx, double sy) {
    return rx * sy - ry * sx;
}

inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Everything the backward pass needs about one (pixel, face) contribution.
// Recomputed instead of stored; both passes call the same function in the
// same order so the chained values match bitwise.
struct FaceSample {
    bool ok = false;
    bool inside = false;
    double D = 0.0;       // coverage
    double arg = 0.0;     // sigmoid argument
    double dmin = 0.0;    // boundary distance, pixels
    double nhx = 0.0;     // (p - closest) / dmin
    double nhy = 0.0;
    int eu = 0;           // vertex ids of the nearest edge
    int ev = 0;
    double t = 0.0;       // clamped parameter along that edge
    bool t_clamped = false;
    double w0 = 0.0, w1 = 0.0, w2 = 0.0;  // barycentric (inside only)
    double zp = 0.0;
    double col[3] = {0.0, 0.0, 0.0};
};

FaceSample sample_face(const RasterScene& s, int f, double px, double py, double ndc_scale) {
    FaceSample r;
    const int i0 = s.faces[3 * f + 0];
    const int i1 = s.faces[3 * f + 1];
    const int i2 = s.faces[3 * f + 2];
    const double ax = s.sx[i0], ay = s.sy[i0];
    const double bx = s.sx[i1], by = s.sy[i1];
    const double cx = s.sx[i2], cy = s.sy[i2];

    const double area = cross2(bx - ax, by - ay, cx - ax, cy - ay);
    if (std::abs(area) < 1e-12) {
        return r;
    }
    const double c0 = cross2(bx - px, by - py, cx - px, cy - py);
    const double c1 = cross2(cx - px, cy - py, ax - px, ay - py);
    const double c2 = cross2(ax - px, ay - py, bx - px, by - py);
    r.w0 = c0 / area;
    r.w1 = c1 / area;
    r.w2 = c2 / area;
    r.inside = r.w0 >= 0.0 && r.w1 >= 0.0 && r.w2 >= 0.0;

    const int vid[3] = {i0, i1, i2};
    const double ex[3] = {ax, bx, cx};
    const double ey[3] = {ay, by, cy};
    double best = -1.0;
    for (int e = 0; e < 3; ++e) {
        const int u = e, v = (e + 1) % 3;
        const double dx = ex[v] - ex[u];
        const double dy = ey[v] - ey[u];
        const double len2 = dx * dx + dy * dy;
        double t = 0.0;
        bool clamped = true;
        if (len2 > 0.0) {
            t = ((px - ex[u]) * dx + (py - ey[u]) * dy) / len2;
            clamped = t <= 0.0 || t >= 1.0;
            t = std::clamp(t, 0.0, 1.0);
        }
        const double qx = ex[u] + t * dx;
        const double qy = ey[u] + t * dy;
        const double ddx = px - qx;
        const double ddy = py - qy;
        const double dist = std::sqrt(ddx * ddx + ddy * ddy);
        if (best < 0.0 || dist < best) {
            best = dist;
            r.eu = vid[u];
            r.ev = vid[v];
            r.t = t;
            r.t_clamped = clamped;
            if (dist > 0.0) {
                r.nhx = ddx / dist;
                r.nhy = ddy / dist;
            } else {
                r.nhx = 0.0;
                r.nhy = 0.0;
            }
        }
    }
    r.dmin = best;

    const double dn = best * ndc_scale;
    r.arg = (r.inside ? 1.0 : -1.0) * dn * dn / s.sigma;
    if (r.arg < -kSoftCutoff) {
        return r;
    }
    r.D = sigmoid(r.arg);

    if (r.inside) {
        r.zp = r.w0 * s.zprime[i0] + r.w1 * s.zprime[i1] + r.w2 * s.zprime[i2];
        for (int c = 0; c < 3; ++c) {
            r.col[c] = r.w0 * s.rgb[3 * i0 + c] + r.w1 * s.rgb[3 * i1 + c] +
                       r.w2 * s.rgb[3 * i2 + c];
        }
    } else {
        const double tu = 1.0 - r.t;
        r.zp = tu * s.zprime[r.eu] + r.t * s.zprime[r.ev];
        for (int c = 0; c < 3; ++c) {
            r.col[c] = tu * s.rgb[3 * r.eu + c] + r.t * s.rgb[3 * r.ev + c];
        }
    }
    r.ok = true;
    return r;
}

inline const int* bin_range(const FaceBins& bins, int tx, int ty, int* count) {
    const int b = ty * bins.tiles_x + tx;
    *count = bins.offsets[b + 1] - bins.offsets[b];
    return bins.faces.data() + bins.offsets[b];
}

}  // namespace

FaceBins build_face_bins(const RasterScene& s) {
    FaceBins bins;
    bins.tiles_x = (s.width + bins.tile - 1) / bins.tile;
    bins.tiles_y = (s.height + bins.tile - 1) / bins.tile;
    const int n_bins = bins.tiles_x * bins.tiles_y;
    bins.offsets.assign(static_cast<size_t>(n_bins) + 1, 0);

    const double ndc_scale = 2.0 / s.height;
    const double dilate = std::sqrt(kSoftCutoff * s.sigma) / ndc_scale + 1.0;

    struct Box {
        int tx0, tx1, ty0, ty1;
        bool ok;
    };
    std::vector<Box> boxes(static_cast<size_t>(s.n_faces));
    for (int f = 0; f < s.n_faces; ++f) {
        Box bx{0, 0, 0, 0, false};
        if (s.face_valid == nullptr || s.face_valid[f]) {
            const int i0 = s.faces[3 * f + 0];
            const int i1 = s.faces[3 * f + 1];
            const int i2 = s.faces[3 * f + 2];
            const double x0 = std::min({s.sx[i0], s.sx[i1], s.sx[i2]}) - dilate;
            const double x1 = std::max({s.sx[i0], s.sx[i1], s.sx[i2]}) + dilate;
            const double y0 = std::min({s.sy[i0], s.sy[i1], s.sy[i2]}) - dilate;
            const double y1 = std::max({s.sy[i0], s.sy[i1], s.sy[i2]}) + dilate;
            if (std::isfinite(x0) && std::isfinite(x1) && std::isfinite(y0) && std::isfinite(y1) &&
                x1 >= 0.0 && y1 >= 0.0 && x0 < s.width && y0 < s.height) {
                bx.tx0 = std::clamp(static_cast<int>(std::floor(x0)) / bins.tile, 0, bins.tiles_x - 1);
                bx.tx1 = std::clamp(static_cast<int>(std::floor(x1)) / bins.tile, 0, bins.tiles_x - 1);
                bx.ty0 = std::clamp(static_cast<int>(std::floor(y0)) / bins.tile, 0, bins.tiles_y - 1);
                bx.ty1 = std::clamp(static_cast<int>(std::floor(y1)) / bins.tile, 0, bins.tiles_y - 1);
                bx.ok = true;
            }
        }
        boxes[static_cast<size_t>(f)] = bx;
        if (bx.ok) {
            for (int ty = bx.ty0; ty <= bx.ty1; ++ty) {
                for (int tx = bx.tx0; tx <= bx.tx1; ++tx) {
                    ++bins.offsets[static_cast<size_t>(ty * bins.tiles_x + tx) + 1];
                }
            }
        }
    }
    for (int b = 0; b < n_bins; ++b) {
        bins.offsets[static_cast<size_t>(b) + 1] += bins.offsets[static_cast<size_t>(b)];
    }
    bins.faces.resize(static_cast<size_t>(bins.offsets[static_cast<size_t>(n_bins)]));
    std::vector<int> cursor(bins.offsets.begin(), bins.offsets.end() - 1);
    for (int f = 0; f < s.n_faces; ++f) {
        const Box& bx = boxes[static_cast<size_t>(f)];
        if (!bx.ok) {
            continue;
        }
        for (int ty = bx.ty0; ty <= bx.ty1; ++ty) {
            for (int tx = bx.tx0; tx <= bx.tx1; ++tx) {
                bins.faces[static_cast<size_t>(cursor[static_cast<size_t>(ty * bins.tiles_x + tx)]++)] = f;
            }
        }
    }
    return bins;
}

namespace {

// One output pixel. Streaming depth softmax: `m` tracks the running max
// logit so no per-face contribution list is needed; the face order is the bin
// order, which keeps repeated evaluations bitwise identical.
void forward_pixel(const RasterScene& s, const FaceBins& bins, int px_i, int py_i,
                   double ndc_scale, double* out) {
    const double px = px_i + 0.5;
    const double py = py_i + 0.5;
    int count = 0;
    const int* ids = bin_range(bins, px_i / bins.tile, py_i / bins.tile, &count);

    double m = 0.0;  // background logit
    double S = 1.0;
    double C0 = s.bg[0], C1 = s.bg[1], C2 = s.bg[2];
    for (int k = 0; k < count; ++k) {
        const FaceSample smp = sample_face(s, ids[k], px, py, ndc_scale);
        if (!smp.ok) {
            continue;
        }
        const double logit = smp.zp / s.gamma;
        double u;
        if (logit > m) {
            const double scale = std::exp(m - logit);
            S *= scale;
            C0 *= scale;
            C1 *= scale;
            C2 *= scale;
            m = logit;
            u = smp.D;
        } else {
            u = smp.D * std::exp(logit - m);
        }
        S += u;
        C0 += u * smp.col[0];
        C1 += u * smp.col[1];
        C2 += u * smp.col[2];
    }
    out[0] = C0 / S;
    out[1] = C1 / S;
    out[2] = C2 / S;
}

void backward_pixel(const RasterScene& s, const FaceBins& bins, int px_i, int py_i,
                    double ndc_scale, const double* g, const RasterGrads& acc) {
    if (g[0] == 0.0 && g[1] == 0.0 && g[2] == 0.0) {
        return;
    }
    const double px = px_i + 0.5;
    const double py = py_i + 0.5;
    int count = 0;
    const int* ids = bin_range(bins, px_i / bins.tile, py_i / bins.tile, &count);

    // Pass one recomputes the softmax normalizer S, the max logit m and the
    // weighted response G = sum_i u_i * <g, col_i> including the background.
    double m = 0.0;
    double S = 1.0;
    double G = g[0] * s.bg[0] + g[1] * s.bg[1] + g[2] * s.bg[2];
    for (int k = 0; k < count; ++k) {
        const FaceSample smp = sample_face(s, ids[k], px, py, ndc_scale);
        if (!smp.ok) {
            continue;
        }
        const double logit = smp.zp / s.gamma;
        double u;
        if (logit > m) {
            const double scale = std::exp(m - logit);
            S *= scale;
            G *= scale;
            m = logit;
            u = smp.D;
        } else {
            u = smp.D * std::exp(logit - m);
        }
        S += u;
        G += u * (g[0] * smp.col[0] + g[1] * smp.col[1] + g[2] * smp.col[2]);
    }
    const double a_dot = G / S;  // sum_i w_i * <g, col_i>, background included

    // Pass two distributes gradients face by face. The shift m is a running
    // max, invariant to infinitesimal input changes, so treating it as a
    // constant is exact.
    for (int k = 0; k < count; ++k) {
        const int f = ids[k];
        const FaceSample smp = sample_face(s, f, px, py, ndc_scale);
        if (!smp.ok) {
            continue;
        }
        const double logit = smp.zp / s.gamma;
        const double e = std::exp(logit - m);
        const double u = smp.D * e;
        const double w = u / S;
        const double gcol = g[0] * smp.col[0] + g[1] * smp.col[1] + g[2] * smp.col[2];
        const double dL_du = (gcol - a_dot) / S;
        const double dL_dD = dL_du * e;
        double dL_dzp = dL_du * u / s.gamma;
        double dface_col[3] = {w * g[0], w * g[1], w * g[2]};

        // Coverage chain: D -> arg -> boundary distance -> nearest edge ends.
        const double dL_darg = dL_dD * smp.D * (1.0 - smp.D);
        const double sign = smp.inside ? 1.0 : -1.0;
        const double dn = smp.dmin * ndc_scale;
        const double dL_ddpix = dL_darg * sign * 2.0 * dn / s.sigma * ndc_scale;
        // d(dist)/d(endpoint u) = -(1 - t) * nhat, d/d(v) = -t * nhat.
        acc.sx[smp.eu] += dL_ddpix * -(1.0 - smp.t) * smp.nhx;
        acc.sy[smp.eu] += dL_ddpix * -(1.0 - smp.t) * smp.nhy;
        acc.sx[smp.ev] += dL_ddpix * -smp.t * smp.nhx;
        acc.sy[smp.ev] += dL_ddpix * -smp.t * smp.nhy;

        const int i0 = s.faces[3 * f + 0];
        const int i1 = s.faces[3 * f + 1];
        const int i2 = s.faces[3 * f + 2];
        if (smp.inside) {
            const int vid[3] = {i0, i1, i2};
            const double wb[3] = {smp.w0, smp.w1, smp.w2};
            double dL_dw[3];
            for (int j = 0; j < 3; ++j) {
                const int v = vid[j];
                for (int c = 0; c < 3; ++c) {
                    acc.rgb[3 * v + c] += wb[j] * dface_col[c];
                }
                acc.zprime[v] += wb[j] * dL_dzp;
                dL_dw[j] = dface_col[0] * s.rgb[3 * v + 0] + dface_col[1] * s.rgb[3 * v + 1] +
                           dface_col[2] * s.rgb[3 * v + 2] + dL_dzp * s.zprime[v];
            }
            // w_j = C_j / A with C_j, A signed areas; d cross2(r, s) =
            // (sy, -sx) dr + (-ry, rx) ds.
            const double ax = s.sx[i0], ay = s.sy[i0];
            const double bx = s.sx[i1], by = s.sy[i1];
            const double cx = s.sx[i2], cy = s.sy[i2];
            const double area = cross2(bx - ax, by - ay, cx - ax, cy - ay);
            const double dA[3][2] = {{by - cy, cx - bx}, {cy - ay, ax - cx}, {ay - by, bx - ax}};
            // dC_j / d vertex; C_j omits vertex j, e.g. C0 = (b - p) x (c - p).
            const double dC[3][3][2] = {
                {{0.0, 0.0}, {cy - py, px - cx}, {py - by, bx - px}},
                {{py - cy, cx - px}, {0.0, 0.0}, {ay - py, px - ax}},
                {{by - py, px - bx}, {py - ay, ax - px}, {0.0, 0.0}},
            };
            for (int j = 0; j < 3; ++j) {
                const double coef = dL_dw[j] / area;
                for (int v = 0; v < 3; ++v) {
                    acc.sx[vid[v]] += coef * (dC[j][v][0] - wb[j] * dA[v][0]);
                    acc.sy[vid[v]] += coef * (dC[j][v][1] - wb[j] * dA[v][1]);
                }
            }
        } else {
            const double tu = 1.0 - smp.t;
            for (int c = 0; c < 3; ++c) {
                acc.rgb[3 * smp.eu + c] += tu * dface_col[c];
                acc.rgb[3 * smp.ev + c] += smp.t * dface_col[c];
            }
            acc.zprime[smp.eu] += tu * dL_dzp;
            acc.zprime[smp.ev] += smp.t * dL_dzp;
            if (!smp.t_clamped) {
                double dL_dt = dL_dzp * (s.zprime[smp.ev] - s.zprime[smp.eu]);
                for (int c = 0; c < 3; ++c) {
                    dL_dt += dface_col[c] * (s.rgb[3 * smp.ev + c] - s.rgb[3 * smp.eu + c]);
                }
                // t = <p - u, e> / <e, e> with e = v - u.
                const double ex = s.sx[smp.ev] - s.sx[smp.eu];
                const double ey = s.sy[smp.ev] - s.sy[smp.eu];
                const double wx = px - s.sx[smp.eu];
                const double wy = py - s.sy[smp.eu];
                const double inv = 1.0 / (ex * ex + ey * ey);
                acc.sx[smp.eu] += dL_dt * (-ex - wx + 2.0 * smp.t * ex) * inv;
                acc.sy[smp.eu] += dL_dt * (-ey - wy + 2.0 * smp.t * ey) * inv;
                acc.sx[smp.ev] += dL_dt * (wx - 2.0 * smp.t * ex) * inv;
                acc.sy[smp.ev] += dL_dt * (wy - 2.0 * smp.t * ey) * inv;
            }
        }
    }
}

}  // namespace

void rasterize_forward(const RasterScene& s, const FaceBins& bins, Image& out, Exec exec) {
    out.width = s.width;
    out.height = s.height;
    out.data.assign(static_cast<size_t>(s.width) * s.height * 3, 0.0);
    const double ndc_scale = 2.0 / s.height;
#ifdef _OPENMP
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int y = 0; y < s.height; ++y) {
            for (int x = 0; x < s.width; ++x) {
                forward_pixel(s, bins, x, y, ndc_scale,
                              out.data.data() + (static_cast<size_t>(y) * s.width + x) * 3);
            }
        }
        return;
    }
#else
    (void)exec;
#endif
    for (int y = 0; y < s.height; ++y) {
        for (int x = 0; x < s.width; ++x) {
            forward_pixel(s, bins, x, y, ndc_scale,
                          out.data.data() + (static_cast<size_t>(y) * s.width + x) * 3);
        }
    }
}

void rasterize_backward(const RasterScene& s, const FaceBins& bins, const Image& d_image,
                        const RasterGrads& grads, Exec exec) {
    const double ndc_scale = 2.0 / s.height;
#ifdef _OPENMP
    if (exec == Exec::Parallel && max_threads() > 1) {
        const int nt = max_threads();
        const size_t n = static_cast<size_t>(s.n_vertices);
        // Per-thread scatter buffers, reduced in thread order afterwards so
        // the result does not depend on scheduling.
        std::vector<std::vector<double>> buf_sx(nt), buf_sy(nt), buf_zp(nt), buf_rgb(nt);
#pragma omp parallel num_threads(nt)
        {
            const int t = omp_get_thread_num();
            buf_sx[t].assign(n, 0.0);
            buf_sy[t].assign(n, 0.0);
            buf_zp[t].assign(n, 0.0);
            buf_rgb[t].assign(3 * n, 0.0);
            RasterGrads local{buf_sx[t].data(), buf_sy[t].data(), buf_zp[t].data(),
                              buf_rgb[t].data()};
#pragma omp for schedule(static)
            for (int y = 0; y < s.height; ++y) {
                for (int x = 0; x < s.width; ++x) {
                    backward_pixel(s, bins, x, y, ndc_scale,
                                   d_image.data.data() + (static_cast<size_t>(y) * s.width + x) * 3,
                                   local);
                }
            }
        }
        for (int t = 0; t < nt; ++t) {
            for (size_t i = 0; i < n; ++i) {
                grads.sx[i] += buf_sx[t][i];
                grads.sy[i] += buf_sy[t][i];
                grads.zprime[i] += buf_zp[t][i];
            }
            for (size_t i = 0; i < 3 * n; ++i) {
                grads.rgb[i] += buf_rgb[t][i];
            }
        }
        return;
    }
#else
    (void)exec;
#endif
    for (int y = 0; y < s.height; ++y) {
        for (int x = 0; x < s.width; ++x) {
            backward_pixel(s, bins, x, y, ndc_scale,
                           d_image.data.data() + (static_cast<size_t>(y) * s.width + x) * 3, grads);
        }
    }
}

}  // namespace meshstyle::kernels
