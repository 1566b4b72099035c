// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "field/field.h"

#include <algorithm>
#include <cmath>

#include "core/errors.h"
#include "core/rng.h"
#include "kernels/dense.h"

namespace meshstyle {

namespace {

constexpr int kWidth = 256;
// Backward recomputes forward activations per chunk; 2048 rows keeps the
// live activation set tens of megabytes even for 256-wide layers.
constexpr int kChunk = 2048;

// std::tanh rounds to exactly +-1.0 once |x| exceeds ~19, which would land
// outputs on the boundary of their documented open intervals; saturated
// values are pinned just inside instead.
constexpr double kTanhBound = 1.0 - 1e-12;

inline double bounded_tanh(double x) {
    return std::clamp(std::tanh(x), -kTanhBound, kTanhBound);
}

LinearLayer make_layer(int in, int out, bool zero_init, Rng& rng) {
    LinearLayer l;
    l.in = in;
    l.out = out;
    l.w.assign(static_cast<size_t>(in) * out, 0.0);
    l.b.assign(static_cast<size_t>(out), 0.0);
    if (!zero_init) {
        const double bound = std::sqrt(6.0 / in);
        for (double& v : l.w) {
            v = rng.uniform(-bound, bound);
        }
    }
    return l;
}

// Activations of one forward chunk. Only post-ReLU values are kept; the
// ReLU mask is recoverable from them (post > 0 iff pre > 0).
struct ChunkActs {
    Matrix x0;
    Matrix h[4];
    Matrix hd[2];
    Matrix hc[2];
    Matrix tanh_d;  // n x 1
    Matrix tanh_c;  // n x 3
};

void layer_forward(const LinearLayer& l, const Matrix& x, Matrix& y, bool relu, Exec exec) {
    y = Matrix(x.rows, l.out);
    kernels::linear_forward(x.data.data(), l.w.data(), l.b.data(), y.data.data(), x.rows, l.in,
                            l.out, exec);
    if (relu) {
        kernels::relu_forward(y.data.data(), y.data.data(), static_cast<long long>(y.size()),
                              exec);
    }
}

}  // namespace

StyleField StyleField::create(const StyleFieldConfig& cfg) {
    StyleField f;
    f.cfg_ = cfg;
    if (cfg.direct) {
        if (cfg.direct_n < 1) {
            throw ArgumentError("style field: direct mode needs the vertex count");
        }
        f.t_.direct_color.assign(static_cast<size_t>(cfg.direct_n) * 3, 0.0);
        f.t_.direct_displ.assign(static_cast<size_t>(cfg.direct_n), 0.0);
        return f;
    }
    if (cfg.use_encoding) {
        f.B_ = make_encoding_matrix(cfg.encoding);
    }
    const int in_dim = cfg.use_encoding ? 2 * cfg.encoding.k : 3;
    Rng rng = Rng::stream(cfg.encoding.rng_seed, "field_init");
    f.t_.trunk.push_back(make_layer(in_dim, kWidth, false, rng));
    for (int i = 1; i < 4; ++i) {
        f.t_.trunk.push_back(make_layer(kWidth, kWidth, false, rng));
    }
    for (auto* branch : {&f.t_.branch_d, &f.t_.branch_c}) {
        branch->push_back(make_layer(kWidth, kWidth, false, rng));
        branch->push_back(make_layer(kWidth, kWidth, false, rng));
    }
    // Zero output layers (weights and biases) make the fresh field the exact
    // identity style.
    f.t_.branch_d.push_back(make_layer(kWidth, 1, true, rng));
    f.t_.branch_c.push_back(make_layer(kWidth, 3, true, rng));
    return f;
}

void StyleField::set_state(const StyleFieldConfig& cfg, Matrix B, FieldTensors t) {
    cfg_ = cfg;
    B_ = std::move(B);
    t_ = std::move(t);
}

namespace {

void forward_chunk(const StyleFieldConfig& cfg, const Matrix& B, const FieldTensors& t,
                   const Vec3* pts, int n, ChunkActs& a, Exec exec) {
    if (cfg.use_encoding) {
        encode_points(pts, n, B, cfg.encoding, a.x0, exec);
    } else {
        a.x0 = Matrix(n, 3);
        for (int i = 0; i < n; ++i) {
            const Vec3 p = apply_symmetry(cfg.encoding, pts[i]);
            a.x0.at(i, 0) = p.x;
            a.x0.at(i, 1) = p.y;
            a.x0.at(i, 2) = p.z;
        }
    }
    const Matrix* x = &a.x0;
    for (int i = 0; i < 4; ++i) {
        layer_forward(t.trunk[static_cast<size_t>(i)], *x, a.h[i], true, exec);
        x = &a.h[i];
    }
    if (cfg.mode != StyleMode::Color) {
        layer_forward(t.branch_d[0], a.h[3], a.hd[0], true, exec);
        layer_forward(t.branch_d[1], a.hd[0], a.hd[1], true, exec);
        layer_forward(t.branch_d[2], a.hd[1], a.tanh_d, false, exec);
        for (double& v : a.tanh_d.data) {
            v = bounded_tanh(v);
        }
    }
    if (cfg.mode != StyleMode::Geometry) {
        layer_forward(t.branch_c[0], a.h[3], a.hc[0], true, exec);
        layer_forward(t.branch_c[1], a.hc[0], a.hc[1], true, exec);
        layer_forward(t.branch_c[2], a.hc[1], a.tanh_c, false, exec);
        for (double& v : a.tanh_c.data) {
            v = bounded_tanh(v);
        }
    }
}

}  // namespace

StyleOutput StyleField::evaluate(const std::vector<Vec3>& points, Exec exec) const {
    const int n = static_cast<int>(points.size());
    StyleOutput out;
    out.colors.assign(static_cast<size_t>(n), Vec3{0.5, 0.5, 0.5});
    out.displacements.assign(static_cast<size_t>(n), 0.0);
    if (cfg_.direct) {
        if (n != cfg_.direct_n) {
            throw DimensionError("style field: direct mode is bound to " +
                                 std::to_string(cfg_.direct_n) + " vertices, got " +
                                 std::to_string(n));
        }
        for (int i = 0; i < n; ++i) {
            if (cfg_.mode != StyleMode::Geometry) {
                for (int c = 0; c < 3; ++c) {
                    out.colors[static_cast<size_t>(i)][c] =
                        0.5 + 0.5 * bounded_tanh(t_.direct_color[static_cast<size_t>(i) * 3 + c]);
                }
            }
            if (cfg_.mode != StyleMode::Color) {
                out.displacements[static_cast<size_t>(i)] =
                    0.1 * bounded_tanh(t_.direct_displ[static_cast<size_t>(i)]);
            }
        }
        return out;
    }
    ChunkActs a;
    for (int base = 0; base < n; base += kChunk) {
        const int len = std::min(kChunk, n - base);
        forward_chunk(cfg_, B_, t_, points.data() + base, len, a, exec);
        for (int i = 0; i < len; ++i) {
            const size_t gi = static_cast<size_t>(base + i);
            if (cfg_.mode != StyleMode::Color) {
                out.displacements[gi] = 0.1 * a.tanh_d.at(i, 0);
            }
            if (cfg_.mode != StyleMode::Geometry) {
                out.colors[gi] = Vec3{0.5 + 0.5 * a.tanh_c.at(i, 0),
                                      0.5 + 0.5 * a.tanh_c.at(i, 1),
                                      0.5 + 0.5 * a.tanh_c.at(i, 2)};
            }
        }
    }
    return out;
}

void StyleField::backward(const std::vector<Vec3>& points, const std::vector<Vec3>& d_colors,
                          const std::vector<double>& d_displacements, FieldGradients& grads,
                          Exec exec) const {
    const int n = static_cast<int>(points.size());
    if (!d_colors.empty() && d_colors.size() != points.size()) {
        throw DimensionError("field backward: color gradient size mismatch");
    }
    if (!d_displacements.empty() && d_displacements.size() != points.size()) {
        throw DimensionError("field backward: displacement gradient size mismatch");
    }
    const bool want_c = cfg_.mode != StyleMode::Geometry && !d_colors.empty();
    const bool want_d = cfg_.mode != StyleMode::Color && !d_displacements.empty();
    if (!want_c && !want_d) {
        return;
    }

    if (cfg_.direct) {
        if (n != cfg_.direct_n) {
            throw DimensionError("field backward: direct mode vertex count mismatch");
        }
        for (int i = 0; i < n; ++i) {
            if (want_c) {
                for (int c = 0; c < 3; ++c) {
                    const double th = bounded_tanh(t_.direct_color[static_cast<size_t>(i) * 3 + c]);
                    grads.direct_color[static_cast<size_t>(i) * 3 + c] +=
                        d_colors[static_cast<size_t>(i)][c] * 0.5 * (1.0 - th * th);
                }
            }
            if (want_d) {
                const double th = bounded_tanh(t_.direct_displ[static_cast<size_t>(i)]);
                grads.direct_displ[static_cast<size_t>(i)] +=
                    d_displacements[static_cast<size_t>(i)] * 0.1 * (1.0 - th * th);
            }
        }
        return;
    }

    ChunkActs a;
    for (int base = 0; base < n; base += kChunk) {
        const int len = std::min(kChunk, n - base);
        forward_chunk(cfg_, B_, t_, points.data() + base, len, a, exec);

        Matrix d_h3(len, kWidth);  // gradient on the trunk output, both branches add in
        Matrix scratch;

        // One hidden branch: output layer (lin + tanh), two ReLU hiddens,
        // then accumulate onto the trunk output gradient.
        const auto branch_backward = [&](const std::vector<LinearLayer>& layers,
                                         std::vector<LinearLayer>& glayers, const Matrix& d_raw,
                                         const Matrix* h0, const Matrix* h1) {
            kernels::linear_backward_params(h1->data.data(), d_raw.data.data(),
                                            glayers[2].w.data(), glayers[2].b.data(), len,
                                            layers[2].in, layers[2].out, exec);
            Matrix d_h1(len, kWidth);
            kernels::linear_backward_input(d_raw.data.data(), layers[2].w.data(),
                                           d_h1.data.data(), len, layers[2].in, layers[2].out,
                                           exec);
            kernels::relu_backward(h1->data.data(), d_h1.data.data(), d_h1.data.data(),
                                   static_cast<long long>(d_h1.size()), exec);
            kernels::linear_backward_params(h0->data.data(), d_h1.data.data(),
                                            glayers[1].w.data(), glayers[1].b.data(), len,
                                            layers[1].in, layers[1].out, exec);
            Matrix d_h0(len, kWidth);
            kernels::linear_backward_input(d_h1.data.data(), layers[1].w.data(),
                                           d_h0.data.data(), len, layers[1].in, layers[1].out,
                                           exec);
            kernels::relu_backward(h0->data.data(), d_h0.data.data(), d_h0.data.data(),
                                   static_cast<long long>(d_h0.size()), exec);
            kernels::linear_backward_params(a.h[3].data.data(), d_h0.data.data(),
                                            glayers[0].w.data(), glayers[0].b.data(), len,
                                            layers[0].in, layers[0].out, exec);
            scratch = Matrix(len, kWidth);
            kernels::linear_backward_input(d_h0.data.data(), layers[0].w.data(),
                                           scratch.data.data(), len, layers[0].in, layers[0].out,
                                           exec);
            for (size_t i = 0; i < d_h3.size(); ++i) {
                d_h3.data[i] += scratch.data[i];
            }
        };

        if (want_d) {
            Matrix d_raw(len, 1);
            for (int i = 0; i < len; ++i) {
                const double th = a.tanh_d.at(i, 0);
                d_raw.at(i, 0) =
                    d_displacements[static_cast<size_t>(base + i)] * 0.1 * (1.0 - th * th);
            }
            branch_backward(t_.branch_d, grads.branch_d, d_raw, &a.hd[0], &a.hd[1]);
        }
        if (want_c) {
            Matrix d_raw(len, 3);
            for (int i = 0; i < len; ++i) {
                for (int c = 0; c < 3; ++c) {
                    const double th = a.tanh_c.at(i, c);
                    d_raw.at(i, c) =
                        d_colors[static_cast<size_t>(base + i)][c] * 0.5 * (1.0 - th * th);
                }
            }
            branch_backward(t_.branch_c, grads.branch_c, d_raw, &a.hc[0], &a.hc[1]);
        }

        // Trunk: ReLU first (d_h3 is the gradient on post-activation), then
        // the layer. The gradient on x0 is never needed.
        Matrix* dy = &d_h3;
        for (int li = 3; li >= 0; --li) {
            kernels::relu_backward(a.h[li].data.data(), dy->data.data(), dy->data.data(),
                                   static_cast<long long>(dy->size()), exec);
            const Matrix& x = li == 0 ? a.x0 : a.h[li - 1];
            const LinearLayer& l = t_.trunk[static_cast<size_t>(li)];
            kernels::linear_backward_params(x.data.data(), dy->data.data(),
                                            grads.trunk[static_cast<size_t>(li)].w.data(),
                                            grads.trunk[static_cast<size_t>(li)].b.data(), len,
                                            l.in, l.out, exec);
            if (li > 0) {
                scratch = Matrix(len, l.in);
                kernels::linear_backward_input(dy->data.data(), l.w.data(), scratch.data.data(),
                                               len, l.in, l.out, exec);
                std::swap(*dy, scratch);
            }
        }
    }
}

FieldGradients StyleField::zero_gradients() const {
    FieldGradients g = t_;
    visit_field_tensors(g, [](const std::string&, ParamGroup, std::vector<double>& v) {
        std::fill(v.begin(), v.end(), 0.0);
    });
    return g;
}

size_t StyleField::n_params() const {
    size_t total = 0;
    visit_field_tensors(const_cast<FieldTensors&>(t_),
                        [&](const std::string&, ParamGroup, std::vector<double>& v) {
                            total += v.size();
                        });
    return total;
}

}  // namespace meshstyle
