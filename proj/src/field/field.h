// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "core/exec.h"
#include "core/matrix.h"
#include "core/vec3.h"
#include "field/encoding.h"
#include "field/style_output.h"

namespace meshstyle {

// Which trainable parameters a tensor belongs to. The displacement loss term
// only updates Geometry parameters; see objective gradient routing.
enum class ParamGroup {
    Geometry,  // trunk and displacement branch (or direct displacements)
    Color,     // color branch (or direct color logits)
};

// Restricts what the field expresses: Geometry forces colors to 0.5, Color
// forces displacements to 0. Full is the default.
enum class StyleMode {
    Full,
    Geometry,
    Color,
};

struct LinearLayer {
    int in = 0;
    int out = 0;
    std::vector<double> w;  // in x out, row-major
    std::vector<double> b;  // out
};

struct StyleFieldConfig {
    EncodingConfig encoding;
    bool use_encoding = true;  // false: feed raw coordinates (the -ffn ablation)
    bool direct = false;       // optimize per-vertex logits, no network
    int direct_n = 0;          // vertex count bound at creation in direct mode
    StyleMode mode = StyleMode::Full;
};

// Parameter storage; gradients use the same shape. Network mode fills the
// layer vectors, direct mode the logit vectors.
struct FieldTensors {
    std::vector<LinearLayer> trunk;     // 4 layers, ReLU
    std::vector<LinearLayer> branch_d;  // 2 hidden + 1-wide output
    std::vector<LinearLayer> branch_c;  // 2 hidden + 3-wide output
    std::vector<double> direct_color;   // 3n logits
    std::vector<double> direct_displ;   // n logits
};

using FieldGradients = FieldTensors;

// Walks every trainable tensor in a fixed order. fn(name, group, values).
template <typename T, typename Fn>
void visit_field_tensors(T& t, Fn&& fn) {
    const auto layers = [&](auto& vec, const char* prefix, ParamGroup group) {
        for (size_t i = 0; i < vec.size(); ++i) {
            const std::string base = std::string(prefix) + std::to_string(i);
            fn(base + ".w", group, vec[i].w);
            fn(base + ".b", group, vec[i].b);
        }
    };
    layers(t.trunk, "trunk", ParamGroup::Geometry);
    layers(t.branch_d, "displ", ParamGroup::Geometry);
    layers(t.branch_c, "color", ParamGroup::Color);
    if (!t.direct_displ.empty() || !t.direct_color.empty()) {
        fn("direct.displ", ParamGroup::Geometry, t.direct_displ);
        fn("direct.color", ParamGroup::Color, t.direct_color);
    }
}

// The neural style field: Fourier encoding, shared 4-layer trunk, and two
// branches producing per-point displacement d in (-0.1, 0.1) and color c in
// (0, 1)^3. Output layers start at exactly zero so a fresh field is the
// identity style (d = 0, c = 0.5). Evaluation is pure; weights are mutated
// only between evaluations (by the optimizer or checkpoint load).
class StyleField {
public:
    StyleField() = default;

    static StyleField create(const StyleFieldConfig& cfg);

    const StyleFieldConfig& config() const { return cfg_; }
    const Matrix& encoding_matrix() const { return B_; }

    StyleOutput evaluate(const std::vector<Vec3>& points, Exec exec = default_exec()) const;

    // Accumulates d(loss)/d(params) into grads given upstream gradients on
    // the outputs. Internally re-runs the forward pass in chunks, so memory
    // stays bounded for large meshes.
    void backward(const std::vector<Vec3>& points, const std::vector<Vec3>& d_colors,
                  const std::vector<double>& d_displacements, FieldGradients& grads,
                  Exec exec = default_exec()) const;

    FieldGradients zero_gradients() const;
    size_t n_params() const;

    FieldTensors& tensors() { return t_; }
    const FieldTensors& tensors() const { return t_; }

    // Used by checkpoint load, which replaces the randomly drawn B.
    void set_state(const StyleFieldConfig& cfg, Matrix B, FieldTensors t);

private:
    StyleFieldConfig cfg_;
    Matrix B_;  // k x 3, fixed
    FieldTensors t_;
};

}  // namespace meshstyle
