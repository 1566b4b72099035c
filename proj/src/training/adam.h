// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "field/field.h"

namespace meshstyle {

// Canonical Adam (beta1 0.9, beta2 0.999, eps 1e-8) over the field's tensor
// set; the learning rate is supplied per step so the schedule stays with the
// trainer. Minimizes: callers pass the gradient of the quantity to shrink.
class Adam {
public:
    Adam() = default;
    explicit Adam(const FieldTensors& shape);

    void step(FieldTensors& params, const FieldGradients& grads, double lr);

    int steps_taken() const { return t_; }
    const FieldTensors& first_moment() const { return m_; }
    const FieldTensors& second_moment() const { return v_; }

    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

private:
    FieldTensors m_;
    FieldTensors v_;
    int t_ = 0;
};

// lr(i) = base * decay^floor(i / every) for iteration index i (0-based).
double lr_at(double base_lr, double decay, int every, int iteration);

}  // namespace meshstyle
