// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "training/adam.h"

#include <cmath>
#include <vector>

#include "core/errors.h"

namespace meshstyle {

namespace {

std::vector<std::vector<double>*> tensor_list(FieldTensors& t) {
    std::vector<std::vector<double>*> out;
    visit_field_tensors(t, [&](const std::string&, ParamGroup, std::vector<double>& v) {
        out.push_back(&v);
    });
    return out;
}

std::vector<const std::vector<double>*> tensor_list(const FieldTensors& t) {
    std::vector<const std::vector<double>*> out;
    visit_field_tensors(t, [&](const std::string&, ParamGroup, const std::vector<double>& v) {
        out.push_back(&v);
    });
    return out;
}

FieldTensors zeros_like(const FieldTensors& shape) {
    FieldTensors z = shape;
    visit_field_tensors(z, [](const std::string&, ParamGroup, std::vector<double>& v) {
        std::fill(v.begin(), v.end(), 0.0);
    });
    return z;
}

}  // namespace

Adam::Adam(const FieldTensors& shape) : m_(zeros_like(shape)), v_(zeros_like(shape)) {}

void Adam::step(FieldTensors& params, const FieldGradients& grads, double lr) {
    auto p = tensor_list(params);
    auto g = tensor_list(grads);
    auto m = tensor_list(m_);
    auto v = tensor_list(v_);
    if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size()) {
        throw DimensionError("adam: parameter/gradient tensor sets differ");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1, t_);
    const double bc2 = 1.0 - std::pow(beta2, t_);
    for (size_t k = 0; k < p.size(); ++k) {
        if (p[k]->size() != g[k]->size()) {
            throw DimensionError("adam: gradient tensor shape mismatch");
        }
        std::vector<double>& pk = *p[k];
        const std::vector<double>& gk = *g[k];
        std::vector<double>& mk = *m[k];
        std::vector<double>& vk = *v[k];
        for (size_t i = 0; i < pk.size(); ++i) {
            mk[i] = beta1 * mk[i] + (1.0 - beta1) * gk[i];
            vk[i] = beta2 * vk[i] + (1.0 - beta2) * gk[i] * gk[i];
            const double mhat = mk[i] / bc1;
            const double vhat = vk[i] / bc2;
            pk[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

double lr_at(double base_lr, double decay, int every, int iteration) {
    if (every <= 0) {
        return base_lr;
    }
    return base_lr * std::pow(decay, iteration / every);
}

}  // namespace meshstyle
