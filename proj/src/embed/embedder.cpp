// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "embed/embedder.h"

#include <cmath>

#include "core/errors.h"

namespace meshstyle {

double cosine_sim(const Embedding& a, const Embedding& b) {
    if (a.size() != b.size() || a.empty()) {
        throw DimensionError("cosine_sim: dimension mismatch");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        throw ArgumentError("cosine_sim: undefined for a zero vector");
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace meshstyle
