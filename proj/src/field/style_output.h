// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "core/vec3.h"

namespace meshstyle {

// Per-vertex style prediction. colors in (0,1)^3 with 0.5 reachable exactly
// at initialization; displacements in (-0.1, 0.1), applied along the content
// mesh normals.
struct StyleOutput {
    std::vector<Vec3> colors;
    std::vector<double> displacements;

    size_t size() const { return displacements.size(); }
};

}  // namespace meshstyle
