// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "field/field.h"

namespace meshstyle {

// Everything needed to bit-reproduce evaluate(): the field config (with the
// encoding seed), the fixed matrix B, and every weight tensor, plus the
// identity of the mesh the field was trained against. Stored as a flat
// little-endian binary file with magic "MSCKPT01".
struct Checkpoint {
    StyleFieldConfig cfg;
    Matrix B;
    FieldTensors tensors;
    std::uint64_t mesh_hash = 0;
    std::int32_t subdivide_level = 0;
    std::uint64_t run_seed = 0;
    std::int32_t iteration = 0;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

Checkpoint checkpoint_from_field(const StyleField& field, std::uint64_t mesh_hash,
                                 int subdivide_level, std::uint64_t run_seed, int iteration);
StyleField field_from_checkpoint(const Checkpoint& ckpt);

}  // namespace meshstyle
