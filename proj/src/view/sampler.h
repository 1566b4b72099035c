// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "core/exec.h"
#include "embed/target.h"
#include "mesh/mesh.h"
#include "render/render.h"
#include "view/camera.h"

namespace meshstyle {

// Anchor-view search: the unstylized mesh is rendered plain (no
// augmentations) from every grid pose, and each render's embedding is scored
// by the mean cosine similarity against the target parts. Mesh target parts
// are re-embedded from the pose being scored so source and target share the
// viewpoint; text and image parts are embedded once.
struct AnchorResult {
    CameraPose pose;
    int best_index = 0;
    std::vector<double> scores;  // one per grid pose, persisted in the manifest
};

AnchorResult select_anchor_scored(const Mesh& mesh, const StyleTarget& target,
                                  Embedder& embedder, const ViewSamplerConfig& cfg,
                                  const RenderConfig& render_cfg,
                                  Exec exec = default_exec());

// Ties break toward the lowest grid index (strict > comparison).
CameraPose select_anchor(const Mesh& mesh, const StyleTarget& target, Embedder& embedder,
                         const ViewSamplerConfig& cfg, const RenderConfig& render_cfg,
                         Exec exec = default_exec());

}  // namespace meshstyle
