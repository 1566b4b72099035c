// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "core/image.h"
#include "embed/embedder.h"
#include "mesh/mesh.h"
#include "render/render.h"
#include "view/camera.h"

namespace meshstyle {

// One stylization target. Each part is resolved to a single embedding and
// the similarity loss sums over parts.
struct TargetPart {
    enum class Kind { Text, Image, Mesh };

    Kind kind = Kind::Text;
    std::string text;  // Kind::Text: the prompt
    Image image;       // Kind::Image: raw RGB in [0,1], not yet normalized
    Mesh mesh;         // Kind::Mesh: exemplar geometry, rendered per view

    static TargetPart from_text(std::string t);
    static TargetPart from_image(Image img);
    static TargetPart from_mesh(Mesh m);
};

struct StyleTarget {
    std::vector<TargetPart> parts;
};

bool has_mesh_part(const StyleTarget& target);

// Resolves one part. Text and image parts ignore the views; a mesh part is
// rendered from each given view against the fixed cfg.background and
// embedded as the mean of the per-view embeddings.
Embedding embed_target_part(const TargetPart& part, Embedder& embedder,
                            const std::vector<CameraPose>& views, const RenderConfig& cfg,
                            Exec exec = default_exec());

// Resolves every part. Mesh-part embeddings depend on the views, so targets
// containing one must be re-resolved whenever the views are re-sampled.
std::vector<Embedding> resolve_target(const StyleTarget& target, Embedder& embedder,
                                      const std::vector<CameraPose>& views,
                                      const RenderConfig& cfg, Exec exec = default_exec());

}  // namespace meshstyle
