// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "view/sampler.h"

#include "augment/augment.h"
#include "core/errors.h"

namespace meshstyle {

AnchorResult select_anchor_scored(const Mesh& mesh, const StyleTarget& target,
                                  Embedder& embedder, const ViewSamplerConfig& cfg,
                                  const RenderConfig& render_cfg, Exec exec) {
    if (cfg.anchor_grid_count < 1) {
        throw ArgumentError("select_anchor: anchor_grid_count must be >= 1");
    }
    if (target.parts.empty()) {
        throw ArgumentError("select_anchor: target has no parts");
    }
    const CameraPose base = default_pose(mesh.vertices);
    const std::vector<CameraPose> grid = anchor_grid(base, cfg.anchor_grid_count);

    // Static parts keep one embedding across the whole grid.
    std::vector<Embedding> static_emb(target.parts.size());
    for (size_t p = 0; p < target.parts.size(); ++p) {
        if (target.parts[p].kind != TargetPart::Kind::Mesh) {
            static_emb[p] = embed_target_part(target.parts[p], embedder, {}, render_cfg, exec);
        }
    }

    AugmentConfig norm_cfg;
    AnchorResult result;
    result.scores.resize(grid.size());
    double best = 0.0;
    for (size_t i = 0; i < grid.size(); ++i) {
        Image img = render_plain(mesh, grid[i], render_cfg, render_cfg.background,
                                 render_cfg.resolution, render_cfg.resolution, exec);
        const Embedding e = embedder.embed_image(clip_normalize(img, norm_cfg, exec));
        double score = 0.0;
        for (size_t p = 0; p < target.parts.size(); ++p) {
            const Embedding& t = target.parts[p].kind == TargetPart::Kind::Mesh
                                     ? embed_target_part(target.parts[p], embedder,
                                                         {grid[i]}, render_cfg, exec)
                                     : static_emb[p];
            score += cosine_sim(e, t);
        }
        score /= static_cast<double>(target.parts.size());
        result.scores[i] = score;
        if (i == 0 || score > best) {
            best = score;
            result.best_index = static_cast<int>(i);
        }
    }
    result.pose = grid[result.best_index];
    return result;
}

CameraPose select_anchor(const Mesh& mesh, const StyleTarget& target, Embedder& embedder,
                         const ViewSamplerConfig& cfg, const RenderConfig& render_cfg,
                         Exec exec) {
    return select_anchor_scored(mesh, target, embedder, cfg, render_cfg, exec).pose;
}

}  // namespace meshstyle
