// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "embed/target.h"

#include <utility>

#include "augment/augment.h"
#include "core/errors.h"

namespace meshstyle {

TargetPart TargetPart::from_text(std::string t) {
    TargetPart p;
    p.kind = Kind::Text;
    p.text = std::move(t);
    return p;
}

TargetPart TargetPart::from_image(Image img) {
    TargetPart p;
    p.kind = Kind::Image;
    p.image = std::move(img);
    return p;
}

TargetPart TargetPart::from_mesh(Mesh m) {
    TargetPart p;
    p.kind = Kind::Mesh;
    p.mesh = std::move(m);
    return p;
}

bool has_mesh_part(const StyleTarget& target) {
    for (const auto& part : target.parts) {
        if (part.kind == TargetPart::Kind::Mesh) return true;
    }
    return false;
}

namespace {

Embedding embed_mesh_part(const Mesh& mesh, Embedder& embedder,
                          const std::vector<CameraPose>& views, const RenderConfig& cfg,
                          Exec exec) {
    if (views.empty()) {
        throw ArgumentError("resolve_target: mesh part requires at least one view");
    }
    AugmentConfig norm_cfg;
    Embedding mean(kEmbedDim, 0.0);
    for (const auto& pose : views) {
        Image img = render_plain(mesh, pose, cfg, cfg.background, cfg.resolution,
                                 cfg.resolution, exec);
        Embedding e = embedder.embed_image(clip_normalize(img, norm_cfg, exec));
        for (int i = 0; i < kEmbedDim; ++i) mean[i] += e[i];
    }
    const double inv = 1.0 / static_cast<double>(views.size());
    for (double& v : mean) v *= inv;
    return mean;
}

}  // namespace

Embedding embed_target_part(const TargetPart& part, Embedder& embedder,
                            const std::vector<CameraPose>& views, const RenderConfig& cfg,
                            Exec exec) {
    AugmentConfig norm_cfg;
    switch (part.kind) {
        case TargetPart::Kind::Text:
            return embedder.embed_text(part.text);
        case TargetPart::Kind::Image:
            return embedder.embed_image(clip_normalize(part.image, norm_cfg, exec));
        case TargetPart::Kind::Mesh:
            return embed_mesh_part(part.mesh, embedder, views, cfg, exec);
    }
    throw ArgumentError("embed_target_part: unknown part kind");
}

std::vector<Embedding> resolve_target(const StyleTarget& target, Embedder& embedder,
                                      const std::vector<CameraPose>& views,
                                      const RenderConfig& cfg, Exec exec) {
    if (target.parts.empty()) {
        throw ArgumentError("resolve_target: target has no parts");
    }
    std::vector<Embedding> out;
    out.reserve(target.parts.size());
    for (const auto& part : target.parts) {
        out.push_back(embed_target_part(part, embedder, views, cfg, exec));
    }
    return out;
}

}  // namespace meshstyle
