// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "augment/augment.h"
#include "core/exec.h"
#include "embed/embedder.h"
#include "field/field.h"
#include "mesh/mesh.h"
#include "render/render.h"
#include "view/camera.h"

namespace meshstyle {

class Rng;

// Term toggles mirror the ablation flags. With use_aug off every view is
// embedded as rendered; with use_crop off the local views keep the random
// perspective but lose the crop.
struct ObjectiveConfig {
    AugmentConfig aug;
    bool use_aug = true;
    bool use_crop = true;
    bool term_full = true;
    bool term_displ = true;
    bool term_local = true;
};

// Per-part similarities, averaged over the n_aug repetitions. total is the
// sum over parts of (full + displ + local); the optimizer minimizes -total.
struct LossBreakdown {
    std::vector<double> sim_full;
    std::vector<double> sim_displ;
    std::vector<double> sim_local;
    double total = 0.0;
};

// One optimization objective evaluation: renders a (colored, displacement-
// only) image pair per view, then for each of n_aug repetitions draws fresh
// augmentations, embeds the augmented views, averages embeddings across
// views BEFORE the cosine (the average is not re-normalized), and sums the
// similarity of each term against every target part.
//
// When grads is non-null, d(total)/d(field params) is accumulated into it,
// scaled by 1/n_aug. The displacement term renders without the style colors,
// so its gradient on every color-branch parameter is exactly zero.
//
// Consumes rng in a fixed documented order: per view one background draw,
// then per repetition, per view, per enabled term (full, local, displ) the
// augmentation draws.
LossBreakdown evaluate_loss(const StyleField& field, const Mesh& mesh,
                            const std::vector<Embedding>& target_parts,
                            const std::vector<CameraPose>& views, const ObjectiveConfig& cfg,
                            const RenderConfig& render_cfg, Embedder& embedder, Rng& rng,
                            FieldGradients* grads = nullptr, Exec exec = default_exec());

// The reporting metric: cosine of the un-augmented view-averaged embedding
// of the stylized render against each target part, averaged over parts.
// Uses the fixed render_cfg.background.
double score_stylization(const StyleField& field, const Mesh& mesh,
                         const std::vector<Embedding>& target_parts,
                         const std::vector<CameraPose>& views, const RenderConfig& render_cfg,
                         Embedder& embedder, Exec exec = default_exec());

}  // namespace meshstyle
