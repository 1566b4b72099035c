// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "objective/objective.h"

#include <cmath>
#include <functional>

#include "core/errors.h"
#include "core/rng.h"

namespace meshstyle {

namespace {

// cos(s, t) plus optional accumulation of scale * d cos/d s.
double cosine_with_grad(const Embedding& s, const Embedding& t, double scale,
                        Embedding* d_s) {
    double st = 0.0, ss = 0.0, tt = 0.0;
    for (int i = 0; i < kEmbedDim; ++i) {
        st += s[i] * t[i];
        ss += s[i] * s[i];
        tt += t[i] * t[i];
    }
    if (ss == 0.0 || tt == 0.0) {
        throw ArgumentError("similarity undefined for a zero embedding");
    }
    const double ns = std::sqrt(ss), nt = std::sqrt(tt);
    const double cosv = st / (ns * nt);
    if (d_s) {
        const double a = scale / (ns * nt);
        const double b = scale * cosv / ss;
        for (int i = 0; i < kEmbedDim; ++i) {
            (*d_s)[i] += a * t[i] - b * s[i];
        }
    }
    return cosv;
}

enum Term { kFull = 0, kLocal = 1, kDispl = 2 };

// One augmented+embedded view of one term within a repetition.
struct Leg {
    Embedding emb;
    std::function<void(const Embedding&, Image&)> backward;
    AugTape tape;  // empty stages when the augmentation is the identity
    int w = 0, h = 0;
};

Leg make_leg(const Image& render, Term term, const ObjectiveConfig& cfg, Rng& rng,
             bool want_grad, Embedder& embedder, Exec exec) {
    Leg leg;
    Image aug;
    if (!cfg.use_aug) {
        aug = render;
    } else if (term == kFull || !cfg.use_crop) {
        aug = psi_global(render, cfg.aug, rng, leg.tape, exec);
    } else {
        aug = psi_local(render, cfg.aug, rng, leg.tape, exec);
    }
    leg.w = aug.width;
    leg.h = aug.height;
    const Image normalized = clip_normalize(aug, cfg.aug, exec);
    if (want_grad) {
        EmbedResult er = embedder.embed_image_grad(normalized);
        leg.emb = std::move(er.embedding);
        leg.backward = std::move(er.backward);
    } else {
        leg.emb = embedder.embed_image(normalized);
    }
    return leg;
}

Embedding mean_embedding(const std::vector<Leg>& legs) {
    Embedding mean(kEmbedDim, 0.0);
    for (const Leg& leg : legs) {
        for (int i = 0; i < kEmbedDim; ++i) mean[i] += leg.emb[i];
    }
    const double inv = 1.0 / static_cast<double>(legs.size());
    for (double& v : mean) v *= inv;
    return mean;
}

}  // namespace

LossBreakdown evaluate_loss(const StyleField& field, const Mesh& mesh,
                            const std::vector<Embedding>& target_parts,
                            const std::vector<CameraPose>& views, const ObjectiveConfig& cfg,
                            const RenderConfig& render_cfg, Embedder& embedder, Rng& rng,
                            FieldGradients* grads, Exec exec) {
    if (views.empty()) {
        throw ArgumentError("evaluate_loss: at least one view required");
    }
    if (target_parts.empty()) {
        throw ArgumentError("evaluate_loss: no target parts");
    }
    if (cfg.aug.n_aug < 1) {
        throw ArgumentError("evaluate_loss: n_aug must be >= 1");
    }
    const size_t n_views = views.size();
    const size_t n_parts = target_parts.size();
    const int n_aug = cfg.aug.n_aug;
    const bool want_grad = grads != nullptr;
    const bool use_full_render = cfg.term_full || cfg.term_local;

    const StyleOutput style = field.evaluate(mesh.vertices, exec);

    // Geometry, colors and backgrounds are fixed for the whole evaluation;
    // repetitions redraw only the augmentations.
    std::vector<RenderPairResult> renders;
    renders.reserve(n_views);
    for (const CameraPose& pose : views) {
        const Vec3 bg = draw_background(render_cfg, rng);
        renders.push_back(render_pair(mesh, style, pose, render_cfg, bg, exec));
    }

    std::vector<Image> d_full(want_grad ? n_views : 0);
    std::vector<Image> d_displ(want_grad ? n_views : 0);
    if (want_grad) {
        for (size_t v = 0; v < n_views; ++v) {
            d_full[v] = Image(renders[v].full.image.width, renders[v].full.image.height, 0.0);
            d_displ[v] = Image(renders[v].displ.image.width, renders[v].displ.image.height, 0.0);
        }
    }

    const bool enabled[3] = {cfg.term_full, cfg.term_local, cfg.term_displ};
    std::vector<std::vector<double>> sim_sums(3, std::vector<double>(n_parts, 0.0));

    for (int rep = 0; rep < n_aug; ++rep) {
        std::vector<Leg> legs[3];
        for (int t = 0; t < 3; ++t) {
            if (enabled[t]) legs[t].reserve(n_views);
        }
        for (size_t v = 0; v < n_views; ++v) {
            if (cfg.term_full) {
                legs[kFull].push_back(make_leg(renders[v].full.image, kFull, cfg, rng,
                                               want_grad, embedder, exec));
            }
            if (cfg.term_local) {
                legs[kLocal].push_back(make_leg(renders[v].full.image, kLocal, cfg, rng,
                                                want_grad, embedder, exec));
            }
            if (cfg.term_displ) {
                legs[kDispl].push_back(make_leg(renders[v].displ.image, kDispl, cfg, rng,
                                                want_grad, embedder, exec));
            }
        }
        for (int t = 0; t < 3; ++t) {
            if (!enabled[t]) continue;
            const Embedding s_hat = mean_embedding(legs[t]);
            Embedding d_s(want_grad ? kEmbedDim : 0, 0.0);
            for (size_t p = 0; p < n_parts; ++p) {
                sim_sums[t][p] += cosine_with_grad(s_hat, target_parts[p], 1.0,
                                                   want_grad ? &d_s : nullptr);
            }
            if (!want_grad) continue;
            // d total / d leg embedding: mean over views and over repetitions.
            const double scale = 1.0 / (static_cast<double>(n_views) * n_aug);
            Embedding d_emb(kEmbedDim);
            for (int i = 0; i < kEmbedDim; ++i) d_emb[i] = d_s[i] * scale;
            for (size_t v = 0; v < n_views; ++v) {
                Leg& leg = legs[t][v];
                Image d_norm(leg.w, leg.h, 0.0);
                leg.backward(d_emb, d_norm);
                Image d_aug(leg.w, leg.h, 0.0);
                clip_normalize_backward(d_norm, cfg.aug, d_aug, exec);
                Image& d_render = (t == kDispl) ? d_displ[v] : d_full[v];
                if (leg.tape.stages.empty()) {
                    for (size_t i = 0; i < d_render.data.size(); ++i) {
                        d_render.data[i] += d_aug.data[i];
                    }
                } else {
                    augment_backward(leg.tape, d_aug, d_render, exec);
                }
            }
        }
    }

    if (want_grad) {
        StyleGrad sgrad(mesh.n_vertices());
        for (size_t v = 0; v < n_views; ++v) {
            if (use_full_render) {
                render_backward(renders[v].full.tape, d_full[v], sgrad, exec);
            }
            if (cfg.term_displ) {
                render_backward(renders[v].displ.tape, d_displ[v], sgrad, exec);
            }
        }
        field.backward(mesh.vertices, sgrad.d_colors, sgrad.d_displacements, *grads, exec);
    }

    LossBreakdown out;
    out.sim_full.resize(n_parts, 0.0);
    out.sim_displ.resize(n_parts, 0.0);
    out.sim_local.resize(n_parts, 0.0);
    const double inv_rep = 1.0 / n_aug;
    for (size_t p = 0; p < n_parts; ++p) {
        out.sim_full[p] = sim_sums[kFull][p] * inv_rep;
        out.sim_local[p] = sim_sums[kLocal][p] * inv_rep;
        out.sim_displ[p] = sim_sums[kDispl][p] * inv_rep;
        // Per-part subtotal first so single-part targets sum exactly.
        const double part = out.sim_full[p] + out.sim_displ[p] + out.sim_local[p];
        out.total += part;
    }
    return out;
}

double score_stylization(const StyleField& field, const Mesh& mesh,
                         const std::vector<Embedding>& target_parts,
                         const std::vector<CameraPose>& views, const RenderConfig& render_cfg,
                         Embedder& embedder, Exec exec) {
    if (views.empty()) {
        throw ArgumentError("score_stylization: at least one view required");
    }
    if (target_parts.empty()) {
        throw ArgumentError("score_stylization: no target parts");
    }
    const StyleOutput style = field.evaluate(mesh.vertices, exec);
    const Mesh styled = apply_style(mesh, style, true);
    Embedding mean(kEmbedDim, 0.0);
    for (const CameraPose& pose : views) {
        Image img = render_plain(styled, pose, render_cfg, render_cfg.background,
                                 render_cfg.resolution, render_cfg.resolution, exec);
        const Embedding e = embedder.embed_image(clip_normalize(img, AugmentConfig{}, exec));
        for (int i = 0; i < kEmbedDim; ++i) mean[i] += e[i];
    }
    const double inv = 1.0 / static_cast<double>(views.size());
    for (double& v : mean) v *= inv;
    double score = 0.0;
    for (const Embedding& t : target_parts) {
        score += cosine_with_grad(mean, t, 0.0, nullptr);
    }
    return score / static_cast<double>(target_parts.size());
}

}  // namespace meshstyle
