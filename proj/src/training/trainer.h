// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "embed/target.h"
#include "field/field.h"
#include "mesh/mesh.h"
#include "objective/objective.h"
#include "render/render.h"
#include "view/camera.h"

namespace meshstyle {

struct TrainConfig {
    int iterations = 1500;
    double lr = 5e-4;
    double lr_decay = 0.9;
    int lr_decay_every = 100;
    std::uint64_t seed = 0;
    int checkpoint_every = 100;
    int snapshot_every = 500;
    int subdivide_level = 0;  // recorded in checkpoints, applied by the CLI
    StyleFieldConfig field;
    ViewSamplerConfig views;
    ObjectiveConfig objective;
    RenderConfig render;
    // Artifact root: manifest.json, loss.log, checkpoints/, snapshots/,
    // meshes/. Empty disables all artifact writing.
    std::string out_dir;
};

// Everything needed to audit or re-run a training run.
struct RunManifest {
    std::map<std::string, std::string> config;  // resolved flat key=value
    std::string embedder_identity;
    std::string mesh_hash_hex;
    int anchor_index = -1;
    CameraPose anchor;
    std::vector<double> anchor_scores;  // per anchor-grid pose
    std::string loss_log = "loss.log";
    int iterations_run = 0;
    double wall_seconds = 0.0;
    std::vector<std::string> artifacts;
};

void write_manifest(const RunManifest& manifest, const std::string& path);

struct TrainResult {
    StyleField field;
    RunManifest manifest;
    std::vector<double> loss_history;  // total similarity per iteration
};

// Full optimization: one anchor search, then per iteration sample views,
// evaluate the objective, and take an Adam step on -total with
// lr(i) = lr * decay^floor(i/every). The manifest is written before the
// anchor search and updated as the run progresses; a non-finite total aborts
// with a diagnostic checkpoint. Deterministic for a fixed seed and backend.
TrainResult train(const Mesh& mesh, const StyleTarget& target, Embedder& embedder,
                  const TrainConfig& cfg, Exec exec = default_exec());

// Identity of the inputs, recorded inside exported checkpoints.
struct ExportInfo {
    std::uint64_t mesh_hash = 0;
    int subdivide_level = 0;
    std::uint64_t run_seed = 0;
    int iteration = 0;
};

// Writes meshes/stylized.obj + .ply (colors), meshes/displaced_only.obj
// (gray), final.ckpt, and snapshot PNGs of the stylized mesh from the anchor
// azimuth and +45/-45/+180 degree offsets. Returns the written paths.
std::vector<std::string> export_results(const StyleField& field, const Mesh& mesh,
                                        const CameraPose& anchor,
                                        const RenderConfig& render_cfg, const ExportInfo& info,
                                        const std::string& out_dir,
                                        Exec exec = default_exec());

}  // namespace meshstyle
