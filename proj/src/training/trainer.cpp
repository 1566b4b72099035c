// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "training/trainer.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "core/errors.h"
#include "core/rng.h"
#include "field/checkpoint.h"
#include "io/png_io.h"
#include "training/adam.h"
#include "view/sampler.h"

namespace meshstyle {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_hex(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

const char* mode_name(StyleMode mode) {
    switch (mode) {
        case StyleMode::Geometry: return "geometry";
        case StyleMode::Color: return "color";
        case StyleMode::Full: break;
    }
    return "full";
}

std::map<std::string, std::string> resolved_config(const TrainConfig& cfg) {
    std::map<std::string, std::string> m;
    m["iterations"] = std::to_string(cfg.iterations);
    m["lr"] = fmt_double(cfg.lr);
    m["lr_decay"] = fmt_double(cfg.lr_decay);
    m["lr_decay_every"] = std::to_string(cfg.lr_decay_every);
    m["seed"] = std::to_string(cfg.seed);
    m["checkpoint_every"] = std::to_string(cfg.checkpoint_every);
    m["snapshot_every"] = std::to_string(cfg.snapshot_every);
    m["subdivide"] = std::to_string(cfg.subdivide_level);
    m["encoding_k"] = std::to_string(cfg.field.encoding.k);
    m["sigma_b"] = fmt_double(cfg.field.encoding.sigma_b);
    m["symmetry_x"] = cfg.field.encoding.symmetry_x ? "true" : "false";
    m["symmetry_y"] = cfg.field.encoding.symmetry_y ? "true" : "false";
    m["symmetry_z"] = cfg.field.encoding.symmetry_z ? "true" : "false";
    m["use_encoding"] = cfg.field.use_encoding ? "true" : "false";
    m["direct_optim"] = cfg.field.direct ? "true" : "false";
    m["style_mode"] = mode_name(cfg.field.mode);
    m["n_theta"] = std::to_string(cfg.views.n_theta);
    m["jitter_sd"] = fmt_double(cfg.views.jitter_sd);
    m["anchor_grid_count"] = std::to_string(cfg.views.anchor_grid_count);
    m["n_aug"] = std::to_string(cfg.objective.aug.n_aug);
    m["crop_area_fraction"] = fmt_double(cfg.objective.aug.crop_area_fraction);
    m["perspective_distortion"] = fmt_double(cfg.objective.aug.perspective_distortion);
    m["use_aug"] = cfg.objective.use_aug ? "true" : "false";
    m["use_crop"] = cfg.objective.use_crop ? "true" : "false";
    m["term_full"] = cfg.objective.term_full ? "true" : "false";
    m["term_displ"] = cfg.objective.term_displ ? "true" : "false";
    m["term_local"] = cfg.objective.term_local ? "true" : "false";
    m["resolution"] = std::to_string(cfg.render.resolution);
    m["random_background"] = cfg.render.random_background ? "true" : "false";
    m["ambient"] = fmt_double(cfg.render.ambient);
    m["raster_sigma"] = fmt_double(cfg.render.sigma);
    m["raster_gamma"] = fmt_double(cfg.render.gamma);
    return m;
}

ordered_json pose_json(const CameraPose& pose) {
    ordered_json j;
    j["azimuth"] = pose.azimuth;
    j["elevation"] = pose.elevation;
    j["distance"] = pose.distance;
    j["fov_y"] = pose.fov_y;
    j["look_at"] = {pose.look_at.x, pose.look_at.y, pose.look_at.z};
    return j;
}

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    out << body;
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

}  // namespace

void write_manifest(const RunManifest& manifest, const std::string& path) {
    ordered_json j;
    j["config"] = manifest.config;
    j["embedder"] = manifest.embedder_identity;
    j["mesh_hash"] = manifest.mesh_hash_hex;
    if (manifest.anchor_index >= 0) {
        j["anchor"] = pose_json(manifest.anchor);
        j["anchor_index"] = manifest.anchor_index;
        j["anchor_scores"] = manifest.anchor_scores;
    }
    j["loss_log"] = manifest.loss_log;
    j["iterations_run"] = manifest.iterations_run;
    j["wall_seconds"] = manifest.wall_seconds;
    j["artifacts"] = manifest.artifacts;
    write_text_file(path, j.dump(2) + "\n");
}

TrainResult train(const Mesh& mesh, const StyleTarget& target, Embedder& embedder,
                  const TrainConfig& cfg, Exec exec) {
    if (cfg.iterations < 0) {
        throw ArgumentError("train: iterations must be >= 0");
    }
    const auto t_start = std::chrono::steady_clock::now();
    const bool write_artifacts = !cfg.out_dir.empty();
    const std::uint64_t content_hash = mesh_hash(mesh);

    StyleFieldConfig field_cfg = cfg.field;
    if (field_cfg.direct) {
        field_cfg.direct_n = static_cast<int>(mesh.n_vertices());
    }

    TrainResult result;
    result.field = StyleField::create(field_cfg);
    result.manifest.config = resolved_config(cfg);
    result.manifest.embedder_identity = embedder.identity();
    result.manifest.mesh_hash_hex = fmt_hex(content_hash);

    std::string manifest_path;
    std::ofstream loss_log;
    if (write_artifacts) {
        fs::create_directories(cfg.out_dir);
        fs::create_directories(fs::path(cfg.out_dir) / "checkpoints");
        fs::create_directories(fs::path(cfg.out_dir) / "snapshots");
        fs::create_directories(fs::path(cfg.out_dir) / "meshes");
        manifest_path = (fs::path(cfg.out_dir) / "manifest.json").string();
        // Written before any embedding work so aborted runs stay diagnosable.
        write_manifest(result.manifest, manifest_path);
        const std::string log_path = (fs::path(cfg.out_dir) / result.manifest.loss_log).string();
        loss_log.open(log_path, std::ios::binary | std::ios::trunc);
        if (!loss_log) {
            throw IoError("cannot open for writing: " + log_path);
        }
    }

    const AnchorResult anchor =
        select_anchor_scored(mesh, target, embedder, cfg.views, cfg.render, exec);
    result.manifest.anchor = anchor.pose;
    result.manifest.anchor_index = anchor.best_index;
    result.manifest.anchor_scores = anchor.scores;
    if (write_artifacts) {
        write_manifest(result.manifest, manifest_path);
    }

    // Static targets resolve once; mesh parts track the sampled views.
    const bool dynamic_target = has_mesh_part(target);
    std::vector<Embedding> parts;
    if (!dynamic_target) {
        parts = resolve_target(target, embedder, {}, cfg.render, exec);
    }

    Adam adam(result.field.tensors());
    result.loss_history.reserve(static_cast<size_t>(cfg.iterations));
    for (int i = 0; i < cfg.iterations; ++i) {
        Rng view_rng = Rng::stream(cfg.seed, "views", static_cast<std::uint64_t>(i));
        Rng loss_rng = Rng::stream(cfg.seed, "loss", static_cast<std::uint64_t>(i));
        const std::vector<CameraPose> views = sample_views(anchor.pose, cfg.views, view_rng);
        if (dynamic_target) {
            parts = resolve_target(target, embedder, views, cfg.render, exec);
        }

        FieldGradients grads = result.field.zero_gradients();
        const LossBreakdown loss = evaluate_loss(result.field, mesh, parts, views,
                                                 cfg.objective, cfg.render, embedder,
                                                 loss_rng, &grads, exec);
        if (!std::isfinite(loss.total)) {
            if (write_artifacts) {
                const std::string diag =
                    (fs::path(cfg.out_dir) / "checkpoints" / "diagnostic.ckpt").string();
                save_checkpoint(checkpoint_from_field(result.field, content_hash,
                                                      cfg.subdivide_level, cfg.seed, i),
                                diag);
                throw NumericsError("train: non-finite loss at iteration " +
                                    std::to_string(i) + "; state saved to " + diag);
            }
            throw NumericsError("train: non-finite loss at iteration " + std::to_string(i));
        }

        // Ascent on similarity = descent on -total.
        visit_field_tensors(grads, [](const std::string&, ParamGroup, std::vector<double>& v) {
            for (double& x : v) x = -x;
        });
        adam.step(result.field.tensors(), grads,
                  lr_at(cfg.lr, cfg.lr_decay, cfg.lr_decay_every, i));

        result.loss_history.push_back(loss.total);
        result.manifest.iterations_run = i + 1;
        if (write_artifacts) {
            ordered_json line;
            line["iteration"] = i;
            line["sim_full"] = sum(loss.sim_full);
            line["sim_displ"] = sum(loss.sim_displ);
            line["sim_local"] = sum(loss.sim_local);
            line["total"] = loss.total;
            loss_log << line.dump() << "\n" << std::flush;
            if (cfg.checkpoint_every > 0 && (i + 1) % cfg.checkpoint_every == 0) {
                char name[40];
                std::snprintf(name, sizeof(name), "iter_%06d.ckpt", i + 1);
                save_checkpoint(checkpoint_from_field(result.field, content_hash,
                                                      cfg.subdivide_level, cfg.seed, i + 1),
                                (fs::path(cfg.out_dir) / "checkpoints" / name).string());
            }
            if (cfg.snapshot_every > 0 && (i + 1) % cfg.snapshot_every == 0) {
                const StyleOutput style = result.field.evaluate(mesh.vertices, exec);
                const Mesh styled = apply_style(mesh, style, true);
                const Image img =
                    render_plain(styled, anchor.pose, cfg.render, cfg.render.background,
                                 cfg.render.resolution, cfg.render.resolution, exec);
                char png[40];
                std::snprintf(png, sizeof(png), "iter_%06d.png", i + 1);
                write_png((fs::path(cfg.out_dir) / "snapshots" / png).string(), img);
            }
        }
    }

    result.manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    if (write_artifacts) {
        write_manifest(result.manifest, manifest_path);
    }
    return result;
}

std::vector<std::string> export_results(const StyleField& field, const Mesh& mesh,
                                        const CameraPose& anchor,
                                        const RenderConfig& render_cfg, const ExportInfo& info,
                                        const std::string& out_dir, Exec exec) {
    if (out_dir.empty()) {
        throw ArgumentError("export_results: output directory required");
    }
    fs::create_directories(fs::path(out_dir) / "meshes");
    fs::create_directories(fs::path(out_dir) / "snapshots");

    std::vector<std::string> written;
    const StyleOutput style = field.evaluate(mesh.vertices, exec);
    const Mesh styled = apply_style(mesh, style, true);
    const Mesh displaced = apply_style(mesh, style, false);

    const std::string obj = (fs::path(out_dir) / "meshes" / "stylized.obj").string();
    export_obj(styled, obj);
    written.push_back(obj);
    const std::string ply = (fs::path(out_dir) / "meshes" / "stylized.ply").string();
    export_ply(styled, ply);
    written.push_back(ply);
    const std::string displ = (fs::path(out_dir) / "meshes" / "displaced_only.obj").string();
    export_obj(displaced, displ);
    written.push_back(displ);

    const std::string ckpt = (fs::path(out_dir) / "final.ckpt").string();
    save_checkpoint(checkpoint_from_field(field, info.mesh_hash, info.subdivide_level,
                                          info.run_seed, info.iteration),
                    ckpt);
    written.push_back(ckpt);

    const double offsets[4] = {0.0, 0.7853981633974483, -0.7853981633974483,
                               3.141592653589793};
    const char* names[4] = {"final_az+000.png", "final_az+045.png", "final_az-045.png",
                            "final_az+180.png"};
    for (int k = 0; k < 4; ++k) {
        CameraPose pose = anchor;
        pose.azimuth += offsets[k];
        const Image img = render_plain(styled, pose, render_cfg, render_cfg.background,
                                       render_cfg.resolution, render_cfg.resolution, exec);
        const std::string path = (fs::path(out_dir) / "snapshots" / names[k]).string();
        write_png(path, img);
        written.push_back(path);
    }
    return written;
}

}  // namespace meshstyle
