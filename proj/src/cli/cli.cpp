// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli/cli.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"

#include "core/errors.h"
#include "core/rng.h"
#include "embed/mock.h"
#include "embed/remote.h"
#include "embed/target.h"
#include "field/checkpoint.h"
#include "io/png_io.h"
#include "mesh/mesh.h"
#include "objective/objective.h"
#include "training/trainer.h"
#include "view/sampler.h"

namespace meshstyle {

namespace {

namespace fs = std::filesystem;

// Command-line/config mistakes; mapped to exit 2 (library errors are 4).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw UsageError("config: boolean expected for '" + key + "', got '" + value + "'");
}

double parse_double(const std::string& value, const std::string& key) {
    try {
        size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw UsageError("config: number expected for '" + key + "', got '" + value + "'");
    }
}

long long parse_int(const std::string& value, const std::string& key) {
    try {
        size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw UsageError("config: integer expected for '" + key + "', got '" + value + "'");
    }
}

StyleMode parse_mode(const std::string& value) {
    if (value == "full") return StyleMode::Full;
    if (value == "geometry") return StyleMode::Geometry;
    if (value == "color") return StyleMode::Color;
    throw UsageError("style mode must be full, geometry or color, got '" + value + "'");
}

// Config file keys mirror the resolved config block of the run manifest.
void apply_config_kv(TrainConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "iterations") cfg.iterations = static_cast<int>(parse_int(value, key));
    else if (key == "lr") cfg.lr = parse_double(value, key);
    else if (key == "lr_decay") cfg.lr_decay = parse_double(value, key);
    else if (key == "lr_decay_every") cfg.lr_decay_every = static_cast<int>(parse_int(value, key));
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(value, key));
    else if (key == "checkpoint_every") cfg.checkpoint_every = static_cast<int>(parse_int(value, key));
    else if (key == "snapshot_every") cfg.snapshot_every = static_cast<int>(parse_int(value, key));
    else if (key == "subdivide") cfg.subdivide_level = static_cast<int>(parse_int(value, key));
    else if (key == "encoding_k") cfg.field.encoding.k = static_cast<int>(parse_int(value, key));
    else if (key == "sigma_b") cfg.field.encoding.sigma_b = parse_double(value, key);
    else if (key == "symmetry_x") cfg.field.encoding.symmetry_x = parse_bool(value, key);
    else if (key == "symmetry_y") cfg.field.encoding.symmetry_y = parse_bool(value, key);
    else if (key == "symmetry_z") cfg.field.encoding.symmetry_z = parse_bool(value, key);
    else if (key == "use_encoding") cfg.field.use_encoding = parse_bool(value, key);
    else if (key == "direct_optim") cfg.field.direct = parse_bool(value, key);
    else if (key == "style_mode") cfg.field.mode = parse_mode(value);
    else if (key == "n_theta") cfg.views.n_theta = static_cast<int>(parse_int(value, key));
    else if (key == "jitter_sd") cfg.views.jitter_sd = parse_double(value, key);
    else if (key == "anchor_grid_count") cfg.views.anchor_grid_count = static_cast<int>(parse_int(value, key));
    else if (key == "n_aug") cfg.objective.aug.n_aug = static_cast<int>(parse_int(value, key));
    else if (key == "crop_area_fraction") cfg.objective.aug.crop_area_fraction = parse_double(value, key);
    else if (key == "perspective_distortion") cfg.objective.aug.perspective_distortion = parse_double(value, key);
    else if (key == "use_aug") cfg.objective.use_aug = parse_bool(value, key);
    else if (key == "use_crop") cfg.objective.use_crop = parse_bool(value, key);
    else if (key == "term_full") cfg.objective.term_full = parse_bool(value, key);
    else if (key == "term_displ") cfg.objective.term_displ = parse_bool(value, key);
    else if (key == "term_local") cfg.objective.term_local = parse_bool(value, key);
    else if (key == "resolution") cfg.render.resolution = static_cast<int>(parse_int(value, key));
    else if (key == "random_background") cfg.render.random_background = parse_bool(value, key);
    else if (key == "ambient") cfg.render.ambient = parse_double(value, key);
    else if (key == "raster_sigma") cfg.render.sigma = parse_double(value, key);
    else if (key == "raster_gamma") cfg.render.gamma = parse_double(value, key);
    else throw UsageError("config: unknown key '" + key + "'");
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

void load_config_file(TrainConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw UsageError("config: cannot open " + path);
    }
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config: missing '=' at " + path + ":" + std::to_string(lineno));
        }
        apply_config_kv(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
}

void apply_symmetry_spec(EncodingConfig& enc, const std::string& spec) {
    enc.symmetry_x = enc.symmetry_y = enc.symmetry_z = false;
    if (spec == "none") return;
    for (char c : spec) {
        if (c == 'x') enc.symmetry_x = true;
        else if (c == 'y') enc.symmetry_y = true;
        else if (c == 'z') enc.symmetry_z = true;
        else throw UsageError("symmetry must combine x, y, z or be 'none', got '" + spec + "'");
    }
}

// Shared target options so stylize/select-anchor/score accept the same set.
struct TargetOpts {
    std::vector<std::string> prompts;
    std::vector<std::string> images;
    std::vector<std::string> meshes;
};

void add_target_options(CLI::App* sub, TargetOpts& t) {
    sub->add_option("--prompt", t.prompts, "text target (repeatable)");
    sub->add_option("--target-image", t.images, "PNG image target (repeatable)");
    sub->add_option("--target-mesh", t.meshes, "mesh exemplar target (repeatable)");
}

Mesh load_normalized_mesh(const std::string& path) {
    const NormalizeResult n = normalize_to_unit_box(load_mesh(path));
    if (n.degenerate) {
        std::cerr << "warning: degenerate bounding box in " << path << ", kept unscaled\n";
    }
    return n.mesh;
}

StyleTarget build_target(const TargetOpts& opts) {
    StyleTarget target;
    for (const auto& p : opts.prompts) target.parts.push_back(TargetPart::from_text(p));
    for (const auto& p : opts.images) target.parts.push_back(TargetPart::from_image(read_png(p)));
    for (const auto& p : opts.meshes) {
        target.parts.push_back(TargetPart::from_mesh(load_normalized_mesh(p)));
    }
    if (target.parts.empty()) {
        throw UsageError("at least one of --prompt/--target-image/--target-mesh is required");
    }
    return target;
}

std::unique_ptr<Embedder> make_embedder(const std::string& kind, const std::string& server) {
    if (kind == "mock") return std::make_unique<MockEmbedder>();
    if (kind == "real") return std::make_unique<RemoteEmbedder>(server);
    throw UsageError("--embedder must be mock or real, got '" + kind + "'");
}

Mesh prepare_trained_mesh(const std::string& path, int subdivide_level) {
    Mesh mesh = load_normalized_mesh(path);
    for (int i = 0; i < subdivide_level; ++i) {
        mesh = subdivide_barycentric(mesh);
    }
    return mesh;
}

void check_checkpoint_mesh(const Checkpoint& ckpt, const Mesh& mesh, const std::string& what) {
    if (ckpt.mesh_hash != mesh_hash(mesh)) {
        throw FormatError(what + ": checkpoint was trained on a different mesh");
    }
}

std::vector<CameraPose> scoring_views(const Mesh& mesh, const StyleTarget& target,
                                      Embedder& embedder, const TrainConfig& cfg) {
    const CameraPose anchor =
        select_anchor(mesh, target, embedder, cfg.views, cfg.render);
    Rng rng = Rng::stream(cfg.seed, "score");
    return sample_views(anchor, cfg.views, rng);
}

int cmd_stylize(const std::string& mesh_path, const TargetOpts& target_opts,
                const std::string& embedder_kind, const std::string& server,
                TrainConfig cfg) {
    Mesh mesh = prepare_trained_mesh(mesh_path, cfg.subdivide_level);
    const StyleTarget target = build_target(target_opts);
    auto embedder = make_embedder(embedder_kind, server);

    TrainResult result = train(mesh, target, *embedder, cfg);
    const ExportInfo info{mesh_hash(mesh), cfg.subdivide_level, cfg.seed, cfg.iterations};
    std::vector<std::string> artifacts =
        export_results(result.field, mesh, result.manifest.anchor, cfg.render, info,
                       cfg.out_dir);
    result.manifest.artifacts = artifacts;
    write_manifest(result.manifest, (fs::path(cfg.out_dir) / "manifest.json").string());

    for (const auto& path : artifacts) {
        std::cout << path << "\n";
    }
    std::cout << (fs::path(cfg.out_dir) / "manifest.json").string() << "\n";
    return 0;
}

int cmd_select_anchor(const std::string& mesh_path, const TargetOpts& target_opts,
                      const std::string& embedder_kind, const std::string& server,
                      const TrainConfig& cfg, const std::string& out_dir) {
    const Mesh mesh = prepare_trained_mesh(mesh_path, cfg.subdivide_level);
    const StyleTarget target = build_target(target_opts);
    auto embedder = make_embedder(embedder_kind, server);
    const AnchorResult anchor =
        select_anchor_scored(mesh, target, *embedder, cfg.views, cfg.render);

    nlohmann::ordered_json j;
    j["azimuth"] = anchor.pose.azimuth;
    j["elevation"] = anchor.pose.elevation;
    j["distance"] = anchor.pose.distance;
    j["fov_y"] = anchor.pose.fov_y;
    j["look_at"] = {anchor.pose.look_at.x, anchor.pose.look_at.y, anchor.pose.look_at.z};
    j["index"] = anchor.best_index;
    j["score"] = anchor.scores[static_cast<size_t>(anchor.best_index)];
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        j["scores"] = anchor.scores;
        const std::string path = (fs::path(out_dir) / "anchor.json").string();
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + path);
        out << j.dump(2) << "\n";
        j.erase("scores");
        std::cerr << "anchor table written to " << path << "\n";
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_morph(const std::string& mesh_path, const std::string& ckpt_a_path,
              const std::string& ckpt_b_path, int frames, const std::string& out_dir) {
    if (frames < 2) {
        throw UsageError("--frames must be at least 2");
    }
    const Checkpoint ca = load_checkpoint(ckpt_a_path);
    const Checkpoint cb = load_checkpoint(ckpt_b_path);
    if (ca.mesh_hash != cb.mesh_hash || ca.subdivide_level != cb.subdivide_level) {
        throw FormatError("morph: checkpoints belong to different meshes");
    }
    const Mesh mesh = prepare_trained_mesh(mesh_path, ca.subdivide_level);
    check_checkpoint_mesh(ca, mesh, "morph");

    const StyleField fa = field_from_checkpoint(ca);
    const StyleField fb = field_from_checkpoint(cb);
    const StyleOutput sa = fa.evaluate(mesh.vertices);
    const StyleOutput sb = fb.evaluate(mesh.vertices);

    fs::create_directories(out_dir);
    for (int k = 0; k < frames; ++k) {
        const double alpha = static_cast<double>(k) / (frames - 1);
        const Mesh styled = apply_style(mesh, morph_styles(sa, sb, alpha), true);
        char name[32];
        std::snprintf(name, sizeof(name), "morph_%03d.obj", k);
        const std::string path = (fs::path(out_dir) / name).string();
        export_obj(styled, path);
        std::cout << path << "\n";
    }
    return 0;
}

int cmd_subdivide(const std::string& mesh_path, int levels, const std::string& out_path) {
    if (levels < 0) {
        throw UsageError("--levels must be >= 0");
    }
    Mesh mesh = load_mesh(mesh_path);
    for (int i = 0; i < levels; ++i) {
        mesh = subdivide_barycentric(mesh);
    }
    export_obj(mesh, out_path);
    std::cerr << "vertices: " << mesh.n_vertices() << " faces: " << mesh.n_faces() << "\n";
    std::cout << out_path << "\n";
    return 0;
}

int cmd_score(const std::string& mesh_path, const std::string& ckpt_path,
              const TargetOpts& target_opts, const std::string& embedder_kind,
              const std::string& server, const TrainConfig& cfg) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const Mesh mesh = prepare_trained_mesh(mesh_path, ckpt.subdivide_level);
    check_checkpoint_mesh(ckpt, mesh, "score");
    const StyleField field = field_from_checkpoint(ckpt);
    const StyleTarget target = build_target(target_opts);
    auto embedder = make_embedder(embedder_kind, server);

    const std::vector<CameraPose> views = scoring_views(mesh, target, *embedder, cfg);
    const std::vector<Embedding> parts = resolve_target(target, *embedder, views, cfg.render);
    const double score = score_stylization(field, mesh, parts, views, cfg.render, *embedder);
    std::printf("%.6f\n", score);
    return 0;
}

int cmd_export_snapshots(const std::string& mesh_path, const std::string& ckpt_path,
                         const TargetOpts& target_opts, const std::string& embedder_kind,
                         const std::string& server, const TrainConfig& cfg,
                         const std::string& out_dir) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const Mesh mesh = prepare_trained_mesh(mesh_path, ckpt.subdivide_level);
    check_checkpoint_mesh(ckpt, mesh, "export-snapshots");
    const StyleField field = field_from_checkpoint(ckpt);

    CameraPose anchor;
    const bool has_target =
        !(target_opts.prompts.empty() && target_opts.images.empty() && target_opts.meshes.empty());
    if (has_target) {
        auto embedder = make_embedder(embedder_kind, server);
        anchor = select_anchor(mesh, build_target(target_opts), *embedder, cfg.views, cfg.render);
    } else {
        anchor = default_pose(mesh.vertices);
    }

    const ExportInfo info{ckpt.mesh_hash, ckpt.subdivide_level, ckpt.run_seed, ckpt.iteration};
    for (const auto& path : export_results(field, mesh, anchor, cfg.render, info, out_dir)) {
        std::cout << path << "\n";
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"neural mesh stylization from text, image or mesh targets"};
    app.require_subcommand(1);

    // Shared option storage; only the chosen subcommand's values are read.
    std::string mesh_path, config_path, out_dir, server = "http://127.0.0.1:8731";
    std::string embedder_kind = "mock", symmetry_spec, style_mode_spec;
    std::string ckpt_path, ckpt_a, ckpt_b, out_path;
    TargetOpts targets;
    int iters = 0, subdivide = 0, resolution = 0, n_theta = 0, n_aug = 0;
    int frames = 2, levels = 1;
    int checkpoint_every = 0, snapshot_every = 0;
    std::uint64_t seed = 0;
    bool no_ffn = false, no_aug = false, no_crop = false, no_displ = false, direct = false;

    const auto add_common = [&](CLI::App* sub, bool with_out) {
        sub->add_option("--mesh", mesh_path, "input mesh (.obj)")->required();
        sub->add_option("--config", config_path, "flat key=value config file");
        sub->add_option("--embedder", embedder_kind, "mock|real (default mock)");
        sub->add_option("--server", server, "real embedder URL");
        sub->add_option("--seed", seed, "run seed");
        if (with_out) sub->add_option("--out", out_dir, "output directory")->required();
    };

    CLI::App* stylize = app.add_subcommand("stylize", "optimize a style field for a mesh");
    add_common(stylize, true);
    add_target_options(stylize, targets);
    stylize->add_option("--iters", iters, "training iterations");
    stylize->add_option("--subdivide", subdivide, "barycentric subdivision levels");
    stylize->add_option("--resolution", resolution, "render resolution");
    stylize->add_option("--n-theta", n_theta, "views per iteration");
    stylize->add_option("--n-aug", n_aug, "augmentation redraws per iteration");
    stylize->add_option("--checkpoint-every", checkpoint_every, "checkpoint cadence");
    stylize->add_option("--snapshot-every", snapshot_every, "snapshot cadence");
    stylize->add_option("--symmetry", symmetry_spec, "mirror encoding axes: x|y|z combos or none");
    stylize->add_option("--style-mode", style_mode_spec, "full|geometry|color");
    stylize->add_flag("--no-ffn", no_ffn, "disable the Fourier encoding");
    stylize->add_flag("--no-aug", no_aug, "disable 2D augmentations");
    stylize->add_flag("--no-crop", no_crop, "local views keep perspective but lose the crop");
    stylize->add_flag("--no-displ-term", no_displ, "drop the displacement-only loss term");
    stylize->add_flag("--direct-optim", direct, "optimize per-vertex values, no network");

    CLI::App* anchor_cmd = app.add_subcommand("select-anchor", "run only the anchor-view search");
    add_common(anchor_cmd, false);
    add_target_options(anchor_cmd, targets);
    anchor_cmd->add_option("--subdivide", subdivide, "barycentric subdivision levels");
    anchor_cmd->add_option("--out", out_dir, "directory for the score table");

    CLI::App* morph = app.add_subcommand("morph", "interpolate two checkpoints on one mesh");
    morph->add_option("--mesh", mesh_path, "input mesh (.obj)")->required();
    morph->add_option("--ckpt-a", ckpt_a, "first checkpoint")->required();
    morph->add_option("--ckpt-b", ckpt_b, "second checkpoint")->required();
    morph->add_option("--frames", frames, "number of interpolated meshes (>= 2)");
    morph->add_option("--out", out_dir, "output directory")->required();

    CLI::App* subdiv = app.add_subcommand("subdivide", "barycentric-subdivide a mesh");
    subdiv->add_option("--mesh", mesh_path, "input mesh (.obj)")->required();
    subdiv->add_option("--levels", levels, "subdivision levels");
    subdiv->add_option("--out", out_path, "output .obj path")->required();

    CLI::App* score = app.add_subcommand("score", "similarity score of a trained checkpoint");
    add_common(score, false);
    add_target_options(score, targets);
    score->add_option("--ckpt", ckpt_path, "trained checkpoint")->required();

    CLI::App* snaps = app.add_subcommand("export-snapshots", "render a checkpoint to PNGs");
    add_common(snaps, true);
    add_target_options(snaps, targets);
    snaps->add_option("--ckpt", ckpt_path, "trained checkpoint")->required();
    snaps->add_option("--resolution", resolution, "render resolution");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        TrainConfig cfg;
        if (!config_path.empty()) {
            load_config_file(cfg, config_path);
        }
        // Not every subcommand defines every shared flag; App::count throws
        // on unknown names, so look the option up without throwing first.
        const auto opt_set = [&](CLI::App* sub, const char* name) {
            const CLI::Option* opt = sub->get_option_no_throw(name);
            return opt != nullptr && opt->count() > 0;
        };
        CLI::App* active = app.get_subcommands().front();
        if (opt_set(active, "--seed")) cfg.seed = seed;
        cfg.field.encoding.rng_seed = cfg.seed;

        if (active == stylize) {
            if (opt_set(stylize, "--iters")) cfg.iterations = iters;
            if (opt_set(stylize, "--subdivide")) cfg.subdivide_level = subdivide;
            if (opt_set(stylize, "--resolution")) cfg.render.resolution = resolution;
            if (opt_set(stylize, "--n-theta")) cfg.views.n_theta = n_theta;
            if (opt_set(stylize, "--n-aug")) cfg.objective.aug.n_aug = n_aug;
            if (opt_set(stylize, "--checkpoint-every")) cfg.checkpoint_every = checkpoint_every;
            if (opt_set(stylize, "--snapshot-every")) cfg.snapshot_every = snapshot_every;
            if (opt_set(stylize, "--symmetry")) apply_symmetry_spec(cfg.field.encoding, symmetry_spec);
            if (opt_set(stylize, "--style-mode")) cfg.field.mode = parse_mode(style_mode_spec);
            if (no_ffn) cfg.field.use_encoding = false;
            if (no_aug) cfg.objective.use_aug = false;
            if (no_crop) cfg.objective.use_crop = false;
            if (no_displ) cfg.objective.term_displ = false;
            if (direct) cfg.field.direct = true;
            cfg.out_dir = out_dir;
            return cmd_stylize(mesh_path, targets, embedder_kind, server, cfg);
        }
        if (active == anchor_cmd) {
            if (opt_set(anchor_cmd, "--subdivide")) cfg.subdivide_level = subdivide;
            return cmd_select_anchor(mesh_path, targets, embedder_kind, server, cfg, out_dir);
        }
        if (active == morph) {
            return cmd_morph(mesh_path, ckpt_a, ckpt_b, frames, out_dir);
        }
        if (active == subdiv) {
            return cmd_subdivide(mesh_path, levels, out_path);
        }
        if (active == score) {
            return cmd_score(mesh_path, ckpt_path, targets, embedder_kind, server, cfg);
        }
        if (active == snaps) {
            if (opt_set(snaps, "--resolution")) cfg.render.resolution = resolution;
            return cmd_export_snapshots(mesh_path, ckpt_path, targets, embedder_kind, server,
                                        cfg, out_dir);
        }
        throw UsageError("no command selected");
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CapabilityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("meshstyle");
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace meshstyle
