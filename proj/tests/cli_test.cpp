// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cli/cli.h"
#include "core/rng.h"
#include "field/checkpoint.h"
#include "field/field.h"
#include "mesh/mesh.h"
#include "support.h"

using namespace meshstyle;
using namespace meshstyle::test;

namespace fs = std::filesystem;

namespace {

// Redirects file descriptor 1 into a file for the duration of one CLI call,
// catching both std::cout and printf output.
class CaptureStdout {
public:
    CaptureStdout() : path_(tmp_dir("stdout") + "/out.txt") {
        std::cout.flush();
        std::fflush(stdout);
        saved_ = ::dup(1);
        const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
        ::dup2(fd, 1);
        ::close(fd);
    }

    std::string finish() {
        std::cout.flush();
        std::fflush(stdout);
        ::dup2(saved_, 1);
        ::close(saved_);
        saved_ = -1;
        std::ifstream in(path_, std::ios::binary);
        std::ostringstream body;
        body << in.rdbuf();
        return body.str();
    }

    ~CaptureStdout() {
        if (saved_ >= 0) {
            ::dup2(saved_, 1);
            ::close(saved_);
        }
    }

private:
    std::string path_;
    int saved_ = -1;
};

std::string write_cube_obj(const std::string& dir) {
    const std::string path = (fs::path(dir) / "cube.obj").string();
    export_obj(make_cube(), path);
    return path;
}

// The small-run config used to keep CLI invocations fast; loaded by every
// subcommand.
std::string write_small_config(const std::string& dir) {
    return write_text(dir, "small.cfg",
                      "# tiny test run\n"
                      "encoding_k = 8\n"
                      "anchor_grid_count = 4\n"
                      "n_theta = 2\n"
                      "resolution = 64\n"
                      "iterations = 2\n");
}

// Mesh exactly as the CLI prepares it (normalized, optionally subdivided).
Mesh cli_prepared_mesh(const std::string& obj_path, int levels = 0) {
    Mesh mesh = normalize_to_unit_box(load_mesh(obj_path)).mesh;
    for (int i = 0; i < levels; ++i) {
        mesh = subdivide_barycentric(mesh);
    }
    return mesh;
}

std::string save_field_checkpoint(const std::string& dir, const std::string& name,
                                  const StyleField& field, std::uint64_t hash, int level,
                                  std::uint64_t seed, int iteration) {
    const std::string path = (fs::path(dir) / name).string();
    save_checkpoint(checkpoint_from_field(field, hash, level, seed, iteration), path);
    return path;
}

StyleField fresh_field(std::uint64_t seed) {
    StyleFieldConfig cfg;
    cfg.encoding.k = 8;
    cfg.encoding.rng_seed = seed;
    return StyleField::create(cfg);
}

StyleField noisy_field(std::uint64_t seed, double scale) {
    StyleField field = fresh_field(seed);
    Rng rng(seed + 100);
    visit_field_tensors(field.tensors(), [&](const std::string&, ParamGroup,
                                             std::vector<double>& v) {
        for (double& x : v) x = rng.normal(0.0, scale);
    });
    return field;
}

}  // namespace

TEST_CASE("stylize runs end to end and honors flag precedence", "[cli]") {
    const std::string dir = tmp_dir("cli_stylize");
    const std::string mesh = write_cube_obj(dir);
    const std::string config = write_small_config(dir);
    const std::string out = (fs::path(dir) / "run").string();

    CaptureStdout cap;
    const int rc = run_cli({"stylize", "--mesh", mesh, "--config", config, "--prompt",
                            "mossy stone cube", "--out", out, "--iters", "3"});
    const std::string stdout_text = cap.finish();
    REQUIRE(rc == 0);

    REQUIRE(fs::exists(fs::path(out) / "meshes" / "stylized.obj"));
    REQUIRE(fs::exists(fs::path(out) / "meshes" / "stylized.ply"));
    REQUIRE(fs::exists(fs::path(out) / "meshes" / "displaced_only.obj"));
    REQUIRE(fs::exists(fs::path(out) / "final.ckpt"));
    REQUIRE(fs::exists(fs::path(out) / "loss.log"));

    // Every artifact path is announced on stdout, manifest last.
    REQUIRE(stdout_text.find("stylized.ply") != std::string::npos);
    REQUIRE(stdout_text.find("manifest.json") != std::string::npos);

    // The --iters flag wins over the config file's iterations=2.
    std::ifstream in(fs::path(out) / "manifest.json");
    const auto manifest = nlohmann::json::parse(in);
    REQUIRE(manifest["config"]["iterations"] == "3");
    REQUIRE(manifest["config"]["encoding_k"] == "8");
    REQUIRE(manifest["iterations_run"] == 3);
    REQUIRE(manifest["artifacts"].size() == 8);

    std::ifstream log(fs::path(out) / "loss.log");
    int lines = 0;
    std::string line;
    while (std::getline(log, line)) ++lines;
    REQUIRE(lines == 3);
}

TEST_CASE("stylize records ablation flags in the checkpoint", "[cli]") {
    const std::string dir = tmp_dir("cli_flags");
    const std::string mesh = write_cube_obj(dir);
    const std::string config = write_small_config(dir);
    const std::string out = (fs::path(dir) / "run").string();

    CaptureStdout cap;
    const int rc = run_cli({"stylize", "--mesh", mesh, "--config", config, "--prompt",
                            "brushed steel", "--out", out, "--iters", "1", "--symmetry", "z",
                            "--no-ffn", "--seed", "5"});
    cap.finish();
    REQUIRE(rc == 0);

    const Checkpoint ck = load_checkpoint((fs::path(out) / "final.ckpt").string());
    REQUIRE(ck.cfg.encoding.symmetry_z);
    REQUIRE_FALSE(ck.cfg.encoding.symmetry_x);
    REQUIRE_FALSE(ck.cfg.use_encoding);
    REQUIRE(ck.cfg.encoding.rng_seed == 5);
    REQUIRE(ck.run_seed == 5);
    // Without the encoding the trunk consumes raw coordinates.
    REQUIRE(ck.tensors.trunk[0].in == 3);
}

TEST_CASE("usage problems exit with code 2", "[cli]") {
    const std::string dir = tmp_dir("cli_usage");
    const std::string mesh = write_cube_obj(dir);
    const std::string out = (fs::path(dir) / "run").string();

    // No target part given.
    REQUIRE(run_cli({"stylize", "--mesh", mesh, "--out", out, "--iters", "1"}) == 2);
    // Unknown config key.
    const std::string bad_cfg = write_text(dir, "bad.cfg", "iterations = 2\nwat = 7\n");
    REQUIRE(run_cli({"stylize", "--mesh", mesh, "--config", bad_cfg, "--prompt", "x",
                     "--out", out}) == 2);
    // Non-integer flag value is a parser error.
    REQUIRE(run_cli({"stylize", "--mesh", mesh, "--prompt", "x", "--out", out, "--iters",
                     "abc"}) == 2);
    // Unknown subcommand / missing subcommand.
    REQUIRE(run_cli({"stylizeee"}) == 2);
    REQUIRE(run_cli({}) == 2);
    // Morph with too few frames.
    REQUIRE(run_cli({"morph", "--mesh", mesh, "--ckpt-a", "a.ckpt", "--ckpt-b", "b.ckpt",
                     "--frames", "1", "--out", out}) == 2);
}

TEST_CASE("unreachable real embedder exits with code 3", "[cli]") {
    const std::string dir = tmp_dir("cli_capability");
    const std::string mesh = write_cube_obj(dir);
    const std::string config = write_small_config(dir);
    REQUIRE(run_cli({"select-anchor", "--mesh", mesh, "--config", config, "--prompt", "x",
                     "--embedder", "real", "--server", "http://127.0.0.1:1"}) == 3);
}

TEST_CASE("runtime failures exit with code 4", "[cli]") {
    const std::string dir = tmp_dir("cli_runtime");
    const std::string out = (fs::path(dir) / "o.obj").string();
    REQUIRE(run_cli({"subdivide", "--mesh", (fs::path(dir) / "missing.obj").string(),
                     "--out", out}) == 4);
}

TEST_CASE("subdivide writes the refined mesh", "[cli]") {
    const std::string dir = tmp_dir("cli_subdivide");
    const std::string mesh = write_cube_obj(dir);
    const std::string out = (fs::path(dir) / "refined.obj").string();

    CaptureStdout cap;
    const int rc = run_cli({"subdivide", "--mesh", mesh, "--levels", "2", "--out", out});
    const std::string stdout_text = cap.finish();
    REQUIRE(rc == 0);
    REQUIRE(stdout_text.find(out) != std::string::npos);

    // 8v/12f -> 20v/36f -> 56v/108f; input coordinates stay untouched.
    const Mesh refined = load_mesh(out);
    REQUIRE(refined.n_vertices() == 56);
    REQUIRE(refined.n_faces() == 108);
    REQUIRE(refined.vertices[0].x == -0.5);
}

TEST_CASE("morph interpolates two checkpoints", "[cli]") {
    const std::string dir = tmp_dir("cli_morph");
    const std::string mesh_path = write_cube_obj(dir);
    const Mesh prepared = cli_prepared_mesh(mesh_path);
    const std::uint64_t hash = mesh_hash(prepared);

    const StyleField fa = fresh_field(3);
    const StyleField fb = noisy_field(3, 0.4);
    const std::string ckpt_a = save_field_checkpoint(dir, "a.ckpt", fa, hash, 0, 1, 10);
    const std::string ckpt_b = save_field_checkpoint(dir, "b.ckpt", fb, hash, 0, 1, 10);
    const std::string out = (fs::path(dir) / "frames").string();

    CaptureStdout cap;
    const int rc = run_cli({"morph", "--mesh", mesh_path, "--ckpt-a", ckpt_a, "--ckpt-b",
                            ckpt_b, "--frames", "3", "--out", out});
    cap.finish();
    REQUIRE(rc == 0);
    REQUIRE(fs::exists(fs::path(out) / "morph_000.obj"));
    REQUIRE(fs::exists(fs::path(out) / "morph_001.obj"));
    REQUIRE(fs::exists(fs::path(out) / "morph_002.obj"));
    REQUIRE_FALSE(fs::exists(fs::path(out) / "morph_003.obj"));

    // Frame 0 is exactly checkpoint A's style applied to the mesh.
    const Mesh frame0 = load_mesh((fs::path(out) / "morph_000.obj").string());
    const Mesh expected = apply_style(prepared, fa.evaluate(prepared.vertices), true);
    REQUIRE(frame0.n_vertices() == expected.n_vertices());
    for (int i = 0; i < frame0.n_vertices(); ++i) {
        REQUIRE(frame0.vertices[static_cast<size_t>(i)].x ==
                expected.vertices[static_cast<size_t>(i)].x);
        REQUIRE(frame0.vertices[static_cast<size_t>(i)].y ==
                expected.vertices[static_cast<size_t>(i)].y);
        REQUIRE(frame0.vertices[static_cast<size_t>(i)].z ==
                expected.vertices[static_cast<size_t>(i)].z);
        REQUIRE(frame0.vertex_colors[static_cast<size_t>(i)].x ==
                expected.vertex_colors[static_cast<size_t>(i)].x);
    }

    // Checkpoints from a different mesh are rejected.
    const std::string alien_a = save_field_checkpoint(dir, "xa.ckpt", fa, 0xdeadbeefull, 0, 1, 1);
    const std::string alien_b = save_field_checkpoint(dir, "xb.ckpt", fb, 0xdeadbeefull, 0, 1, 1);
    REQUIRE(run_cli({"morph", "--mesh", mesh_path, "--ckpt-a", alien_a, "--ckpt-b", alien_b,
                     "--frames", "2", "--out", out}) == 4);
}

TEST_CASE("score prints the similarity", "[cli]") {
    const std::string dir = tmp_dir("cli_score");
    const std::string mesh_path = write_cube_obj(dir);
    const std::string config = write_small_config(dir);
    const Mesh prepared = cli_prepared_mesh(mesh_path);
    const std::string ckpt = save_field_checkpoint(dir, "s.ckpt", noisy_field(9, 0.3),
                                                   mesh_hash(prepared), 0, 1, 25);

    CaptureStdout cap;
    const int rc = run_cli({"score", "--mesh", mesh_path, "--config", config, "--ckpt", ckpt,
                            "--prompt", "antique brass"});
    const std::string stdout_text = cap.finish();
    REQUIRE(rc == 0);
    const double score = std::stod(stdout_text);
    REQUIRE(score >= -1.0);
    REQUIRE(score <= 1.0);
}

TEST_CASE("select-anchor emits the pose as JSON", "[cli]") {
    const std::string dir = tmp_dir("cli_anchor");
    const std::string mesh_path = write_cube_obj(dir);
    const std::string config = write_small_config(dir);
    const std::string out = (fs::path(dir) / "anchor_out").string();

    CaptureStdout cap;
    const int rc = run_cli({"select-anchor", "--mesh", mesh_path, "--config", config,
                            "--prompt", "marble", "--out", out});
    const std::string stdout_text = cap.finish();
    REQUIRE(rc == 0);

    const auto j = nlohmann::json::parse(stdout_text);
    REQUIRE(j.contains("azimuth"));
    REQUIRE(j.contains("elevation"));
    REQUIRE(j.contains("distance"));
    REQUIRE(j.contains("fov_y"));
    REQUIRE(j.contains("look_at"));
    REQUIRE(j["index"].get<int>() >= 0);
    REQUIRE(j["index"].get<int>() < 4);
    REQUIRE_FALSE(j.contains("scores"));

    std::ifstream table(fs::path(out) / "anchor.json");
    const auto full = nlohmann::json::parse(table);
    REQUIRE(full["scores"].size() == 4);
    REQUIRE(full["index"] == j["index"]);
}

TEST_CASE("export-snapshots renders a checkpoint", "[cli]") {
    const std::string dir = tmp_dir("cli_snaps");
    const std::string mesh_path = write_cube_obj(dir);
    const std::string config = write_small_config(dir);
    const Mesh prepared = cli_prepared_mesh(mesh_path);
    const std::string ckpt = save_field_checkpoint(dir, "f.ckpt", noisy_field(21, 0.3),
                                                   mesh_hash(prepared), 0, 2, 50);
    const std::string out = (fs::path(dir) / "snaps").string();

    CaptureStdout cap;
    const int rc = run_cli({"export-snapshots", "--mesh", mesh_path, "--config", config,
                            "--ckpt", ckpt, "--out", out, "--resolution", "48"});
    cap.finish();
    REQUIRE(rc == 0);
    REQUIRE(fs::exists(fs::path(out) / "snapshots" / "final_az+000.png"));
    REQUIRE(fs::exists(fs::path(out) / "snapshots" / "final_az+045.png"));
    REQUIRE(fs::exists(fs::path(out) / "snapshots" / "final_az-045.png"));
    REQUIRE(fs::exists(fs::path(out) / "snapshots" / "final_az+180.png"));
    REQUIRE(fs::exists(fs::path(out) / "final.ckpt"));

    // The exported checkpoint preserves the input checkpoint's stamps.
    const Checkpoint ck = load_checkpoint((fs::path(out) / "final.ckpt").string());
    REQUIRE(ck.mesh_hash == mesh_hash(prepared));
    REQUIRE(ck.run_seed == 2);
    REQUIRE(ck.iteration == 50);
}
