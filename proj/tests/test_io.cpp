// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "svf/config.hpp"
#include "svf/errors.hpp"
#include "svf/formats.hpp"
#include "svf/morton.hpp"
#include "svf/ply.hpp"
#include "svf/scene.hpp"
#include "svf/synth.hpp"
#include "svf/tsdf.hpp"

namespace fs = std::filesystem;

namespace svf {
namespace {

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        std::random_device rd;
        dir_ = fs::temp_directory_path() / ("svf_io_" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path dir_;
};

std::string bytes_of(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

SparseVoxelGrid random_grid(std::uint64_t seed, int sh_degree, int dim) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(-3, 3);
    std::uniform_int_distribution<std::uint32_t> cell(0, 15);
    SparseVoxelGrid g(Aabb{Vec3(-2, -1, 0), Vec3(2, 3, 4)}, sh_degree);
    std::set<std::uint64_t> used;
    while (g.size() < 150) {
        const VoxelKey k = morton_encode(cell(rng), cell(rng), cell(rng), 4);
        if (!used.insert(k.code).second) continue;
        CornerDensities d;
        for (float& v : d) v = std::abs(u(rng));
        std::vector<float> sh(g.sh_stride());
        for (float& v : sh) v = u(rng);
        g.insert(k, d, sh);
    }
    // A coarser voxel in an untouched corner keeps the set mixed-level.
    if (!g.would_conflict(morton_encode(1, 1, 1, 1))) g.insert(morton_encode(1, 1, 1, 1), CornerDensities{});
    if (dim > 0) {
        g.allocate_features(dim);
        for (std::size_t i = 0; i < g.size(); ++i) {
            for (float& v : g.feature(i)) v = u(rng);
            g.set_weight_sum(i, i % 5 == 0 ? 0.0f : std::abs(u(rng)));
        }
    }
    g.sort_by_key();
    return g;
}

TEST_F(TempDir, GridRoundTripIsBitExact) {
    for (int deg : {0, 2}) {
        for (int dim : {0, 7}) {
            const SparseVoxelGrid g = random_grid(deg * 10 + dim, deg, dim);
            const fs::path p = dir_ / "g.lesv";
            save_grid(p, g);
            const SparseVoxelGrid r = load_grid(p);
            ASSERT_EQ(r.size(), g.size());
            EXPECT_EQ(r.sh_degree(), deg);
            EXPECT_EQ(r.feature_dim(), std::size_t(dim));
            EXPECT_EQ(r.bounds().min, g.bounds().min);
            EXPECT_EQ(r.bounds().max, g.bounds().max);
            for (std::size_t i = 0; i < g.size(); ++i) {
                EXPECT_EQ(r.key(i), g.key(i));
                EXPECT_EQ(r.density(i), g.density(i));
                EXPECT_TRUE(std::equal(r.sh(i).begin(), r.sh(i).end(), g.sh(i).begin()));
                if (dim > 0) {
                    EXPECT_EQ(r.weight_sum(i), g.weight_sum(i));
                    EXPECT_TRUE(std::equal(r.feature(i).begin(), r.feature(i).end(), g.feature(i).begin()));
                }
            }
            save_grid(dir_ / "g2.lesv", r);
            EXPECT_EQ(bytes_of(p), bytes_of(dir_ / "g2.lesv"));
        }
    }
}

TEST_F(TempDir, ImageRoundTripKeepsValidity) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<float> u(-1, 1);
    ImagePlane img(13, 7, 3);
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 13; ++x)
            if ((x * y + x) % 4 != 1) img.set(x, y, std::vector<float>{u(rng), u(rng), -0.0f});
    save_image(dir_ / "i.limg", img);
    const ImagePlane r = load_image(dir_ / "i.limg");
    EXPECT_EQ(r, img);
    EXPECT_EQ(r.valid_count(), img.valid_count());
    save_image(dir_ / "j.limg", r);
    EXPECT_EQ(bytes_of(dir_ / "i.limg"), bytes_of(dir_ / "j.limg"));
    // 91 pixels: validity bitmap of 12 bytes after a 24-byte header.
    EXPECT_EQ(bytes_of(dir_ / "i.limg").size(), 24u + 13 * 7 * 3 * 4 + 12);
}

TEST_F(TempDir, TsdfRoundTrip) {
    TsdfField f(Aabb{Vec3(0, 0, 0), Vec3(2, 2, 2)}, 5, 0.25);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> c(0, 32);
    std::uniform_real_distribution<float> u(-0.25f, 0.25f);
    for (int i = 0; i < 500; ++i) f.set({c(rng), c(rng), c(rng)}, {u(rng), 1.0f + std::abs(u(rng))});
    save_tsdf(dir_ / "t.ltsd", f);
    const TsdfField r = load_tsdf(dir_ / "t.ltsd");
    EXPECT_TRUE(r == f);
    EXPECT_EQ(r.trunc(), 0.25);
    save_tsdf(dir_ / "u.ltsd", r);
    EXPECT_EQ(bytes_of(dir_ / "t.ltsd"), bytes_of(dir_ / "u.ltsd"));
}

TEST_F(TempDir, EmbeddingsAndManifest) {
    const std::vector<float> v = {1.5f, -0.0f, 3e-30f, -7.25f};
    save_embedding(dir_ / "e.emb", v);
    EXPECT_EQ(load_embedding(dir_ / "e.emb"), v);
    EXPECT_EQ(bytes_of(dir_ / "e.emb").size(), 4u + 16u);

    const std::vector<QueryEmbedding> es = {{"red ball", {1, 0, 0}}, {"crate", {0, 0.5f, 2}}};
    fs::create_directories(dir_ / "emb");
    save_embedding_manifest(dir_ / "emb" / "classes.txt", es);
    const auto r = load_embedding_manifest(dir_ / "emb" / "classes.txt");
    ASSERT_EQ(r.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(r[i].label, es[i].label);
        EXPECT_EQ(r[i].vector, es[i].vector);
    }
}

TEST_F(TempDir, CropManifest) {
    ImagePlane a(4, 3, 2), b(4, 3, 2);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 4; ++x) {
            a.set(x, y, std::vector<float>{1, 2});
            b.set(x, y, std::vector<float>{3, 4});
        }
    save_image(dir_ / "a.limg", a);
    save_image(dir_ / "b.limg", b);
    {
        std::ofstream m(dir_ / "crops.txt");
        m << "# anchor_x anchor_y width height path\n0 0 4 3 a.limg\n2 1 4 3 b.limg\n";
    }
    const auto crops = load_crop_manifest(dir_ / "crops.txt");
    ASSERT_EQ(crops.size(), 2u);
    EXPECT_EQ(crops[1].anchor_x, 2);
    EXPECT_EQ(crops[1].anchor_y, 1);
    EXPECT_EQ(crops[1].feature, b);
    {
        std::ofstream m(dir_ / "bad.txt");
        m << "0 0 4 3 a.limg\n0 0 5 3 b.limg\n";
    }
    try {
        load_crop_manifest(dir_ / "bad.txt");
        FAIL() << "size mismatch accepted";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
    }
}

TEST_F(TempDir, CorruptFilesAreDataErrors) {
    {
        std::ofstream o(dir_ / "junk.lesv", std::ios::binary);
        o << "NOPE0000";
    }
    EXPECT_THROW(load_grid(dir_ / "junk.lesv"), DataError);
    EXPECT_THROW(load_image(dir_ / "junk.lesv"), DataError);
    EXPECT_THROW(load_grid(dir_ / "missing.lesv"), DataError);
    save_grid(dir_ / "g.lesv", random_grid(1, 0, 3));
    const std::string full = bytes_of(dir_ / "g.lesv");
    {
        std::ofstream o(dir_ / "cut.lesv", std::ios::binary);
        o << full.substr(0, full.size() - 5);
    }
    EXPECT_THROW(load_grid(dir_ / "cut.lesv"), DataError);
}

TEST_F(TempDir, PlyRoundTrip) {
    TriangleMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    m.triangles = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
    m.normals = {{0, 0, -1}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (bool binary : {true, false}) {
        write_ply(dir_ / "m.ply", m, binary);
        const PlyData r = read_ply(dir_ / "m.ply");
        EXPECT_EQ(r.mesh.vertices, m.vertices);
        EXPECT_EQ(r.mesh.triangles, m.triangles);
        EXPECT_EQ(r.mesh.normals, m.normals);
    }
    PointCloud pc{{{0.25, -1.5, 3}, {1e-3, 2, -4}}, {3, 0}};
    for (bool binary : {true, false}) {
        write_ply(dir_ / "p.ply", pc, binary);
        const PlyData r = read_ply(dir_ / "p.ply");
        ASSERT_EQ(r.mesh.vertices.size(), 2u);
        for (int i = 0; i < 2; ++i) EXPECT_EQ(r.mesh.vertices[i], pc.points[i].cast<float>().cast<double>());
        EXPECT_EQ(r.labels, pc.labels);
    }
    write_ply(dir_ / "e.ply", TriangleMesh{}, true);
    EXPECT_TRUE(read_ply(dir_ / "e.ply").mesh.vertices.empty());
    {
        std::ofstream o(dir_ / "quad.ply");
        o << "ply\nformat ascii 1.0\nelement vertex 4\nproperty float x\nproperty float y\nproperty float z\n"
             "element face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
    }
    EXPECT_EQ(read_ply(dir_ / "quad.ply").mesh.triangles.size(), 2u);
}

TEST_F(TempDir, ConfigParsing) {
    {
        std::ofstream o(dir_ / "c.cfg");
        o << "# comment\nfuse.batch_size = 512\n\nquery.threshold=0.65\nstitch.enabled = true\nname = five objects\n";
    }
    Config c = Config::load(dir_ / "c.cfg");
    EXPECT_EQ(c.get_int("fuse.batch_size", 0), 512);
    EXPECT_DOUBLE_EQ(c.get("query.threshold", 0.0), 0.65);
    EXPECT_TRUE(c.get_bool("stitch.enabled", false));
    EXPECT_EQ(c.get_string("name", ""), "five objects");
    EXPECT_DOUBLE_EQ(c.get("absent", 2.5), 2.5);
    c.assign("query.threshold=0.7");
    EXPECT_DOUBLE_EQ(c.get("query.threshold", 0.0), 0.7);
    EXPECT_THROW(c.assign("no_equals"), DataError);
    c.set("bad", "1.5x");
    try {
        c.get("bad", 0.0);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("bad"), std::string::npos);
    }
    EXPECT_THROW(c.get_int("query.threshold", 0), DataError);
    EXPECT_THROW(Config::load(dir_ / "none.cfg"), DataError);
}

SynthSceneSpec tiny_spec() {
    SynthSceneSpec s = five_object_spec();
    s.orbit.views = 3;
    s.width = 40;
    s.height = 30;
    s.orbit.fx = 35;
    s.level = 5;
    s.surface_points = 200;
    return s;
}

TEST(Synth, DeterministicUnderSeed) {
    const SynthScene a = synth_scene(tiny_spec(), 7), b = synth_scene(tiny_spec(), 7), c = synth_scene(tiny_spec(), 8);
    ASSERT_EQ(a.views.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_EQ(a.views[k].depth, b.views[k].depth);
        EXPECT_EQ(a.views[k].feature, b.views[k].feature);
        EXPECT_EQ(a.views[k].normal, b.views[k].normal);
    }
    EXPECT_FALSE(a.views[0].feature == c.views[0].feature);
    EXPECT_EQ(a.surface_points.points, b.surface_points.points);
    ASSERT_EQ(a.voxel_labels.size(), b.voxel_labels.size());
    for (std::size_t i = 0; i < a.classes.size(); ++i) EXPECT_EQ(a.classes[i].vector, b.classes[i].vector);
}

TEST(Synth, PrototypesAreOrthonormal) {
    const auto p = orthonormal_prototypes(5, 16, 3);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            double d = 0;
            for (std::size_t c = 0; c < 16; ++c) d += double(p[i][c]) * p[j][c];
            EXPECT_NEAR(d, i == j ? 1.0 : 0.0, 1e-6);
        }
}

TEST(Synth, SphereCentrePixelDepth) {
    Primitive s;
    s.kind = PrimitiveKind::sphere;
    s.center = Vec3(0.2, -0.1, 0.3);
    s.half_extent = Vec3::Constant(0.7);
    const AnalyticScene scene(Aabb{Vec3(-2, -2, -2), Vec3(2, 2, 2)}, {s});
    const double d = 3.1;
    Camera cam = Camera::look_at(s.center + Vec3(0.6, -0.8, 0.0).normalized() * d, s.center, Vec3::UnitZ(), 50, 50,
                                 33, 33);
    cam.cx = cam.cy = 16.5;
    const DepthMap depth = scene.depth_map(cam);
    EXPECT_NEAR(depth.scalar(16, 16), d - 0.7, 1e-6);
    const NormalMap n = scene.normal_map(cam);
    EXPECT_NEAR(n.at(16, 16)[0], 0.6, 1e-6);
    EXPECT_NEAR(n.at(16, 16)[1], -0.8, 1e-6);
    EXPECT_FALSE(depth.valid(0, 0));

    const AnalyticScene empty(Aabb{Vec3(-2, -2, -2), Vec3(2, 2, 2)}, {});
    EXPECT_EQ(empty.depth_map(cam).valid_count(), 0u);
}

TEST(Synth, SurfacePointsLieOnSurface) {
    const SynthSceneSpec spec = tiny_spec();
    const AnalyticScene scene(spec.bounds, spec.primitives);
    const PointCloud pc = sample_surface_points(scene, 500, 4);
    ASSERT_EQ(pc.points.size(), 500u);
    std::set<int> classes;
    for (std::size_t i = 0; i < pc.points.size(); ++i) {
        EXPECT_NEAR(scene.sdf(pc.points[i]), 0.0, 1e-9);
        classes.insert(pc.labels[i]);
    }
    EXPECT_EQ(classes.size(), 5u);
}

TEST_F(TempDir, SceneRoundTrip) {
    const SynthScene s = synth_scene(tiny_spec(), 1);
    save_synth_scene(dir_, s);
    const SceneData d = load_scene(dir_ / "scene.json", LoadOptions{true, true, true});
    ASSERT_EQ(d.depths.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_EQ(d.depths[k], s.views[k].depth);
        EXPECT_EQ(d.features[k], s.views[k].feature);
        const Camera a = d.cameras()[k];
        const Camera& b = s.views[k].camera;
        EXPECT_EQ(a.fx, b.fx);
        EXPECT_EQ(a.cx, b.cx);
        EXPECT_EQ(a.rotation, b.rotation);
        EXPECT_EQ(a.translation, b.translation);
    }
    ASSERT_EQ(d.embeddings.size(), 5u);
    EXPECT_EQ(d.embeddings[2].vector, s.classes[2].vector);
    EXPECT_EQ(d.manifest.classes, s.spec.class_names);
    EXPECT_EQ(d.manifest.primitives.size(), s.spec.primitives.size());
    const auto labels = load_voxel_labels(d.manifest.resolve(d.manifest.gt_voxel_labels));
    ASSERT_EQ(labels.size(), s.voxel_labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        EXPECT_EQ(labels[i].key, s.voxel_labels[i].key);
        EXPECT_EQ(labels[i].label, s.voxel_labels[i].label);
    }
}

nlohmann::json read_json(const fs::path& p) {
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

void write_json(const fs::path& p, const nlohmann::json& j) {
    std::ofstream out(p);
    out << j.dump(1);
}

std::string load_error(const fs::path& p, const LoadOptions& o = {}) {
    try {
        load_scene(p, o);
    } catch (const DataError& e) {
        return e.what();
    }
    return "";
}

TEST_F(TempDir, SceneValidationErrors) {
    save_synth_scene(dir_, synth_scene(tiny_spec(), 1));
    const fs::path m = dir_ / "scene.json";
    const nlohmann::json good = read_json(m);

    // Reflection: det(R) = -1.
    nlohmann::json j = good;
    for (int c = 0; c < 3; ++c) j["views"][1]["pose"][c * 4 + 0] = -j["views"][1]["pose"][c * 4 + 0].get<double>();
    write_json(m, j);
    std::string err = load_error(m);
    EXPECT_NE(err.find("pose"), std::string::npos) << err;
    EXPECT_NE(err.find("views"), std::string::npos) << err;

    // Feature dimension mismatch names both views.
    j = good;
    ImagePlane narrow(40, 30, 3);
    for (int y = 0; y < 30; ++y)
        for (int x = 0; x < 40; ++x) narrow.set(x, y, std::vector<float>{1, 2, 3});
    save_image(dir_ / "narrow.limg", narrow);
    j["views"][2]["feature"] = "narrow.limg";
    write_json(m, j);
    err = load_error(m, LoadOptions{true, true, false});
    const std::string v0 = good["views"][0]["name"], v2 = good["views"][2]["name"];
    EXPECT_NE(err.find(v0), std::string::npos) << err;
    EXPECT_NE(err.find(v2), std::string::npos) << err;

    // Missing file and missing field.
    j = good;
    j["views"][0]["depth"] = "nowhere.limg";
    write_json(m, j);
    EXPECT_NE(load_error(m).find("nowhere.limg"), std::string::npos);
    j = good;
    j["views"][0].erase("intrinsics");
    write_json(m, j);
    EXPECT_NE(load_error(m).find("intrinsics"), std::string::npos);
    j = good;
    j["format"] = "other";
    write_json(m, j);
    EXPECT_FALSE(load_error(m).empty());
}

TEST_F(TempDir, MinimalOneViewScene) {
    SceneManifest man;
    man.bounds = Aabb{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
    man.level = 4;
    ViewRecord v;
    v.name = "only";
    v.camera = Camera::look_at(Vec3(0, 0, -3), Vec3::Zero(), Vec3::UnitY(), 10, 10, 6, 4);
    v.depth = "d.limg";
    man.views.push_back(v);
    DepthMap d(6, 4, 1);
    d.set(2, 2, 2.5f);
    save_image(dir_ / "d.limg", d);
    save_manifest(dir_ / "scene.json", man);
    const SceneData r = load_scene(dir_ / "scene.json");
    ASSERT_EQ(r.depths.size(), 1u);
    EXPECT_EQ(r.depths[0], d);
    EXPECT_EQ(r.manifest.views[0].name, "only");
    EXPECT_EQ(r.manifest.level, 4u);
    EXPECT_TRUE(r.cameras()[0].rotation.isApprox(v.camera.rotation, 0.0));
}

}  // namespace
}  // namespace svf
