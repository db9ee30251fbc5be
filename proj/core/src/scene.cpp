// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include "svf/scene.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "svf/errors.hpp"
#include "svf/formats.hpp"

namespace svf {

using nlohmann::json;

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

class Fields {
public:
    Fields(const json& j, std::string context, const std::filesystem::path& file)
        : j_(j), context_(std::move(context)), file_(file) {}

    [[noreturn]] void fail(const std::string& field, const std::string& msg) const {
        throw DataError(file_.string() + ": " + context_ + (context_.empty() ? "" : ".") + field + ": " + msg);
    }
    bool has(const std::string& field) const { return j_.is_object() && j_.contains(field) && !j_[field].is_null(); }
    const json& at(const std::string& field) const {
        if (!has(field)) fail(field, "missing");
        return j_[field];
    }
    double number(const std::string& field) const {
        const json& v = at(field);
        if (!v.is_number()) fail(field, "not a number");
        return v.get<double>();
    }
    double number_or(const std::string& field, double fallback) const { return has(field) ? number(field) : fallback; }
    std::string string_or(const std::string& field, const std::string& fallback = {}) const {
        if (!has(field)) return fallback;
        if (!j_[field].is_string()) fail(field, "not a string");
        return j_[field].get<std::string>();
    }
    std::vector<double> numbers(const std::string& field, std::size_t n) const {
        const json& v = at(field);
        if (!v.is_array() || v.size() != n) fail(field, "expected " + std::to_string(n) + " numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) fail(field, "expected " + std::to_string(n) + " numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }
    Vec3 vec3(const std::string& field) const {
        const auto v = numbers(field, 3);
        return Vec3(v[0], v[1], v[2]);
    }
    Vec3 vec3_or(const std::string& field, const Vec3& fallback) const { return has(field) ? vec3(field) : fallback; }

private:
    const json& j_;
    std::string context_;
    const std::filesystem::path& file_;
};

const char* kind_name(PrimitiveKind k) {
    switch (k) {
        case PrimitiveKind::sphere: return "sphere";
        case PrimitiveKind::box: return "box";
        case PrimitiveKind::plane: return "plane";
    }
    return "";
}

}  // namespace

SceneManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open scene manifest " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    const Fields top(j, "", path);
    if (top.string_or("format") != "svf-scene") top.fail("format", "expected \"svf-scene\"");
    if (top.number("version") != 1) top.fail("version", "unsupported");

    SceneManifest m;
    m.root = path.parent_path();
    const Fields bounds(top.at("bounds"), "bounds", path);
    m.bounds = {bounds.vec3("min"), bounds.vec3("max")};
    const double level = top.number_or("level", 7);
    if (level < 0 || level > kMaxTsdfLevel || level != std::floor(level)) top.fail("level", "out of range");
    m.level = static_cast<std::uint32_t>(level);

    const json& views = top.at("views");
    if (!views.is_array()) top.fail("views", "not an array");
    for (std::size_t k = 0; k < views.size(); ++k) {
        const std::string ctx = "views[" + std::to_string(k) + "]";
        const Fields v(views[k], ctx, path);
        ViewRecord rec;
        rec.name = v.string_or("name", "view_" + std::to_string(k));
        const Fields intr(v.at("intrinsics"), ctx + ".intrinsics", path);
        rec.camera.fx = intr.number("fx");
        rec.camera.fy = intr.number("fy");
        rec.camera.cx = intr.number("cx");
        rec.camera.cy = intr.number("cy");
        rec.camera.width = static_cast<int>(intr.number("width"));
        rec.camera.height = static_cast<int>(intr.number("height"));
        const auto pose = v.numbers("pose", 16);
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) rec.camera.rotation(r, c) = pose[r * 4 + c];
            rec.camera.translation[r] = pose[r * 4 + 3];
        }
        if (pose[12] != 0 || pose[13] != 0 || pose[14] != 0 || pose[15] != 1) v.fail("pose", "last row must be 0 0 0 1");
        try {
            rec.camera.validate();
        } catch (const DataError& e) {
            v.fail("pose", e.what());
        }
        rec.depth = v.string_or("depth");
        rec.feature = v.string_or("feature");
        rec.crops = v.string_or("crops");
        rec.normal = v.string_or("normal");
        if (rec.depth.empty()) v.fail("depth", "missing");
        m.views.push_back(std::move(rec));
    }
    m.embeddings = top.string_or("embeddings");
    if (top.has("ground_truth")) {
        const Fields gt(top.at("ground_truth"), "ground_truth", path);
        m.gt_voxel_labels = gt.string_or("voxel_labels");
        m.gt_points = gt.string_or("points");
    }
    if (top.has("classes")) {
        for (const auto& c : top.at("classes")) {
            if (!c.is_string()) top.fail("classes", "expected strings");
            m.classes.push_back(c.get<std::string>());
        }
    }
    if (top.has("primitives")) {
        const json& prims = top.at("primitives");
        for (std::size_t i = 0; i < prims.size(); ++i) {
            const Fields p(prims[i], "primitives[" + std::to_string(i) + "]", path);
            Primitive prim;
            const std::string kind = p.string_or("kind");
            if (kind == "sphere") prim.kind = PrimitiveKind::sphere;
            else if (kind == "box") prim.kind = PrimitiveKind::box;
            else if (kind == "plane") prim.kind = PrimitiveKind::plane;
            else p.fail("kind", "expected sphere, box or plane");
            prim.center = p.vec3("center");
            prim.half_extent = p.vec3_or("half_extent", Vec3::Ones());
            prim.yaw = p.number_or("yaw", 0.0);
            prim.normal = p.vec3_or("normal", Vec3::UnitZ());
            prim.class_id = static_cast<int>(p.number_or("class", 0));
            m.primitives.push_back(prim);
        }
    }
    return m;
}

void save_manifest(const std::filesystem::path& path, const SceneManifest& m) {
    json j;
    j["format"] = "svf-scene";
    j["version"] = 1;
    j["bounds"] = {{"min", vec_json(m.bounds.min)}, {"max", vec_json(m.bounds.max)}};
    j["level"] = m.level;
    j["views"] = json::array();
    for (const ViewRecord& v : m.views) {
        json jv;
        jv["name"] = v.name;
        const Camera& c = v.camera;
        jv["intrinsics"] = {{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy}, {"width", c.width}, {"height", c.height}};
        json pose = json::array();
        for (int r = 0; r < 3; ++r) {
            for (int k = 0; k < 3; ++k) pose.push_back(c.rotation(r, k));
            pose.push_back(c.translation[r]);
        }
        for (double x : {0.0, 0.0, 0.0, 1.0}) pose.push_back(x);
        jv["pose"] = pose;
        jv["depth"] = v.depth;
        if (!v.feature.empty()) jv["feature"] = v.feature;
        if (!v.crops.empty()) jv["crops"] = v.crops;
        if (!v.normal.empty()) jv["normal"] = v.normal;
        j["views"].push_back(jv);
    }
    if (!m.embeddings.empty()) j["embeddings"] = m.embeddings;
    if (!m.gt_voxel_labels.empty() || !m.gt_points.empty()) {
        j["ground_truth"] = json::object();
        if (!m.gt_voxel_labels.empty()) j["ground_truth"]["voxel_labels"] = m.gt_voxel_labels;
        if (!m.gt_points.empty()) j["ground_truth"]["points"] = m.gt_points;
    }
    if (!m.classes.empty()) j["classes"] = m.classes;
    if (!m.primitives.empty()) {
        j["primitives"] = json::array();
        for (const Primitive& p : m.primitives) {
            j["primitives"].push_back({{"kind", kind_name(p.kind)},
                                       {"center", vec_json(p.center)},
                                       {"half_extent", vec_json(p.half_extent)},
                                       {"yaw", p.yaw},
                                       {"normal", vec_json(p.normal)},
                                       {"class", p.class_id}});
        }
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

std::vector<Camera> SceneData::cameras() const {
    std::vector<Camera> out;
    for (const auto& v : manifest.views) out.push_back(v.camera);
    return out;
}

SceneData load_scene(const std::filesystem::path& manifest_path, const LoadOptions& options) {
    SceneData data;
    data.manifest = load_manifest(manifest_path);
    const SceneManifest& m = data.manifest;
    bool all_normals = !m.views.empty();
    for (const auto& v : m.views) all_normals = all_normals && !v.normal.empty();
    for (std::size_t k = 0; k < m.views.size(); ++k) {
        const ViewRecord& v = m.views[k];
        const auto check_shape = [&](const ImagePlane& img, int channels, const char* what) {
            if (img.width() != v.camera.width || img.height() != v.camera.height) {
                throw DataError("view '" + v.name + "': " + what + " size does not match the camera");
            }
            if (channels > 0 && img.channels() != channels) {
                throw DataError("view '" + v.name + "': " + what + " must have " + std::to_string(channels) + " channel(s)");
            }
        };
        if (options.depths) {
            data.depths.push_back(load_image(m.resolve(v.depth)));
            check_shape(data.depths.back(), 1, "depth");
        }
        if (all_normals && options.depths) {
            data.normals.push_back(load_image(m.resolve(v.normal)));
            check_shape(data.normals.back(), 3, "normal");
        }
        if (options.features) {
            if (v.feature.empty()) {
                throw DataError("view '" + v.name + "': no feature map" + (v.crops.empty() ? "" : " (run stitch first)"));
            }
            data.features.push_back(load_image(m.resolve(v.feature)));
            check_shape(data.features.back(), 0, "feature");
            if (data.features.back().channels() != data.features.front().channels()) {
                throw DataError("feature dimension mismatch: view '" + m.views.front().name + "' has " +
                                std::to_string(data.features.front().channels()) + ", view '" + v.name + "' has " +
                                std::to_string(data.features.back().channels()));
            }
        }
    }
    if (options.embeddings) {
        if (m.embeddings.empty()) throw DataError(manifest_path.string() + ": embeddings: missing");
        data.embeddings = load_embedding_manifest(m.resolve(m.embeddings));
        if (!data.features.empty() && data.embeddings.front().vector.size() != std::size_t(data.features.front().channels())) {
            throw DataError("embedding dimension does not match the feature dimension");
        }
    }
    return data;
}

std::vector<VoxelLabel> load_voxel_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<VoxelLabel> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        VoxelLabel v;
        if (!(ss >> v.key.level >> v.key.code >> v.label)) {
            throw DataError(path.string() + ":" + std::to_string(number) + ": expected 'level code label'");
        }
        try {
            validate_key(v.key);
        } catch (const DomainError& e) {
            throw DataError(path.string() + ":" + std::to_string(number) + ": " + e.what());
        }
        out.push_back(v);
    }
    return out;
}

void save_voxel_labels(const std::filesystem::path& path, const std::vector<VoxelLabel>& labels) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << "# level code label\n";
    for (const auto& v : labels) out << v.key.level << ' ' << v.key.code << ' ' << v.label << '\n';
}

void save_synth_scene(const std::filesystem::path& dir, const SynthScene& scene) {
    SceneManifest m;
    m.root = dir;
    m.bounds = scene.spec.bounds;
    m.level = scene.spec.level;
    m.classes = scene.spec.class_names;
    m.primitives = scene.spec.primitives;
    char name[32];
    for (std::size_t k = 0; k < scene.views.size(); ++k) {
        const SynthView& view = scene.views[k];
        std::snprintf(name, sizeof(name), "view_%03zu", k);
        ViewRecord rec;
        rec.name = name;
        rec.camera = view.camera;
        rec.depth = std::string("views/") + name + ".depth.limg";
        rec.normal = std::string("views/") + name + ".normal.limg";
        save_image(dir / rec.depth, view.depth);
        save_image(dir / rec.normal, view.normal);
        if (!view.crops.empty()) {
            rec.crops = std::string("views/") + name + ".crops.txt";
            std::ofstream out(dir / rec.crops);
            out << "# anchor_x anchor_y width height path\n";
            for (std::size_t c = 0; c < view.crops.size(); ++c) {
                const CropFeature& crop = view.crops[c];
                const std::string file = std::string(name) + ".crop" + std::to_string(c) + ".limg";
                save_image(dir / "views" / file, crop.feature);
                out << crop.anchor_x << ' ' << crop.anchor_y << ' ' << crop.feature.width() << ' '
                    << crop.feature.height() << ' ' << file << '\n';
            }
            if (!out) throw DataError("write failed: " + (dir / rec.crops).string());
        } else {
            rec.feature = std::string("views/") + name + ".feature.limg";
            save_image(dir / rec.feature, view.feature);
        }
        m.views.push_back(std::move(rec));
    }
    m.embeddings = "embeddings/classes.txt";
    save_embedding_manifest(dir / m.embeddings, scene.classes);
    m.gt_voxel_labels = "gt/voxel_labels.txt";
    save_voxel_labels(dir / m.gt_voxel_labels, scene.voxel_labels);
    m.gt_points = "gt/points.ply";
    write_ply(dir / m.gt_points, scene.surface_points);
    save_manifest(dir / "scene.json", m);
}

}  // namespace svf
