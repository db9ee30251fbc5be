// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>

#include "png.hpp"
#include "svf/config.hpp"
#include "svf/errors.hpp"
#include "svf/feat2d.hpp"
#include "svf/formats.hpp"
#include "svf/fuse3d.hpp"
#include "svf/geomreg.hpp"
#include "svf/parallel.hpp"
#include "svf/pipeline.hpp"
#include "svf/ply.hpp"
#include "svf/query.hpp"
#include "svf/render.hpp"
#include "svf/scene.hpp"
#include "svf/synth.hpp"

namespace svf::cli {

namespace fs = std::filesystem;

namespace {

// Every key the configuration file may set.
const std::set<std::string> kKnownKeys = {
    "synth.preset",        "synth.noise",          "synth.views",        "synth.width",
    "synth.height",        "synth.level",          "synth.points",       "synth.crop_size",
    "synth.feature_dim",   "build.level",          "build.coarse_levels", "build.trunc_voxels",
    "build.density_scale", "build.density_width",  "build.sh_degree",    "blend.tau_q",
    "blend.temperature",   "render.alpha_valid_min", "render.samples_per_interval",
    "fuse.beta_voxels",    "fuse.sigma_c_voxels",  "fuse.margin_voxels", "fuse.eps",
    "fuse.batch_size",     "stitch.sigma",         "stitch.attention",   "attention.cos_threshold",
    "attention.iterations", "attention.token_stride", "query.threshold", "transfer.k",
    "patch.size",          "patch.stride",         "patch.eps_std",      "eval.loc_view",
};

struct Paths {
    fs::path dir;
    fs::path manifest() const { return dir / "scene.json"; }
    fs::path grid() const { return dir / "grid.lesv"; }
    fs::path tsdf() const { return dir / "tsdf.ltsd"; }
    fs::path mesh() const { return dir / "mesh.ply"; }
    fs::path fused() const { return dir / "fused.lesv"; }
};

class Clock {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

BuildConfig build_config(const Config& cfg, std::uint32_t default_level) {
    BuildConfig b;
    b.level = static_cast<std::uint32_t>(cfg.get_int("build.level", default_level));
    b.coarse_levels = static_cast<std::uint32_t>(cfg.get_int("build.coarse_levels", b.coarse_levels));
    b.trunc_voxels = cfg.get("build.trunc_voxels", b.trunc_voxels);
    b.density_scale = cfg.get("build.density_scale", b.density_scale);
    b.density_width = cfg.get("build.density_width", b.density_width);
    b.sh_degree = static_cast<int>(cfg.get_int("build.sh_degree", b.sh_degree));
    b.blend.tau_q = cfg.get("blend.tau_q", b.blend.tau_q);
    b.blend.temperature = cfg.get("blend.temperature", b.blend.temperature);
    b.validate();
    return b;
}

RenderOptions render_options(const Config& cfg) {
    RenderOptions r;
    r.alpha_valid_min = cfg.get("render.alpha_valid_min", r.alpha_valid_min);
    r.samples_per_interval = static_cast<int>(cfg.get_int("render.samples_per_interval", r.samples_per_interval));
    return r;
}

FusionConfig fusion_config(const Config& cfg, double edge) {
    FusionConfig f = FusionConfig::for_voxel_edge(edge);
    f.beta = cfg.get("fuse.beta_voxels", f.beta / edge) * edge;
    f.sigma_c = cfg.get("fuse.sigma_c_voxels", f.sigma_c / edge) * edge;
    f.occlusion_margin = cfg.get("fuse.margin_voxels", f.occlusion_margin / edge) * edge;
    f.eps = cfg.get("fuse.eps", f.eps);
    const long long batch = cfg.get_int("fuse.batch_size", static_cast<long long>(f.batch_size));
    if (batch < 1) throw DomainError("fuse.batch_size must be >= 1");
    f.batch_size = static_cast<std::size_t>(batch);
    f.validate();
    return f;
}

AttentionConfig attention_config(const Config& cfg) {
    AttentionConfig a;
    a.cos_threshold = cfg.get("attention.cos_threshold", a.cos_threshold);
    a.iterations = static_cast<int>(cfg.get_int("attention.iterations", a.iterations));
    a.token_stride = static_cast<int>(cfg.get_int("attention.token_stride", a.token_stride));
    a.validate();
    return a;
}

PatchSpec patch_spec(const Config& cfg) {
    PatchSpec p;
    p.size = static_cast<int>(cfg.get_int("patch.size", p.size));
    p.stride = static_cast<int>(cfg.get_int("patch.stride", p.stride));
    p.eps_std = cfg.get("patch.eps_std", p.eps_std);
    p.validate();
    return p;
}

double query_threshold(const Config& cfg) {
    const double t = cfg.get("query.threshold", 0.6);
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("query.threshold must be in [0, 1]");
    return t;
}

std::string sanitize(const std::string& label) {
    std::string s = label;
    for (char& c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
    }
    return s;
}

// Grid plus the mesh that serves as its depth reference.
TriangleMesh load_or_extract_mesh(const Paths& paths, std::ostream& err) {
    if (fs::exists(paths.mesh())) return read_ply(paths.mesh()).mesh;
    err << "mesh.ply not found; extracting from " << paths.tsdf().filename().string() << "\n";
    return extract_mesh(load_tsdf(paths.tsdf()));
}

int cmd_synth(const Config& cfg, const std::string& out_dir, const std::string& preset, std::uint64_t seed,
              std::ostream& out, std::ostream& err) {
    SynthSceneSpec spec;
    if (preset == "five_objects") spec = five_object_spec();
    else if (preset == "sphere") spec = sphere_spec();
    else throw DataError("unknown synth preset '" + preset + "' (five_objects, sphere)");
    spec.noise_sigma = cfg.get("synth.noise", spec.noise_sigma);
    spec.orbit.views = static_cast<int>(cfg.get_int("synth.views", spec.orbit.views));
    spec.width = static_cast<int>(cfg.get_int("synth.width", spec.width));
    spec.height = static_cast<int>(cfg.get_int("synth.height", spec.height));
    spec.level = static_cast<std::uint32_t>(cfg.get_int("synth.level", spec.level));
    spec.surface_points = static_cast<std::size_t>(cfg.get_int("synth.points", static_cast<long long>(spec.surface_points)));
    spec.crop_size = static_cast<int>(cfg.get_int("synth.crop_size", spec.crop_size));
    spec.feature_dim = static_cast<int>(cfg.get_int("synth.feature_dim", spec.feature_dim));
    spec.trunc_voxels = cfg.get("build.trunc_voxels", spec.trunc_voxels);
    const Clock clock;
    const SynthScene scene = synth_scene(spec, seed);
    save_synth_scene(out_dir, scene);
    out << "synth: " << scene.views.size() << " views, " << scene.classes.size() << " classes, "
        << scene.voxel_labels.size() << " labelled voxels, " << scene.surface_points.points.size()
        << " surface points -> " << (fs::path(out_dir) / "scene.json").string() << "\n";
    err << "synth: " << std::fixed << std::setprecision(2) << clock.seconds() << " s\n";
    return kOk;
}

int cmd_build(const Config& cfg, const Paths& paths, std::ostream& out, std::ostream& err) {
    const Clock clock;
    const SceneData scene = load_scene(paths.manifest(), {.depths = true});
    const BuildConfig b = build_config(cfg, scene.manifest.level);
    const auto cameras = scene.cameras();
    const TsdfField field = build_tsdf(scene.manifest.bounds, cameras, scene.depths, b);
    const SparseVoxelGrid grid = voxelize(field, b);
    save_tsdf(paths.tsdf(), field);
    save_grid(paths.grid(), grid);
    out << "build: level " << b.level << ", " << field.observed_count() << " observed corners, " << grid.size()
        << " voxels -> " << paths.grid().string() << "\n";
    err << "build: " << std::fixed << std::setprecision(2) << clock.seconds() << " s\n";
    return kOk;
}

int cmd_mesh(const Paths& paths, const std::string& tsdf_path, const std::string& out_path, bool ascii,
             std::ostream& out, std::ostream& err) {
    const TsdfField field = load_tsdf(tsdf_path.empty() ? paths.tsdf() : fs::path(tsdf_path));
    TriangleMesh mesh = extract_mesh(field);
    if (mesh.empty()) err << "warning: the TSDF has no zero crossing; writing an empty mesh\n";
    mesh.normals = compute_vertex_normals(mesh);
    const fs::path target = out_path.empty() ? paths.mesh() : fs::path(out_path);
    write_ply(target, mesh, !ascii);
    out << "mesh: " << mesh.vertices.size() << " vertices, " << mesh.triangles.size() << " triangles, "
        << boundary_edge_count(mesh) << " boundary edges -> " << target.string() << "\n";
    return kOk;
}

int cmd_stitch(const Config& cfg, const Paths& paths, std::ostream& out, std::ostream& err) {
    SceneManifest m = load_manifest(paths.manifest());
    const bool attention = cfg.get_bool("stitch.attention", true);
    const AttentionConfig acfg = attention_config(cfg);
    std::size_t stitched = 0;
    for (ViewRecord& v : m.views) {
        if (v.crops.empty()) continue;
        const auto crops = load_crop_manifest(m.resolve(v.crops));
        double sigma = cfg.get("stitch.sigma", 0.0);
        if (!(sigma > 0.0)) sigma = default_crop_sigma(crops.front().feature.width(), crops.front().feature.height());
        FeatureMap f = gaussian_window_blend(crops, v.camera.width, v.camera.height, sigma);
        if (attention) f = scga(scra(f, acfg), acfg);
        v.feature = "views/" + sanitize(v.name) + ".feature.limg";
        save_image(m.resolve(v.feature), f);
        ++stitched;
    }
    save_manifest(paths.manifest(), m);
    out << "stitch: " << stitched << " views" << (attention ? " (with attention cleanup)" : "") << "\n";
    if (stitched == 0) err << "warning: no view lists crops\n";
    return kOk;
}

int cmd_fuse(const Config& cfg, const Paths& paths, std::ostream& out, std::ostream& err) {
    const Clock clock;
    SparseVoxelGrid grid = load_grid(paths.grid());
    if (grid.empty()) throw DomainError("fuse: the grid has no voxels");
    const TriangleMesh mesh = load_or_extract_mesh(paths, err);
    SceneData scene = load_scene(paths.manifest(), {.depths = false, .features = true});
    const FusionConfig fcfg = fusion_config(cfg, grid.edge_at(grid.finest_level()));
    const auto cameras = scene.cameras();
    const auto views = prepare_views(grid, mesh, cameras, std::move(scene.features), render_options(cfg));
    const FusionStats stats = fuse(grid, views, fcfg);
    save_grid(paths.fused(), grid);
    std::ofstream report(paths.dir / "fuse_report.tsv");
    report << "view\tmean_confidence\n";
    for (std::size_t k = 0; k < views.size(); ++k) {
        report << scene.manifest.views[k].name << '\t' << stats.view_mean_confidence[k] << '\n';
    }
    const double unfused = double(stats.unfused) / double(grid.size());
    out << "fuse: " << grid.size() << " voxels, " << stats.batches << " batches, unfused fraction " << unfused
        << " -> " << paths.fused().string() << "\n";
    for (std::size_t k = 0; k < views.size(); ++k) {
        out << "  " << scene.manifest.views[k].name << " mean confidence " << stats.view_mean_confidence[k] << "\n";
    }
    err << "fuse: " << std::fixed << std::setprecision(2) << clock.seconds() << " s\n";
    return kOk;
}

std::vector<QueryEmbedding> select(const std::vector<QueryEmbedding>& all, const std::vector<std::string>& labels) {
    if (labels.empty()) return all;
    std::vector<QueryEmbedding> out;
    for (const auto& l : labels) {
        const auto it = std::find_if(all.begin(), all.end(), [&](const QueryEmbedding& e) { return e.label == l; });
        if (it == all.end()) throw DataError("no embedding labelled '" + l + "'");
        out.push_back(*it);
    }
    return out;
}

std::vector<float> parse_color(const std::string& s) {
    std::vector<float> rgb;
    std::stringstream ss(s);
    for (std::string part; std::getline(ss, part, ',');) {
        try {
            rgb.push_back(std::stof(part));
        } catch (const std::exception&) {
            throw DataError("bad color '" + s + "', expected r,g,b");
        }
    }
    if (rgb.size() != 3) throw DataError("bad color '" + s + "', expected r,g,b");
    return rgb;
}

struct QueryArgs {
    std::vector<std::string> labels;
    int view = -1;
    bool png = false;
    std::string edit_label;
    std::string edit_color;
};

int cmd_query(const Config& cfg, const Paths& paths, const QueryArgs& args, std::ostream& out, std::ostream& err) {
    const Clock clock;
    SparseVoxelGrid grid = load_grid(paths.fused());
    const SceneManifest m = load_manifest(paths.manifest());
    const auto embeddings = select(load_embedding_manifest(m.resolve(m.embeddings)), args.labels);
    const double threshold = query_threshold(cfg);
    if (args.view >= int(m.views.size())) throw DataError("query: view index out of range");
    const RenderOptions ropt = render_options(cfg);
    std::map<std::string, VoxelMask> masks;
    for (const auto& q : embeddings) {
        const QueryResult r = relevance(grid, q);
        const VoxelMask mask = mask3d(grid, r, threshold);
        const std::string stem = sanitize(q.label);
        save_voxel_keys(paths.dir / "masks" / (stem + ".keys.txt"), grid, mask.voxels, q.label);
        write_ply(paths.dir / "masks" / (stem + ".ply"), PointCloud{mask.centers, {}});
        out << "query '" << q.label << "': " << mask.voxels.size() << " voxels at threshold " << threshold << "\n";
        if (args.view >= 0) {
            const ImagePlane map = render_relevance(grid, r, m.views[std::size_t(args.view)].camera, ropt);
            const std::string name = stem + ".view" + std::to_string(args.view);
            save_image(paths.dir / "renders" / (name + ".limg"), map);
            if (args.png) write_png(paths.dir / "renders" / (name + ".png"), map);
        }
        masks[q.label] = mask;
    }
    if (!args.edit_label.empty()) {
        const auto it = masks.find(args.edit_label);
        if (it == masks.end()) throw DataError("edit: label '" + args.edit_label + "' was not queried");
        std::vector<VoxelKey> keys;
        for (std::size_t i : it->second.voxels) keys.push_back(grid.key(i));
        edit_voxels(grid, keys, parse_color(args.edit_color));
        save_grid(paths.dir / "edited.lesv", grid);
        out << "edit: recolored " << keys.size() << " voxels -> " << (paths.dir / "edited.lesv").string() << "\n";
        if (args.view >= 0) {
            const RenderOutput img = render(grid, m.views[std::size_t(args.view)].camera, ropt);
            save_image(paths.dir / "renders" / ("edited.view" + std::to_string(args.view) + ".limg"), img.color);
            if (args.png) write_png(paths.dir / "renders" / ("edited.view" + std::to_string(args.view) + ".png"), img.color);
        }
    }
    err << "query: " << std::fixed << std::setprecision(2) << clock.seconds() << " s\n";
    return kOk;
}

double class_recall_mean(const std::vector<int>& predicted, const std::vector<int>& truth) {
    return mean_class_accuracy(predicted, truth);
}

int cmd_transfer(const Config& cfg, const Paths& paths, const std::string& points_path, std::ostream& out,
                 std::ostream& err) {
    const Clock clock;
    const SparseVoxelGrid grid = load_grid(paths.fused());
    const SceneManifest m = load_manifest(paths.manifest());
    const auto classes = load_embedding_manifest(m.resolve(m.embeddings));
    fs::path src = points_path;
    if (src.empty()) {
        if (m.gt_points.empty()) throw DataError("transfer: no --points given and the scene lists no ground-truth points");
        src = m.resolve(m.gt_points);
    }
    const PlyData ply = read_ply(src);
    const long long k = cfg.get_int("transfer.k", 8);
    if (k < 1) throw DomainError("transfer.k must be >= 1");
    const TransferResult res = transfer_pointcloud(grid, ply.mesh.vertices, classes, std::size_t(k));
    write_ply(paths.dir / "transfer.ply", PointCloud{ply.mesh.vertices, res.labels});
    out << "transfer: " << res.labels.size() << " points, K = " << k << " -> "
        << (paths.dir / "transfer.ply").string() << "\n";
    if (ply.labels.size() == res.labels.size() && !res.labels.empty()) {
        const double macc = class_recall_mean(res.labels, ply.labels);
        out << "transfer: mAcc " << macc << "\n";
    }
    err << "transfer: " << std::fixed << std::setprecision(2) << clock.seconds() << " s\n";
    return kOk;
}

int cmd_eval(const Config& cfg, const Paths& paths, const std::string& out_path, std::ostream& out,
             std::ostream& err) {
    const Clock clock;
    const SparseVoxelGrid grid = load_grid(paths.fused());
    const SceneManifest m = load_manifest(paths.manifest());
    const auto classes = load_embedding_manifest(m.resolve(m.embeddings));
    if (m.gt_voxel_labels.empty()) throw DataError("eval: the scene lists no ground-truth voxel labels");
    std::unordered_map<VoxelKey, int, VoxelKeyHash> truth;
    for (const auto& v : load_voxel_labels(m.resolve(m.gt_voxel_labels))) truth[v.key] = v.label;

    const double threshold = query_threshold(cfg);
    const RenderOptions ropt = render_options(cfg);
    const long long loc_view = cfg.get_int("eval.loc_view", 0);
    const bool can_localize = !m.primitives.empty() && loc_view >= 0 && loc_view < (long long)m.views.size();
    ImagePlane region_labels;
    if (can_localize) {
        region_labels = AnalyticScene(m.bounds, m.primitives).label_map(m.views[std::size_t(loc_view)].camera);
    }

    // Universe: fused voxels.
    std::vector<std::size_t> universe;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.fused(i)) universe.push_back(i);
    }
    std::vector<QueryMetrics> rows;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        const QueryResult r = relevance(grid, classes[c]);
        const VoxelMask mask = mask3d(grid, r, threshold);
        std::vector<std::uint8_t> in_mask(grid.size(), 0);
        for (std::size_t i : mask.voxels) in_mask[i] = 1;
        std::vector<std::uint8_t> pred, gt;
        for (std::size_t i : universe) {
            const auto it = truth.find(grid.key(i));
            pred.push_back(in_mask[i]);
            gt.push_back(it != truth.end() && it->second == int(c) ? 1 : 0);
        }
        QueryMetrics qm{classes[c].label, mask_metrics(pred, gt), std::nullopt};
        if (can_localize) {
            std::vector<std::uint8_t> region(region_labels.pixel_count(), 0);
            bool any = false;
            for (std::size_t p = 0; p < region.size(); ++p) {
                region[p] = region_labels.valid(p) && region_labels.at(p)[0] == float(c);
                any = any || region[p];
            }
            if (any) {
                const ImagePlane map = render_relevance(grid, r, m.views[std::size_t(loc_view)].camera, ropt);
                qm.loc_hit = localization_hit(map, region);
            }
        }
        rows.push_back(qm);
    }
    const AggregateMetrics agg = aggregate(rows);

    std::optional<double> transfer_macc;
    if (!m.gt_points.empty()) {
        const PlyData ply = read_ply(m.resolve(m.gt_points));
        if (ply.labels.size() == ply.mesh.vertices.size() && !ply.labels.empty()) {
            const long long k = cfg.get_int("transfer.k", 8);
            if (k < 1) throw DomainError("transfer.k must be >= 1");
            const TransferResult t = transfer_pointcloud(grid, ply.mesh.vertices, classes, std::size_t(k));
            transfer_macc = mean_class_accuracy(t.labels, ply.labels);
        }
    }

    const fs::path target = out_path.empty() ? paths.dir / "metrics.tsv" : fs::path(out_path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    std::ofstream table(target);
    if (!table) throw DataError("cannot open " + target.string() + " for writing");
    table << std::setprecision(9);
    table << "label\tiou\tacc25\tloc_hit\n";
    for (const auto& q : rows) {
        table << q.label << '\t' << q.mask.iou << '\t' << (q.mask.acc25_hit ? 1 : 0) << '\t'
              << (q.loc_hit ? std::to_string(int(*q.loc_hit)) : "na") << '\n';
    }
    table << "#summary\tmiou\t" << agg.miou << "\n";
    table << "#summary\tacc25\t" << agg.acc25 << "\n";
    table << "#summary\tmacc\t" << agg.macc << "\n";
    table << "#summary\tloc_acc\t" << agg.loc_acc << "\n";
    if (transfer_macc) table << "#summary\ttransfer_macc\t" << *transfer_macc << "\n";

    out << std::setprecision(4);
    for (const auto& q : rows) {
        out << "eval '" << q.label << "': iou " << q.mask.iou << (q.mask.acc25_hit ? " (acc@25)" : "")
            << (q.loc_hit ? (*q.loc_hit ? ", localized" : ", not localized") : "") << "\n";
    }
    out << "eval: mIoU " << agg.miou << ", Acc@25 " << agg.acc25 << ", mAcc " << agg.macc << ", Loc " << agg.loc_acc;
    if (transfer_macc) out << ", transfer mAcc " << *transfer_macc;
    out << " -> " << target.string() << "\n";
    err << "eval: " << std::fixed << std::setprecision(2) << clock.seconds() << " s\n";
    return kOk;
}

int cmd_geom(const Config& cfg, const Paths& paths, std::ostream& out) {
    const SparseVoxelGrid grid = load_grid(paths.grid());
    const SceneData scene = load_scene(paths.manifest(), {.depths = true});
    const PatchSpec spec = patch_spec(cfg);
    const RenderOptions ropt = render_options(cfg);
    double depth_sum = 0.0, normal_sum = 0.0;
    std::size_t depth_n = 0, normal_n = 0;
    for (std::size_t k = 0; k < scene.depths.size(); ++k) {
        const RenderOutput r = render(grid, scene.manifest.views[k].camera, ropt);
        try {
            depth_sum += patch_depth_loss(r.depth, scene.depths[k], spec);
            ++depth_n;
        } catch (const DomainError&) {
            // no fully valid patch in this view
        }
        if (k < scene.normals.size()) {
            try {
                normal_sum += normal_loss(r.normal, scene.normals[k]);
                ++normal_n;
            } catch (const DomainError&) {
            }
        }
    }
    out << std::setprecision(6) << "geom: patch depth loss "
        << (depth_n ? depth_sum / double(depth_n) : std::nan("")) << " over " << depth_n << " views, normal loss "
        << (normal_n ? normal_sum / double(normal_n) : std::nan("")) << " over " << normal_n << " views\n";
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sparse-voxel feature fusion and open-vocabulary queries", "svf"};
    app.require_subcommand(1);
    std::string config_path;
    std::vector<std::string> assignments;
    unsigned threads = 1;
    std::uint64_t seed = 0;
    std::string scene_dir = ".";
    app.add_option("--config", config_path, "Key-value configuration file")->check(CLI::ExistingFile);
    app.add_option("--set", assignments, "Override one configuration key (key=value)")->take_all();
    app.add_option("--threads", threads, "Worker threads (0 = hardware)");
    app.add_option("--seed", seed, "Random seed");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic scene");
    std::string synth_out, preset = "five_objects";
    synth->add_option("--out", synth_out, "Output scene directory")->required();
    synth->add_option("--preset", preset, "five_objects or sphere");

    const auto scene_option = [&](CLI::App* sub) {
        sub->add_option("--scene", scene_dir, "Scene directory holding scene.json")->check(CLI::ExistingDirectory);
    };
    auto* build = app.add_subcommand("build", "Integrate depth maps, blend levels and activate voxels");
    scene_option(build);

    auto* mesh = app.add_subcommand("mesh", "Extract the TSDF surface as PLY");
    std::string tsdf_path, mesh_out;
    bool ascii = false;
    scene_option(mesh);
    mesh->add_option("--tsdf", tsdf_path, "TSDF file (default: <scene>/tsdf.ltsd)");
    mesh->add_option("--out", mesh_out, "Output PLY (default: <scene>/mesh.ply)");
    mesh->add_flag("--ascii", ascii, "Write ASCII PLY");

    auto* stitch = app.add_subcommand("stitch", "Blend crop features into full feature maps");
    scene_option(stitch);

    auto* fuse_cmd = app.add_subcommand("fuse", "Lift feature maps into the voxel grid");
    scene_option(fuse_cmd);

    auto* query = app.add_subcommand("query", "Score, threshold, render and edit by query embedding");
    QueryArgs qargs;
    scene_option(query);
    query->add_option("--label", qargs.labels, "Query label (repeatable; default: all)");
    query->add_option("--view", qargs.view, "Render relevance into this view");
    query->add_flag("--png", qargs.png, "Also write PNG renders");
    query->add_option("--edit", qargs.edit_label, "Recolor the mask of this label");
    query->add_option("--color", qargs.edit_color, "New color r,g,b in [0,1]")->default_str("0,0,0");
    qargs.edit_color = "0,0,0";

    auto* transfer = app.add_subcommand("transfer", "Label a point cloud from the fused grid");
    std::string points_path;
    scene_option(transfer);
    transfer->add_option("--points", points_path, "PLY point cloud (default: ground-truth points)");

    auto* eval = app.add_subcommand("eval", "Retrieval metrics against ground truth");
    std::string metrics_out;
    bool geom = false;
    scene_option(eval);
    eval->add_option("--out", metrics_out, "Metrics table (default: <scene>/metrics.tsv)");
    eval->add_flag("--geom", geom, "Also report depth and normal consistency losses of grid.lesv");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    try {
        set_num_threads(threads);
        Config cfg;
        if (!config_path.empty()) cfg = Config::load(config_path);
        for (const auto& a : assignments) cfg.assign(a);
        for (const auto& [key, value] : cfg.entries()) {
            if (!kKnownKeys.count(key)) throw DataError("unknown configuration key '" + key + "'");
        }
        const Paths paths{scene_dir};
        if (*synth) return cmd_synth(cfg, synth_out, cfg.get_string("synth.preset", preset), seed, out, err);
        if (*build) return cmd_build(cfg, paths, out, err);
        if (*mesh) return cmd_mesh(paths, tsdf_path, mesh_out, ascii, out, err);
        if (*stitch) return cmd_stitch(cfg, paths, out, err);
        if (*fuse_cmd) return cmd_fuse(cfg, paths, out, err);
        if (*query) return cmd_query(cfg, paths, qargs, out, err);
        if (*transfer) return cmd_transfer(cfg, paths, points_path, out, err);
        if (*eval) {
            const int rc = cmd_eval(cfg, paths, metrics_out, out, err);
            return geom ? cmd_geom(cfg, paths, out) : rc;
        }
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kDomainError;
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kDataError;
    }
    return kUsage;
}

}  // namespace svf::cli
