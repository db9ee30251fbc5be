// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>

#include "svf/fuse3d.hpp"
#include "svf/knn.hpp"
#include "svf/morton.hpp"
#include "svf/parallel.hpp"
#include "svf/render.hpp"
#include "svf/synth.hpp"
#include "svf/tsdf.hpp"

namespace {

using namespace svf;

void BM_MortonRoundTrip(benchmark::State& state) {
    std::uint32_t i = 0;
    for (auto _ : state) {
        const VoxelKey k = morton_encode(i & 1023, (i >> 3) & 1023, (i >> 6) & 1023, 10);
        benchmark::DoNotOptimize(morton_decode(k));
        ++i;
    }
}
BENCHMARK(BM_MortonRoundTrip);

SparseVoxelGrid dense_shell(std::uint32_t level) {
    SparseVoxelGrid g(Aabb{Vec3(-1, -1, -1), Vec3(1, 1, 1)});
    const std::uint32_t n = 1u << level;
    const double edge = 2.0 / n;
    for (std::uint32_t z = 0; z < n; ++z)
        for (std::uint32_t y = 0; y < n; ++y)
            for (std::uint32_t x = 0; x < n; ++x) {
                const Vec3 c = Vec3(x + 0.5, y + 0.5, z + 0.5) * edge - Vec3::Ones();
                if (std::abs(c.norm() - 0.6) > edge) continue;
                CornerDensities d;
                d.fill(20.0f);
                g.insert(morton_encode(x, y, z, level), d);
            }
    return g;
}

void BM_Render(benchmark::State& state) {
    set_num_threads(1);
    const SparseVoxelGrid g = dense_shell(std::uint32_t(state.range(0)));
    const Camera cam = Camera::look_at(Vec3(0, -3, 0.5), Vec3::Zero(), Vec3::UnitZ(), 120, 120, 128, 96);
    for (auto _ : state) benchmark::DoNotOptimize(render(g, cam));
    state.counters["voxels"] = double(g.size());
    state.SetItemsProcessed(state.iterations() * 128 * 96);
}
BENCHMARK(BM_Render)->Arg(5)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_TsdfIntegrate(benchmark::State& state) {
    set_num_threads(1);
    const SynthSceneSpec spec = sphere_spec();
    const AnalyticScene scene(spec.bounds, spec.primitives);
    const Camera cam = orbit_cameras(spec.orbit, spec.width, spec.height).front();
    const DepthMap depth = scene.depth_map(cam);
    const auto level = std::uint32_t(state.range(0));
    const double trunc = 4.0 * (spec.bounds.max - spec.bounds.min).x() / double(1u << level);
    for (auto _ : state) {
        TsdfField f(spec.bounds, level, trunc);
        integrate_depth(f, cam, depth);
        benchmark::DoNotOptimize(f);
    }
}
BENCHMARK(BM_TsdfIntegrate)->Arg(6)->Arg(7)->Unit(benchmark::kMillisecond);

void BM_FuseBatch(benchmark::State& state) {
    set_num_threads(1);
    const int dim = 16;
    SparseVoxelGrid base = dense_shell(5);
    std::mt19937_64 rng(1);
    std::normal_distribution<float> nd;
    std::vector<ViewBundle> views;
    for (int v = 0; v < 4; ++v) {
        const double a = 1.57 * v;
        ViewBundle b;
        b.camera = Camera::look_at(3.0 * Vec3(std::cos(a), std::sin(a), 0.3), Vec3::Zero(), Vec3::UnitZ(), 60, 60,
                                   64, 64);
        b.feature = FeatureMap(64, 64, dim);
        std::vector<float> f(dim);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x) {
                for (float& c : f) c = nd(rng);
                b.feature.set(x, y, f);
            }
        const RenderOutput r = render(base, b.camera);
        b.depth_ren = r.depth;
        b.depth_mesh = r.depth;
        views.push_back(std::move(b));
    }
    FusionConfig cfg = FusionConfig::for_voxel_edge(base.edge_at(5));
    cfg.batch_size = std::size_t(state.range(0));
    for (auto _ : state) {
        SparseVoxelGrid g = base;
        benchmark::DoNotOptimize(fuse(g, views, cfg));
    }
    state.counters["voxels"] = double(base.size());
}
BENCHMARK(BM_FuseBatch)->Arg(64)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_Knn(benchmark::State& state) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Vec3> pts(std::size_t(state.range(0)));
    for (Vec3& p : pts) p = Vec3(u(rng), u(rng), u(rng));
    const SpatialHash hash(pts, 0.05);
    for (auto _ : state) benchmark::DoNotOptimize(hash.knn(Vec3(u(rng), u(rng), u(rng)), 8));
}
BENCHMARK(BM_Knn)->Arg(10000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
