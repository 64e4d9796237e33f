// Serial vs OpenMP timings of the parallel kernels, with an output check.
#include <explore/frontier.hpp>
#include <explore/info_gain.hpp>
#include <explore/occ_predict.hpp>
#include <explore/sim_world.hpp>

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <random>

using namespace explore;

namespace {

template <class F>
double best_ms(int reps, F&& f) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel, bool same) {
  std::printf("%-16s %10.3f %10.3f %8.2fx  %s\n", name, serial, parallel, serial / parallel, same ? "match" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 5;
  std::printf("threads %d, best of %d\n", omp_get_max_threads(), reps);
  std::printf("%-16s %10s %10s %9s\n", "kernel", "serial_ms", "omp_ms", "speedup");

  const World world = generate_world(1);
  const CameraModel cam;
  std::vector<RayEndpoint> rs, rp;
  const double ds = best_ms(reps, [&] { rs = render_depth(world, world.start, cam, Exec::kSerial); });
  const double dp = best_ms(reps, [&] { rp = render_depth(world, world.start, cam, Exec::kParallel); });
  bool same = rs.size() == rp.size();
  for (size_t i = 0; same && i < rs.size(); ++i) same = rs[i].end == rp[i].end && rs[i].hit == rp[i].hit;
  row("render_depth", ds, dp, same);

  VoxelMap map = make_map(world);
  std::mt19937_64 rng(7);
  for (int k = 0; k < 30; ++k) {
    Pose p = world.start;
    p.yaw = std::uniform_real_distribution<double>(-kPi, kPi)(rng);
    map.integrate_scan(p.p, render_depth(world, p, cam));
  }
  const Aabb all = Aabb::of(Vec3i::Zero(), map.dims() - Vec3i::Ones());
  std::vector<Vec3i> fs, fp;
  const double fs_ms = best_ms(reps, [&] { fs = frontier_cells_in(map, all, Exec::kSerial); });
  const double fp_ms = best_ms(reps, [&] { fp = frontier_cells_in(map, all, Exec::kParallel); });
  row("frontier_scan", fs_ms, fp_ms, fs == fp);

  FrontierRegistry reg(map);
  reg.update(map, all);
  const SafetyGrid safety(map);
  const FrontierCluster* cl = nullptr;
  for (const auto& [id, c] : reg.clusters())
    if (!cl || c.cells.size() > cl->cells.size()) cl = &c;
  if (cl) {
    std::vector<Viewpoint> vs, vp;
    const double vs_ms = best_ms(reps, [&] { vs = sample_viewpoints(*cl, map, nullptr, safety, cam, {}, Exec::kSerial); });
    const double vp_ms = best_ms(reps, [&] { vp = sample_viewpoints(*cl, map, nullptr, safety, cam, {}, Exec::kParallel); });
    bool vsame = vs.size() == vp.size();
    for (size_t i = 0; vsame && i < vs.size(); ++i) vsame = vs[i].p == vp[i].p && vs[i].gain == vp[i].gain;
    row("viewpoint_gain", vs_ms, vp_ms, vsame);
  }

  TinyNetWeights w = tinynet_zero_weights();
  std::normal_distribution<float> n(0.0f, 0.3f);
  for (auto& L : w.layers)
    for (auto& k : L.kernel) k = n(rng);
  const OccupancyBlock block = map.extract_block(world.start.p, {40, 40, 24});
  PredictedBlock ts, tp;
  const double ts_ms = best_ms(reps, [&] { ts = tinynet_forward(w, block, Exec::kSerial); });
  const double tp_ms = best_ms(reps, [&] { tp = tinynet_forward(w, block, Exec::kParallel); });
  row("tinynet", ts_ms, tp_ms, ts.probs == tp.probs);
  return 0;
}
