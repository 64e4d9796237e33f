// One pass/fail line per acceptance criterion. Exit status is the number of failures.
#include <explore/explore_runtime.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>

#include "test_util.hpp"

using namespace explore;
using namespace explore::testing_util;

namespace {

// tolerances and budgets
constexpr double kLossTol = 1e-9;
constexpr double kGradRelTol = 1e-4;
constexpr double kDpTol = 1e-9;
constexpr double kKnotResidual = 1e-6;
constexpr double kGainDominanceBudget_s = 10.0;
constexpr double kGainErrorBudget_s = 300.0;
constexpr double kBenchmarkBudget_s = 600.0;
constexpr double kGainErrorRatio = 0.8;
constexpr double kPathRatio = 0.9;
constexpr double kDoorRate = 0.9;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const char* name, const std::function<Outcome()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), s);
  std::fflush(stdout);
  failures += !o.pass;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

Outcome gain_dominance() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> u(0, 1);
  long rays = 0, violations = 0, null_mismatch = 0;
  for (int k = 0; k < 1000; ++k) {
    const VoxelMap m = random_map({12, 12, 6}, rng, 0.2 + 0.5 * u(rng), 0.02 + 0.1 * u(rng));
    OccupancyBlock like(m.dims());
    PredictedBlock b(like);
    for (size_t i = 0; i < b.size(); ++i) {
      b.mask[i] = u(rng) < 0.7;
      b.probs[i] = u(rng);
    }
    PredictionStore store(m);
    store.insert(b);
    for (int r = 0; r < 40; ++r) {
      const Vec3 a = random_point(m, rng), e = random_point(m, rng);
      const int c = classical_gain_ray(m, a, e), p = predicted_gain_ray(m, &store, a, e);
      violations += p < 0 || p > c;
      null_mismatch += predicted_gain_ray(m, nullptr, a, e) != c;
      ++rays;
    }
  }
  const double s = seconds_since(t0);
  return {violations == 0 && null_mismatch == 0 && s < kGainDominanceBudget_s,
          fmt("%ld rays on 1000 maps, %ld bound violations, %ld null mismatches, %.2f s (budget %.0f s)", rays,
              violations, null_mismatch, s, kGainDominanceBudget_s)};
}

Outcome gain_ray_walk() {
  VoxelMap m = small_map({12, 3, 3});
  for (int x = 0; x < 12; ++x) set_trinary(m, {x, 1, 1}, x == 0 ? kFree : x <= 6 ? kUnknown : kOccupied);
  auto store_at = [&](int x, double prob) {
    OccupancyBlock like({1, 1, 1});
    like.origin = Vec3i(x, 1, 1);
    PredictedBlock b(like);
    b.mask[0] = 1;
    b.probs[0] = prob;
    PredictionStore s(m);
    s.insert(b);
    return s;
  };
  const Vec3 a = m.center({0, 1, 1}), e = m.center({11, 1, 1});
  const PredictionStore occ = store_at(3, 0.9), fr = store_at(3, 0.1);
  const int g_occ = predicted_gain_ray(m, &occ, a, e), g_free = predicted_gain_ray(m, &fr, a, e);
  return {g_occ == 3 && g_free == 6,
          fmt("3rd voxel predicted occupied -> %d (want 3); predicted free -> %d (want 6)", g_occ, g_free)};
}

Outcome gain_error() {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg;
  std::vector<GainErrorReport> parts;
  for (uint64_t s = 1; s <= 5; ++s) parts.push_back(eval_gain_error(generate_world(s), parse_predictor("oracle"), 40, cfg));
  const GainErrorReport g = merge_gain_reports(parts);
  const double sec = seconds_since(t0);
  const bool ok = g.samples >= 200 && g.mean_pct_predicted <= kGainErrorRatio * g.mean_pct_classical &&
                  sec < kGainErrorBudget_s;
  return {ok, fmt("%d viewpoints over 5 worlds: predicted %.2f%% vs classical %.2f%% (ratio %.3f, limit %.1f), %.0f s",
                  g.samples, g.mean_pct_predicted, g.mean_pct_classical,
                  g.mean_pct_classical > 0 ? g.mean_pct_predicted / g.mean_pct_classical : 0.0, kGainErrorRatio, sec)};
}

std::vector<ExperimentReport> bench_reports;

Outcome benchmark() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<World> worlds;
  for (uint64_t s = 1; s <= 10; ++s) worlds.push_back(generate_world(s));
  const BenchmarkTable t = run_benchmark(worlds, {MethodKind::kFrontier, MethodKind::kSeer}, parse_predictor("oracle"),
                                         RunConfig{}, {}, [](const ExperimentReport& r) { bench_reports.push_back(r); });
  const double sec = seconds_since(t0);
  double path[2] = {0, 0};
  int n[2] = {0, 0}, succ[2] = {0, 0};
  for (const auto& r : t.rows) {
    const int k = r.method == "seer";
    path[k] += r.path_m;
    ++n[k];
    succ[k] += r.success;
  }
  const double pf = path[0] / std::max(1, n[0]), ps = path[1] / std::max(1, n[1]);
  const bool ok = n[0] == 10 && n[1] == 10 && ps <= kPathRatio * pf && succ[1] >= succ[0] && sec < kBenchmarkBudget_s;
  return {ok, fmt("10 worlds: seer path %.2f m vs frontier %.2f m (ratio %.3f, limit %.1f); success %d/10 vs %d/10; %.0f s",
                  ps, pf, pf > 0 ? ps / pf : 0.0, kPathRatio, succ[1], succ[0], sec)};
}

Outcome loss_exactness() {
  OccupancyBlock in1({1, 1, 1}, kUnknown), tar1({1, 1, 1}, kOccupied);
  PredictedBlock p1(in1);
  p1.probs[0] = 0.8;
  const double occ = loss_occ(p1, tar1, in1, 5.0);

  OccupancyBlock col({1, 1, 4}, kOccupied);
  col.at(0, 0, 3) = kFree;
  PredictedBlock p2(col);
  p2.probs = {0.9, 0.1, 0.1, 0.1};
  const double st = loss_struct(p2, col, 2.0);

  PredictedBlock p3(col);
  p3.probs = {std::exp(-0.5), std::exp(-1.5), std::exp(-1.5), 1.0 - std::exp(-0.5)};
  const double tot = loss_total(p3, col, col, LossWeights{});

  OccupancyBlock unk({3, 3, 3}, kUnknown);
  PredictedBlock p4(unk);
  for (size_t i = 0; i < p4.size(); ++i) p4.probs[i] = 0.1 + 0.8 * double(i) / double(p4.size());
  const double zero = loss_occ(p4, unk, OccupancyBlock({3, 3, 3}, kFree), 5.0);

  const bool ok = std::abs(occ + 5.0 * std::log(0.8)) <= kLossTol && std::abs(st - 4.0) <= kLossTol &&
                  std::abs(tot - 6.0) <= kLossTol && zero == 0.0;
  return {ok, fmt("occ %.12f (want %.12f), struct %.12f (want 4), total %.12f (want 6), all-unknown %.3g", occ,
                  -5.0 * std::log(0.8), st, tot, zero)};
}

Outcome yaw_optimization() {
  std::mt19937_64 rng(2002);
  std::normal_distribution<double> n(0, 1.5);
  std::uniform_real_distribution<double> dur(0.3, 2.0);
  YawParams P;
  P.v_max = 0.8;
  P.a_max = 0.8;
  double worst_grad = 0;
  int worse = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 2 + trial % 5;
    std::vector<double> gamma, T;
    for (int i = 0; i <= m; ++i) gamma.push_back(n(rng));
    for (int i = 0; i < m; ++i) T.push_back(dur(rng));
    const YawObjective obj(gamma, T, P);
    Eigen::VectorXd x(obj.interior());
    for (int i = 0; i < x.size(); ++i) x[i] = gamma[size_t(i + 1)] + 0.3 * n(rng);
    Eigen::VectorXd g;
    obj.value(x, &g);
    for (int i = 0; i < x.size(); ++i) {
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += 1e-5;
      xm[i] -= 1e-5;
      const double fd = (obj.value(xp) - obj.value(xm)) / 2e-5;
      worst_grad = std::max(worst_grad, std::abs(g[i] - fd) / std::max(1.0, std::abs(fd)));
    }
    const YawPlan plan = optimize_yaw(gamma, T, P);
    worse += plan.cost > plan.cost_reference;
  }

  YawParams D;
  D.bins = 8;
  double worst_dp = 0;
  const int dp_instances = 200;
  for (int trial = 0; trial < dp_instances; ++trial) {
    std::vector<double> table(size_t(3 * D.samples * 16));
    for (auto& v : table) v = std::uniform_real_distribution<double>(0, 1)(rng);
    YawSearchProblem prob;
    prob.psi0 = std::uniform_real_distribution<double>(-kPi, kPi)(rng);
    prob.T = {dur(rng), dur(rng), dur(rng)};
    prob.reward = [&](int seg, int k, double psi) {
      const int bin = int(std::floor((wrap_angle(psi) + kPi) / (2 * kPi) * 16)) & 15;
      return table[size_t((seg * D.samples + k) * 16 + bin)];
    };
    if (trial % 2) prob.psi_end = std::uniform_real_distribution<double>(-kPi, kPi)(rng);
    const auto bins = yaw_bins(prob.psi0, D.bins);
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b)
        for (int c = 0; c < 8; ++c)
          best = std::min(best, yaw_sequence_cost(prob, D, {prob.psi0, bins[size_t(a)], bins[size_t(b)],
                                                            prob.psi_end ? *prob.psi_end : bins[size_t(c)]}));
    worst_dp = std::max(worst_dp, std::abs(search_yaw(prob, D).cost - best));
  }
  return {worst_grad <= kGradRelTol && worst_dp <= kDpTol && worse == 0,
          fmt("gradient max rel err %.2e on 50 instances; DP vs exhaustive max diff %.2e on %d instances; "
              "%d optimized costs above reference",
              worst_grad, worst_dp, dp_instances, worse)};
}

Outcome sliding_window() {
  std::mt19937_64 rng(3003);
  const CameraModel cam;
  const SamplerParams params;
  const SweepLayout L = SweepLayout::make(cam, params);
  int mismatches = 0, windows = 0;
  for (int k = 0; k < 100; ++k) {
    const VoxelMap m = random_map({40, 40, 20}, rng, 0.75, 0.01);
    OccupancyBlock like(m.dims());
    PredictedBlock b(like);
    std::uniform_real_distribution<double> u(0, 1);
    for (size_t i = 0; i < b.size(); ++i) {
      b.mask[i] = u(rng) < 0.5;
      b.probs[i] = u(rng);
    }
    PredictionStore store(m);
    store.insert(b);
    const Vec3 p = random_point(m, rng, 0.5);
    const double yaw0 = std::uniform_real_distribution<double>(-kPi, kPi)(rng);
    const auto win = window_gains(m, &store, p, yaw0, cam, L);
    for (int w = 0; w < L.yaw_count; ++w) {
      double direct = 0;
      for (int c = 0; c < L.cols; ++c) {
        const double az = L.azimuth(yaw0, w * L.cols_per_yaw + c);
        for (int r = 0; r < L.rows; ++r)
          direct += predicted_gain_ray(m, &store, p, ray_end(p, az, L.elevation(cam, r), cam.max_range));
      }
      mismatches += win[size_t(w)] != direct;
      ++windows;
    }
  }
  return {mismatches == 0, fmt("%d of %d per-yaw window gains differ from direct ray casting (100 viewpoints)",
                               mismatches, windows)};
}

Outcome frontier_incremental() {
  int bad = 0;
  std::string first;
  for (uint64_t s = 0; s < 50; ++s) {
    std::string why;
    if (!incremental_matches_scratch(5000 + s, 12, &why)) {
      if (!bad) first = why;
      ++bad;
    }
  }
  return {bad == 0, fmt("%d of 50 scan sequences on 20x20x8 maps diverge%s%s", bad, bad ? ": " : "", first.c_str())};
}

Outcome door_detection() {
  std::mt19937_64 rng(4004);
  std::uniform_real_distribution<double> gap_w(0.7, 1.0), wide_w(2.0, 3.0);
  int hits = 0, solid = 0, wide = 0;
  for (int k = 0; k < 50; ++k) {
    const WallFixture f = wall_fixture(rng, int(std::lround(gap_w(rng) / 0.1)));
    hits += door_found(detect_doors(f.map, f.cluster), f.door);
  }
  for (int k = 0; k < 50; ++k) {
    const WallFixture f = wall_fixture(rng, 0);
    solid += int(detect_doors(f.map, f.cluster).size());
  }
  for (int k = 0; k < 50; ++k) {
    const WallFixture f = wall_fixture(rng, int(std::lround(wide_w(rng) / 0.1)));
    wide += int(detect_doors(f.map, f.cluster).size());
  }
  return {hits >= int(std::ceil(kDoorRate * 50)) && solid == 0 && wide == 0,
          fmt("%d/50 door gaps found; %d candidates on solid walls; %d on wide openings", hits, solid, wide)};
}

Outcome safety_success() {
  if (bench_reports.empty()) return {false, "no benchmark runs to inspect"};
  const double r_robot = RunConfig{}.safety.robot_radius;
  int succ = 0, bad = 0;
  double min_clear = std::numeric_limits<double>::infinity(), max_res = 0;
  for (const auto& r : bench_reports) {
    max_res = std::max(max_res, r.max_knot_residual);
    if (!r.success) continue;
    ++succ;
    min_clear = std::min(min_clear, r.min_clearance);
    bad += r.min_clearance < r_robot || r.final_coverage < 0.95 || r.collision;
  }
  return {bad == 0 && max_res < kKnotResidual,
          fmt("%d successful runs of %zu, %d violate clearance/coverage; min clearance %.3f m; max knot residual %.2e",
              succ, bench_reports.size(), bad, min_clear, max_res)};
}

}  // namespace

int main() {
  report("gain_dominance", gain_dominance);
  report("gain_ray_walk", gain_ray_walk);
  report("gain_error", gain_error);
  report("benchmark", benchmark);
  report("loss_exactness", loss_exactness);
  report("yaw_optimization", yaw_optimization);
  report("sliding_window", sliding_window);
  report("frontier_incremental", frontier_incremental);
  report("door_detection", door_detection);
  report("safety_success", safety_success);
  std::printf("%d failed\n", failures);
  return failures;
}
