#pragma once

#include <explore/behavior.hpp>
#include <explore/common.hpp>
#include <explore/frontier.hpp>
#include <explore/info_gain.hpp>
#include <explore/occ_predict.hpp>
#include <explore/path_search.hpp>
#include <explore/semantics.hpp>
#include <explore/sim_world.hpp>
#include <explore/traj_opt.hpp>

#include <functional>
#include <string>
#include <vector>

namespace explore {

enum class MethodKind { kFrontier, kFrontierUtil, kFrontierPred, kSeer };
MethodKind parse_method(const std::string& name);
std::string method_name(MethodKind m);

struct RunConfig {
  double dt = 0.1;
  int substeps = 5;
  double timeout_s = 300.0;
  double replan_period = 2.0;
  double success_coverage = 0.95;
  double stop_coverage = 0.99;
  double bootstrap_radius = 0.5;
  double stuck_s = 10.0;  // give up after this long without any reachable goal
  double predict_refresh_distance = 2.0;
  double predict_refresh_age = 2.0;
  double soi_defer_s = 10.0;
  double cluster_defer_s = 20.0;
  uint64_t run_seed = 0;  // nonzero: jitters the start yaw
  bool record_trajectory = true;

  Limits limits;
  CameraModel camera;
  MapParams map;
  SafetyParams safety;
  SamplerParams sampler;
  FrontierParams frontier;
  DoorParams doors;
  BehaviorParams behavior;
  YawParams yaw;
  PositionPlanParams plan;

  void validate() const;
};

struct CoverageSample {
  double t = 0.0;
  double coverage = 0.0;
};

struct ExperimentReport {
  std::string method;
  std::string predictor;
  uint64_t seed = 0;
  uint64_t run_seed = 0;
  double time_s = 0.0;  // at the first coverage >= success level (else at the end)
  double path_m = 0.0;  // likewise
  double end_time_s = 0.0;
  double total_path_m = 0.0;
  bool success = false;
  bool collision = false;
  double final_coverage = 0.0;
  double min_clearance = 0.0;
  double max_knot_residual = 0.0;
  int replans = 0;
  std::string reason;
  std::vector<CoverageSample> curve;
  std::vector<std::string> events;
  std::string trajectory;  // "t x y z yaw" rows at the sub-step rate
  // wall-clock, not part of any deterministic output
  double mean_cycle_ms = 0.0;
  double max_cycle_ms = 0.0;
};

/// Read-only view handed to the replan hook.
struct ReplanContext {
  double t;
  const World& world;
  const GroundTruth& gt;
  const VoxelMap& map;
  const PredictionStore* store;
  const FrontierRegistry& frontiers;
  const CameraModel& camera;
  const SamplerParams& sampler;
};
/// Returns false to stop the run early.
using ReplanHook = std::function<bool(const ReplanContext&)>;

ExperimentReport run_experiment(const World& world, MethodKind method, const PredictorKind& predictor,
                                const RunConfig& config, const ReplanHook& hook = {});

std::string format_report(const ExperimentReport& r);

struct BenchmarkRow {
  std::string method;
  uint64_t seed = 0;
  double time_s = 0.0;
  double path_m = 0.0;
  bool success = false;
  double coverage = 0.0;
};

struct StatSummary {
  int n = 0;
  double min = 0.0, max = 0.0, avg = 0.0, std = 0.0;  // population std
};
StatSummary summarize(const std::vector<double>& xs);

struct MethodSummary {
  std::string method;
  int runs = 0;
  int successes = 0;
  double success_pct = 0.0;
  StatSummary time, path;
};

struct BenchmarkTable {
  std::vector<BenchmarkRow> rows;
  std::vector<MethodSummary> summary;
};

/// Runs every method on every world; `run_seeds` (optional, one per world)
/// set RunConfig::run_seed.
BenchmarkTable run_benchmark(const std::vector<World>& worlds, const std::vector<MethodKind>& methods,
                             const PredictorKind& predictor, const RunConfig& config,
                             const std::vector<uint64_t>& run_seeds = {},
                             const std::function<void(const ExperimentReport&)>& on_run = {});
std::vector<MethodSummary> summarize_rows(const std::vector<BenchmarkRow>& rows);
std::string benchmark_csv(const BenchmarkTable& t);
std::string benchmark_summary_text(const BenchmarkTable& t);

/// Ground-truth gain of a strided camera view: per ray, voxels currently
/// unknown in the map up to and including the first ground-truth occupied voxel.
double ground_truth_view_gain(const VoxelMap& map, const GroundTruth& gt, const Vec3& p, double yaw,
                              const CameraModel& camera, int stride);

struct GainSample {
  double g_gt = 0.0, g_cls = 0.0, g_pred = 0.0;
};

struct GainErrorReport {
  int samples = 0;  // with g_gt > 0
  double mean_pct_classical = 0.0;
  double mean_pct_predicted = 0.0;
  std::vector<GainSample> raw;
};

/// Scripted FrontierUtil exploration; at each replan the best viewpoint of up
/// to `per_replan` clusters is scored by all three gains.
GainErrorReport eval_gain_error(const World& world, const PredictorKind& predictor, int n_samples,
                                const RunConfig& config, int per_replan = 10);
GainErrorReport merge_gain_reports(const std::vector<GainErrorReport>& parts);

}  // namespace explore
