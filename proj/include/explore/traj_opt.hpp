#pragma once

#include <explore/common.hpp>
#include <explore/info_gain.hpp>
#include <explore/path_search.hpp>
#include <explore/semantics.hpp>
#include <explore/voxel_map.hpp>

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace explore {

/// Piecewise quintic in `dim` dimensions. Segment i has duration T[i] and
/// coefficient matrix C[i] (6 x dim, row k multiplies t^k in local time).
struct PiecewisePoly {
  int dim = 0;
  std::vector<double> T;
  std::vector<Eigen::MatrixXd> C;

  double duration() const;
  int segments() const { return int(T.size()); }
  std::vector<double> knot_times() const;
  /// deriv-th derivative at global time t (clamped to [0, duration]).
  Eigen::VectorXd eval(double t, int deriv = 0) const;
  Eigen::VectorXd eval_local(int seg, double t, int deriv) const;
  /// Reparametrized copy running `s` times slower: same geometric path.
  PiecewisePoly scaled(double s) const;
  /// Largest position/velocity/acceleration mismatch across interior knots.
  double knot_residual() const;
};

/// 6x6 jerk-cost matrix of one quintic segment in its boundary state
/// (p0, v0, a0, p1, v1, a1): cost = x^T Q x.
Eigen::Matrix<double, 6, 6> segment_jerk_matrix(double T);
/// Coefficients of the quintic matching boundary state x over duration T.
Eigen::Matrix<double, 6, 1> quintic_from_boundary(const Eigen::Matrix<double, 6, 1>& x, double T);

/// Min-jerk piecewise quintic through `points` (M+1 rows, dim columns) with
/// durations T. Start and end velocity/acceleration are fixed; interior
/// velocities and accelerations are free.
PiecewisePoly solve_min_jerk(const Eigen::MatrixXd& points, const std::vector<double>& T, const Eigen::MatrixXd& start_va,
                             const Eigen::MatrixXd& end_va);

/// Knot-value quadratic form of the min-jerk cost with zero boundary
/// derivatives: min over interior derivatives of the jerk cost = p^T S p.
Eigen::MatrixXd min_jerk_schur(const std::vector<double>& T);

/// Trapezoidal-speed duration for a straight move of length L.
double trapezoid_time(double L, double v_max, double a_max);

struct Limits {
  double max_velocity = 1.0;
  double max_acceleration = 1.0;
  void validate() const;
};

struct PositionPlanParams {
  double los_margin = 0.02;  // simplification keeps r_robot + margin clearance
  double check_dt = 0.02;
  int max_split_rounds = 10;
};

struct StartState {
  Vec3 p{Vec3::Zero()};
  Vec3 v{Vec3::Zero()};
  Vec3 a{Vec3::Zero()};
};

struct PositionPlan {
  PiecewisePoly traj;
  std::vector<Vec3> waypoints;
  std::vector<Aabb> corridor;  // voxel boxes; their union contains every sample
  bool rest_to_rest = false;   // fell back to stopping at every waypoint
};

/// Shortest safe grid path, line-of-sight simplification, box corridor and
/// min-jerk fit with time scaling. Throws RuntimeFailure "unreachable goal" or
/// "corridor failure".
PositionPlan plan_position(const StartState& start, const Vec3& goal, const VoxelMap& map, const SafetyGrid& safety,
                           const Limits& limits, const PositionPlanParams& params = {});

/// True if `p` lies in some box of the corridor (voxel cubes, metric test).
bool in_corridor(const VoxelMap& map, const std::vector<Aabb>& corridor, const Vec3& p);

// ---- yaw -------------------------------------------------------------------

struct YawParams {
  double beta_psi = 1.0;
  double beta_s = 3.0;
  double beta_u = 0.5;
  int samples = 5;
  double rho_p = 10.0;
  double rho_v = 100.0;
  double rho_a = 100.0;
  double v_max = 1.5;
  double a_max = 2.0;
  int bins = 12;
  double knot_spacing = 1.0;  // yaw knots are spread uniformly over the motion at about this period
  void validate() const;
};

/// Weighted information reward β_s f_s + β_u g_e at sample `k` of segment `seg`
/// for yaw `psi`.
using YawReward = std::function<double(int seg, int k, double psi)>;

struct YawSearchProblem {
  double psi0 = 0.0;
  std::optional<double> psi_end;
  std::vector<double> T;
  YawReward reward;
};

/// Smoothstep cubic from a to b over T (zero rate at both ends).
double yaw_primitive(double a, double b, double T, double t);
/// β_ψ ∫ψ̈² of the primitive: 12 β_ψ Δ² / T³.
double yaw_smoothness(double delta, double T, double beta_psi);

/// Σ_i f_ψ,i for knot yaws psi[0..M] (psi[0] = psi0); differences are wrapped.
double yaw_sequence_cost(const YawSearchProblem& prob, const YawParams& params, const std::vector<double>& psi);

/// Bin values: psi0 + 2πk/K.
std::vector<double> yaw_bins(double psi0, int K);

struct YawSearchResult {
  std::vector<double> gamma;  // M+1 unwrapped knot yaws, gamma[0] = psi0
  double cost = 0.0;
};

/// Dynamic programming over K bins per knot (knot 0 fixed, knot M fixed when
/// psi_end is set).
YawSearchResult search_yaw(const YawSearchProblem& prob, const YawParams& params);

/// Samples the camera over 360° at each position and returns the normalized
/// information term g_e in [0, 1] for a yaw, plus f_s for an optional SOI.
class YawRewardTable {
 public:
  YawRewardTable(const std::vector<std::vector<Vec3>>& sample_positions, const VoxelMap& map,
                 const PredictionStore* store, const CameraModel& camera, std::optional<Vec3> soi,
                 const YawParams& params);
  double g_e(int seg, int k, double psi) const;
  double f_s(int seg, int k, double psi) const;
  double operator()(int seg, int k, double psi) const;

 private:
  int slices_ = 36, window_ = 8;
  double hfov_;
  std::vector<std::vector<Vec3>> pos_;
  std::vector<std::vector<std::vector<double>>> slice_gain_;
  double norm_ = 1.0;
  std::optional<Vec3> soi_;
  YawParams params_;
};

/// Yaw objective over interior knot yaws with fixed boundary yaws.
class YawObjective {
 public:
  YawObjective(std::vector<double> gamma, std::vector<double> T, const YawParams& params);
  /// psi_int has M-1 entries; grad (optional) receives dJ/dpsi_int.
  double value(const Eigen::VectorXd& psi_int, Eigen::VectorXd* grad = nullptr) const;
  Eigen::VectorXd full(const Eigen::VectorXd& psi_int) const;
  int interior() const { return int(gamma_.size()) - 2; }
  const std::vector<double>& gamma() const { return gamma_; }

 private:
  std::vector<double> gamma_, T_;
  YawParams p_;
  Eigen::MatrixXd S_;
};

struct YawPlan {
  std::vector<double> gamma;
  std::vector<double> psi;  // optimized knot yaws (M+1)
  PiecewisePoly traj;       // dim 1
  double cost_reference = 0.0;
  double cost = 0.0;
  int iterations = 0;
};

/// Gradient descent (Barzilai-Borwein step with Armijo backtracking) from
/// psi = gamma until the gradient norm is below 1e-6 or 500 iterations.
YawPlan optimize_yaw(const std::vector<double>& gamma, const std::vector<double>& T, const YawParams& params);

/// Uniform yaw knot durations covering `total` seconds.
std::vector<double> yaw_knot_durations(double total, double spacing);

/// Text rows "t x y z yaw" at the given rate.
std::string export_trajectory(const PiecewisePoly& position, const PiecewisePoly& yaw, double rate_hz, double t_offset = 0.0);

}  // namespace explore
