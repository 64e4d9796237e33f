#include <explore/traj_opt.hpp>

#include <cstdio>

namespace explore {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

double PiecewisePoly::duration() const {
  double s = 0.0;
  for (double t : T) s += t;
  return s;
}

std::vector<double> PiecewisePoly::knot_times() const {
  std::vector<double> out{0.0};
  for (double t : T) out.push_back(out.back() + t);
  return out;
}

Eigen::VectorXd PiecewisePoly::eval_local(int seg, double t, int deriv) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
  for (int k = deriv; k < 6; ++k) {
    double f = 1.0;
    for (int j = 0; j < deriv; ++j) f *= double(k - j);
    out += f * std::pow(t, k - deriv) * C[size_t(seg)].row(k).transpose();
  }
  return out;
}

Eigen::VectorXd PiecewisePoly::eval(double t, int deriv) const {
  if (T.empty()) return Eigen::VectorXd::Zero(dim);
  t = std::clamp(t, 0.0, duration());
  for (int i = 0; i < segments(); ++i) {
    if (t <= T[size_t(i)] || i + 1 == segments()) return eval_local(i, std::min(t, T[size_t(i)]), deriv);
    t -= T[size_t(i)];
  }
  return Eigen::VectorXd::Zero(dim);
}

PiecewisePoly PiecewisePoly::scaled(double s) const {
  PiecewisePoly out = *this;
  for (size_t i = 0; i < T.size(); ++i) {
    out.T[i] = T[i] * s;
    for (int k = 0; k < 6; ++k) out.C[i].row(k) /= std::pow(s, k);
  }
  return out;
}

double PiecewisePoly::knot_residual() const {
  double worst = 0.0;
  for (int i = 1; i < segments(); ++i)
    for (int d = 0; d <= 2; ++d)
      worst = std::max(worst, (eval_local(i - 1, T[size_t(i - 1)], d) - eval_local(i, 0.0, d)).cwiseAbs().maxCoeff());
  return worst;
}

Vec6 quintic_from_boundary(const Vec6& x, double T) {
  const double p0 = x[0], v0 = x[1], a0 = x[2], p1 = x[3], v1 = x[4], a1 = x[5];
  const double T2 = T * T, T3 = T2 * T, T4 = T3 * T, T5 = T4 * T;
  Vec6 c;
  c[0] = p0;
  c[1] = v0;
  c[2] = 0.5 * a0;
  c[3] = (20 * (p1 - p0) - (8 * v1 + 12 * v0) * T - (3 * a0 - a1) * T2) / (2 * T3);
  c[4] = (30 * (p0 - p1) + (14 * v1 + 16 * v0) * T + (3 * a0 - 2 * a1) * T2) / (2 * T4);
  c[5] = (12 * (p1 - p0) - 6 * (v1 + v0) * T - (a0 - a1) * T2) / (2 * T5);
  return c;
}

Mat6 segment_jerk_matrix(double T) {
  Mat6 M;
  for (int j = 0; j < 6; ++j) M.col(j) = quintic_from_boundary(Vec6::Unit(j), T);
  Mat6 H = Mat6::Zero();
  const double k[6] = {0, 0, 0, 6, 24, 60};
  for (int i = 3; i < 6; ++i)
    for (int j = 3; j < 6; ++j) {
      const int e = i + j - 5;
      H(i, j) = k[i] * k[j] * std::pow(T, e) / e;
    }
  return M.transpose() * H * M;
}

namespace {

Eigen::MatrixXd global_jerk_matrix(const std::vector<double>& T) {
  const int M = int(T.size());
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(3 * (M + 1), 3 * (M + 1));
  for (int i = 0; i < M; ++i) Q.block<6, 6>(3 * i, 3 * i) += segment_jerk_matrix(T[size_t(i)]);
  return Q;
}

}  // namespace

PiecewisePoly solve_min_jerk(const Eigen::MatrixXd& points, const std::vector<double>& T, const Eigen::MatrixXd& start_va,
                             const Eigen::MatrixXd& end_va) {
  const int M = int(T.size());
  const int dim = int(points.cols());
  if (points.rows() != M + 1) throw ConfigError("min-jerk: need M+1 points for M durations");
  for (double t : T)
    if (!(t > 0)) throw ConfigError("min-jerk: durations must be positive");
  const int n = 3 * (M + 1);
  std::vector<int> fr, kn;
  for (int i = 0; i < n; ++i) {
    const int knot = i / 3, comp = i % 3;
    const bool free_var = comp != 0 && knot > 0 && knot < M;
    (free_var ? fr : kn).push_back(i);
  }
  const Eigen::MatrixXd Q = global_jerk_matrix(T);
  Eigen::MatrixXd X(n, dim);
  for (int d = 0; d < dim; ++d) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= M; ++i) x[3 * i] = points(i, d);
    x[1] = start_va(0, d);
    x[2] = start_va(1, d);
    x[3 * M + 1] = end_va(0, d);
    x[3 * M + 2] = end_va(1, d);
    if (!fr.empty()) {
      Eigen::MatrixXd Qff(fr.size(), fr.size()), Qfk(fr.size(), kn.size());
      Eigen::VectorXd xk(kn.size());
      for (size_t a = 0; a < fr.size(); ++a) {
        for (size_t b = 0; b < fr.size(); ++b) Qff(a, b) = Q(fr[a], fr[b]);
        for (size_t b = 0; b < kn.size(); ++b) Qfk(a, b) = Q(fr[a], kn[b]);
      }
      for (size_t b = 0; b < kn.size(); ++b) xk[b] = x[kn[b]];
      const Eigen::VectorXd xf = Qff.ldlt().solve(-Qfk * xk);
      for (size_t a = 0; a < fr.size(); ++a) x[fr[a]] = xf[a];
    }
    X.col(d) = x;
  }
  PiecewisePoly out;
  out.dim = dim;
  out.T = T;
  for (int i = 0; i < M; ++i) {
    Eigen::MatrixXd C(6, dim);
    for (int d = 0; d < dim; ++d) C.col(d) = quintic_from_boundary(X.col(d).segment<6>(3 * i), T[size_t(i)]);
    out.C.push_back(C);
  }
  return out;
}

Eigen::MatrixXd min_jerk_schur(const std::vector<double>& T) {
  const int M = int(T.size());
  const Eigen::MatrixXd Q = global_jerk_matrix(T);
  std::vector<int> p, f;
  for (int i = 0; i <= M; ++i) p.push_back(3 * i);
  for (int i = 1; i < M; ++i) {
    f.push_back(3 * i + 1);
    f.push_back(3 * i + 2);
  }
  Eigen::MatrixXd Qpp(p.size(), p.size());
  for (size_t a = 0; a < p.size(); ++a)
    for (size_t b = 0; b < p.size(); ++b) Qpp(a, b) = Q(p[a], p[b]);
  if (f.empty()) return Qpp;
  Eigen::MatrixXd Qff(f.size(), f.size()), Qfp(f.size(), p.size());
  for (size_t a = 0; a < f.size(); ++a) {
    for (size_t b = 0; b < f.size(); ++b) Qff(a, b) = Q(f[a], f[b]);
    for (size_t b = 0; b < p.size(); ++b) Qfp(a, b) = Q(f[a], p[b]);
  }
  Eigen::MatrixXd S = Qpp - Qfp.transpose() * Qff.ldlt().solve(Qfp);
  return 0.5 * (S + S.transpose());
}

double trapezoid_time(double L, double v, double a) {
  if (L <= 0) return 0.0;
  if (L >= v * v / a) return L / v + v / a;
  return 2.0 * std::sqrt(L / a);
}

void Limits::validate() const {
  if (!(max_velocity > 0) || !(max_acceleration > 0)) throw ConfigError("velocity and acceleration limits must be positive");
}

// ---- position planning -------------------------------------------------------

namespace {

bool point_clear(const VoxelMap& map, const Vec3& p, double r) {
  const double res = map.resolution();
  const Vec3 u = (p - map.origin()) / res;
  const double rv = r / res;
  const Vec3i lo(int(std::floor(u.x() - rv)), int(std::floor(u.y() - rv)), int(std::floor(u.z() - rv)));
  const Vec3i hi(int(std::floor(u.x() + rv)), int(std::floor(u.y() + rv)), int(std::floor(u.z() + rv)));
  for (int z = lo.z(); z <= hi.z(); ++z)
    for (int y = lo.y(); y <= hi.y(); ++y)
      for (int x = lo.x(); x <= hi.x(); ++x) {
        const Vec3i v(x, y, z);
        if (map.is_free(v)) continue;
        const Vec3 lo_c = v.cast<double>();
        const Vec3 d = (lo_c - u).cwiseMax(u - (lo_c + Vec3::Ones())).cwiseMax(Vec3::Zero());
        if (d.norm() < rv) return false;
      }
  return true;
}

bool los(const VoxelMap& map, const Vec3& a, const Vec3& b, double r) {
  const int n = std::max(1, int(std::ceil((b - a).norm() / (0.25 * map.resolution()))));
  for (int i = 0; i <= n; ++i)
    if (!point_clear(map, a + (b - a) * (double(i) / n), r)) return false;
  return true;
}

bool box_safe(const SafetyGrid& safety, const Aabb& b) {
  for (int z = b.min.z(); z <= b.max.z(); ++z)
    for (int y = b.min.y(); y <= b.max.y(); ++y)
      for (int x = b.min.x(); x <= b.max.x(); ++x)
        if (!safety.safe(Vec3i(x, y, z))) return false;
  return true;
}

Aabb grow(const SafetyGrid& safety, Aabb b, int max_grow) {
  for (int a = 0; a < 3; ++a)
    for (int dir : {-1, 1})
      for (int k = 0; k < max_grow; ++k) {
        Aabb slab = b;
        if (dir < 0) {
          slab.min[a] = b.min[a] - 1;
          slab.max[a] = b.min[a] - 1;
        } else {
          slab.min[a] = b.max[a] + 1;
          slab.max[a] = b.max[a] + 1;
        }
        if (!box_safe(safety, slab)) break;
        if (dir < 0) {
          b.min[a] -= 1;
        } else {
          b.max[a] += 1;
        }
      }
  return b;
}

void segment_boxes(const VoxelMap& map, const SafetyGrid& safety, const Vec3& a, const Vec3& b, int depth,
                   std::vector<Aabb>& out) {
  Aabb box;
  box.extend(map.to_index(a));
  box.extend(map.to_index(b));
  if (box_safe(safety, box)) {
    out.push_back(grow(safety, box, 5));
    return;
  }
  if (depth < 6 && (b - a).norm() > 1.5 * map.resolution()) {
    const Vec3 m = 0.5 * (a + b);
    segment_boxes(map, safety, a, m, depth + 1, out);
    segment_boxes(map, safety, m, b, depth + 1, out);
    return;
  }
  // the segment lies in the union of the voxel cubes it walks through
  for (const auto& v : traverse(map, a, b)) out.push_back(Aabb::of(v, v));
}

std::vector<Aabb> corridor_for(const VoxelMap& map, const SafetyGrid& safety, const std::vector<Vec3>& wp) {
  std::vector<Aabb> out;
  for (size_t i = 0; i + 1 < wp.size(); ++i) segment_boxes(map, safety, wp[i], wp[i + 1], 0, out);
  if (wp.size() == 1) out.push_back(Aabb::of(map.to_index(wp[0]), map.to_index(wp[0])));
  return out;
}

std::vector<double> allocate(const std::vector<Vec3>& wp, const Limits& L) {
  std::vector<double> T;
  for (size_t i = 0; i + 1 < wp.size(); ++i)
    T.push_back(std::max(0.05, trapezoid_time((wp[i + 1] - wp[i]).norm(), L.max_velocity, L.max_acceleration)));
  return T;
}

Eigen::MatrixXd stack(const std::vector<Vec3>& wp) {
  Eigen::MatrixXd P(wp.size(), 3);
  for (size_t i = 0; i < wp.size(); ++i) P.row(Eigen::Index(i)) = wp[i].transpose();
  return P;
}

// largest sampled speed and acceleration ratios to the limits
double limit_factor(const PiecewisePoly& tr, const Limits& L, double dt) {
  double f = 0.0;
  for (double t = 0.0;; t += dt) {
    const double tt = std::min(t, tr.duration());
    f = std::max(f, tr.eval(tt, 1).norm() / L.max_velocity);
    f = std::max(f, std::sqrt(tr.eval(tt, 2).norm() / L.max_acceleration));
    if (tt >= tr.duration()) break;
  }
  return f;
}

// index of the first segment with a sample outside the corridor or too close to non-free space; -1 if none
int first_violation(const PiecewisePoly& tr, const VoxelMap& map, const std::vector<Aabb>& corridor, double r, double dt) {
  const auto knots = tr.knot_times();
  for (double t = 0.0;; t += dt) {
    const double tt = std::min(t, tr.duration());
    const Vec3 p = tr.eval(tt);
    if (!in_corridor(map, corridor, p) || !point_clear(map, p, r)) {
      int seg = 0;
      while (seg + 1 < tr.segments() && tt > knots[size_t(seg + 1)]) ++seg;
      return seg;
    }
    if (tt >= tr.duration()) break;
  }
  return -1;
}

PiecewisePoly fit(const std::vector<Vec3>& wp, const StartState& s, const Limits& L, double dt) {
  std::vector<double> T = allocate(wp, L);
  Eigen::MatrixXd sva(2, 3), eva = Eigen::MatrixXd::Zero(2, 3);
  sva.row(0) = s.v.transpose();
  sva.row(1) = s.a.transpose();
  const bool rest = s.v.norm() < 1e-12 && s.a.norm() < 1e-12;
  PiecewisePoly tr = solve_min_jerk(stack(wp), T, sva, eva);
  // stretching time cannot fix a start state that already exceeds the limits
  const double f0 = std::max(s.v.norm() / L.max_velocity, std::sqrt(s.a.norm() / L.max_acceleration));
  const double target = std::max(1.0, f0);
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 40; ++it) {
    const double f = limit_factor(tr, L, dt);
    if (f <= target + 1e-9 || f > prev * (1.0 - 1e-3)) break;
    prev = f;
    if (rest) {
      tr = tr.scaled(f * 1.0001);
    } else {
      for (double& t : T) t *= std::min(f, 1.5) * 1.0001;
      tr = solve_min_jerk(stack(wp), T, sva, eva);
    }
  }
  return tr;
}

}  // namespace

bool in_corridor(const VoxelMap& map, const std::vector<Aabb>& corridor, const Vec3& p) {
  const Vec3 u = (p - map.origin()) / map.resolution();
  constexpr double tol = 1e-9;
  for (const auto& b : corridor)
    if ((u.array() >= b.min.cast<double>().array() - tol).all() &&
        (u.array() <= b.max.cast<double>().array() + 1.0 + tol).all())
      return true;
  return false;
}

PositionPlan plan_position(const StartState& start, const Vec3& goal, const VoxelMap& map, const SafetyGrid& safety,
                           const Limits& limits, const PositionPlanParams& P) {
  limits.validate();
  const double r = safety.params().robot_radius;
  const Vec3i ss = map.to_index(start.p), gs = map.to_index(goal);
  if (!map.in_map(ss) || !safety.safe(gs)) throw RuntimeFailure("unreachable goal");
  const bool at_rest = start.v.norm() < 1e-9 && start.a.norm() < 1e-9;
  PositionPlan plan;
  if ((goal - start.p).norm() < 1e-9 && at_rest) {
    plan.waypoints = {start.p, goal};
    plan.corridor = {Aabb::of(ss, ss)};
    plan.traj.dim = 3;
    plan.traj.T = {0.1};
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(6, 3);
    C.row(0) = start.p.transpose();
    plan.traj.C = {C};
    return plan;
  }
  const auto path = astar(map, safety, ss, gs);
  if (path.empty()) throw RuntimeFailure("unreachable goal");

  std::vector<Vec3> pts{start.p};
  for (size_t i = 1; i + 1 < path.size(); ++i) pts.push_back(map.center(path[i]));
  pts.push_back(goal);

  const double r_los = r + P.los_margin;
  std::vector<Vec3> wp{pts[0]};
  for (size_t i = 0; i + 1 < pts.size();) {
    size_t j = i + 1;
    while (j + 1 < pts.size() && los(map, pts[i], pts[j + 1], r_los)) ++j;
    wp.push_back(pts[j]);
    i = j;
  }
  // the start may sit slightly closer to obstacles than r
  const double r_check = std::min(r, map_clearance(map, start.p, r)) - 1e-9;

  for (int round = 0; round <= P.max_split_rounds; ++round) {
    plan.corridor = corridor_for(map, safety, wp);
    plan.traj = fit(wp, start, limits, P.check_dt);
    const int bad = first_violation(plan.traj, map, plan.corridor, r_check, P.check_dt);
    if (bad < 0) {
      plan.waypoints = wp;
      return plan;
    }
    wp.insert(wp.begin() + bad + 1, 0.5 * (wp[size_t(bad)] + wp[size_t(bad) + 1]));
  }

  // Stop at every waypoint: each segment is then a straight line.
  plan.corridor = corridor_for(map, safety, wp);
  PiecewisePoly tr;
  tr.dim = 3;
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 3);
  for (size_t i = 0; i + 1 < wp.size(); ++i) {
    const std::vector<Vec3> two{wp[i], wp[i + 1]};
    const double T = std::max(0.05, trapezoid_time((wp[i + 1] - wp[i]).norm(), limits.max_velocity, limits.max_acceleration));
    PiecewisePoly s = solve_min_jerk(stack(two), {T}, zero, zero);
    const double f = limit_factor(s, limits, P.check_dt);
    if (f > 1.0) s = s.scaled(f * 1.0001);
    tr.T.push_back(s.T[0]);
    tr.C.push_back(s.C[0]);
  }
  if (first_violation(tr, map, plan.corridor, r_check, P.check_dt) >= 0) throw RuntimeFailure("corridor failure");
  plan.traj = tr;
  plan.waypoints = wp;
  plan.rest_to_rest = true;
  return plan;
}

// ---- yaw -------------------------------------------------------------------

void YawParams::validate() const {
  if (beta_psi < 0 || beta_s < 0 || beta_u < 0 || rho_p < 0 || rho_v < 0 || rho_a < 0)
    throw ConfigError("yaw weights must be nonnegative");
  if (!(v_max > 0) || !(a_max > 0)) throw ConfigError("yaw rate limits must be positive");
  if (samples < 1 || bins < 1) throw ConfigError("yaw samples and bins must be positive");
  if (!(knot_spacing > 0)) throw ConfigError("yaw knot spacing must be positive");
}

double yaw_primitive(double a, double b, double T, double t) {
  const double s = std::clamp(t / T, 0.0, 1.0);
  return a + (b - a) * s * s * (3.0 - 2.0 * s);
}

double yaw_smoothness(double delta, double T, double beta_psi) { return beta_psi * 12.0 * delta * delta / (T * T * T); }

namespace {

double segment_cost(const YawSearchProblem& prob, const YawParams& P, int seg, double a, double b) {
  const double T = prob.T[size_t(seg)];
  double reward = 0.0;
  if (prob.reward)
    for (int k = 0; k < P.samples; ++k) {
      const double t = (k + 0.5) * T / P.samples;
      reward += prob.reward(seg, k, yaw_primitive(a, b, T, t));
    }
  return yaw_smoothness(b - a, T, P.beta_psi) - T / P.samples * reward;
}

}  // namespace

double yaw_sequence_cost(const YawSearchProblem& prob, const YawParams& P, const std::vector<double>& psi) {
  if (psi.size() != prob.T.size() + 1) throw ConfigError("yaw sequence length must be M+1");
  double c = 0.0;
  for (size_t i = 0; i + 1 < psi.size(); ++i)
    c += segment_cost(prob, P, int(i), psi[i], psi[i] + wrap_angle(psi[i + 1] - psi[i]));
  return c;
}

std::vector<double> yaw_bins(double psi0, int K) {
  std::vector<double> b;
  for (int k = 0; k < K; ++k) b.push_back(psi0 + 2.0 * kPi * k / K);
  return b;
}

YawSearchResult search_yaw(const YawSearchProblem& prob, const YawParams& P) {
  P.validate();
  const int M = int(prob.T.size());
  YawSearchResult res;
  res.gamma = {prob.psi0};
  if (M == 0) return res;
  const int K = P.bins;
  const auto bins = yaw_bins(prob.psi0, K);
  auto edge = [&](int seg, double a, double b) { return segment_cost(prob, P, seg, a, a + wrap_angle(b - a)); };
  const int free_knots = prob.psi_end ? M - 1 : M;
  std::vector<std::vector<double>> cost(size_t(free_knots + 1), std::vector<double>(size_t(K), 0.0));
  std::vector<std::vector<int>> from(size_t(free_knots + 1), std::vector<int>(size_t(K), -1));
  for (int j = 1; j <= free_knots; ++j)
    for (int k = 0; k < K; ++k) {
      if (j == 1) {
        cost[1][size_t(k)] = edge(0, prob.psi0, bins[size_t(k)]);
        continue;
      }
      double best = std::numeric_limits<double>::infinity();
      int arg = -1;
      for (int l = 0; l < K; ++l) {
        const double c = cost[size_t(j - 1)][size_t(l)] + edge(j - 1, bins[size_t(l)], bins[size_t(k)]);
        if (c < best) {
          best = c;
          arg = l;
        }
      }
      cost[size_t(j)][size_t(k)] = best;
      from[size_t(j)][size_t(k)] = arg;
    }

  std::vector<double> knot(size_t(M + 1));
  knot[0] = prob.psi0;
  if (prob.psi_end) {
    knot[size_t(M)] = *prob.psi_end;
    if (free_knots == 0) {
      res.cost = edge(0, prob.psi0, *prob.psi_end);
    } else {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int l = 0; l < K; ++l) {
        const double c = cost[size_t(free_knots)][size_t(l)] + edge(M - 1, bins[size_t(l)], *prob.psi_end);
        if (c < best) {
          best = c;
          arg = l;
        }
      }
      res.cost = best;
      for (int j = free_knots, k = arg; j >= 1; k = from[size_t(j)][size_t(k)], --j) knot[size_t(j)] = bins[size_t(k)];
    }
  } else {
    int arg = 0;
    for (int k = 1; k < K; ++k)
      if (cost[size_t(M)][size_t(k)] < cost[size_t(M)][size_t(arg)]) arg = k;
    res.cost = cost[size_t(M)][size_t(arg)];
    for (int j = M, k = arg; j >= 1; k = from[size_t(j)][size_t(k)], --j) knot[size_t(j)] = bins[size_t(k)];
  }
  res.gamma.resize(size_t(M + 1));
  for (int j = 1; j <= M; ++j) res.gamma[size_t(j)] = res.gamma[size_t(j - 1)] + wrap_angle(knot[size_t(j)] - res.gamma[size_t(j - 1)]);
  return res;
}

YawRewardTable::YawRewardTable(const std::vector<std::vector<Vec3>>& sample_positions, const VoxelMap& map,
                               const PredictionStore* store, const CameraModel& camera, std::optional<Vec3> soi,
                               const YawParams& params)
    : hfov_(camera.hfov), pos_(sample_positions), soi_(soi), params_(params) {
  const double slice_w = 2.0 * kPi / slices_;
  window_ = std::max(1, int(std::lround(camera.hfov / slice_w)));
  const int rows = std::max(1, std::min(12, camera.rows));
  const int cols = 2;
  norm_ = double(window_) * cols * rows * std::max(1.0, camera.max_range / map.resolution());
  slice_gain_.resize(pos_.size());
  for (size_t s = 0; s < pos_.size(); ++s)
    for (const auto& p : pos_[s]) {
      std::vector<double> g(static_cast<size_t>(slices_), 0.0);
      if (params.beta_u > 0)
        for (int i = 0; i < slices_; ++i)
          for (int c = 0; c < cols; ++c) {
            const double az = (i + (c + 0.5) / cols) * slice_w;
            for (int r = 0; r < rows; ++r) {
              const double el = -0.5 * camera.vfov + (r + 0.5) * camera.vfov / rows;
              g[size_t(i)] += predicted_gain_ray(map, store, p, ray_end(p, az, el, camera.max_range));
            }
          }
      slice_gain_[s].push_back(std::move(g));
    }
}

double YawRewardTable::g_e(int seg, int k, double psi) const {
  const double slice_w = 2.0 * kPi / slices_;
  double a = std::fmod(psi - 0.5 * hfov_, 2.0 * kPi);
  if (a < 0) a += 2.0 * kPi;
  const int s0 = int(std::lround(a / slice_w)) % slices_;
  const auto& g = slice_gain_[size_t(seg)][size_t(k)];
  double sum = 0.0;
  for (int i = 0; i < window_; ++i) sum += g[size_t((s0 + i) % slices_)];
  return sum / norm_;
}

double YawRewardTable::f_s(int seg, int k, double psi) const {
  if (!soi_) return 0.0;
  const Vec3& p = pos_[size_t(seg)][size_t(k)];
  const double bearing = std::atan2(soi_->y() - p.y(), soi_->x() - p.x());
  return std::max(0.0, 0.5 * hfov_ - angle_dist(psi, bearing));
}

double YawRewardTable::operator()(int seg, int k, double psi) const {
  return params_.beta_s * f_s(seg, k, psi) + params_.beta_u * g_e(seg, k, psi);
}

YawObjective::YawObjective(std::vector<double> gamma, std::vector<double> T, const YawParams& params)
    : gamma_(std::move(gamma)), T_(std::move(T)), p_(params) {
  if (gamma_.size() != T_.size() + 1 || T_.empty()) throw ConfigError("yaw objective: need M >= 1 segments and M+1 yaws");
  S_ = min_jerk_schur(T_);
}

Eigen::VectorXd YawObjective::full(const Eigen::VectorXd& psi_int) const {
  const int M = int(T_.size());
  Eigen::VectorXd psi(M + 1);
  psi[0] = gamma_.front();
  psi[M] = gamma_.back();
  for (int i = 1; i < M; ++i) psi[i] = psi_int[i - 1];
  return psi;
}

double YawObjective::value(const Eigen::VectorXd& psi_int, Eigen::VectorXd* grad) const {
  const int M = int(T_.size());
  const Eigen::VectorXd psi = full(psi_int);
  const Eigen::VectorXd Sp = S_ * psi;
  double J = psi.dot(Sp);
  Eigen::VectorXd g = 2.0 * Sp;  // over all knots; boundary entries dropped below
  for (int i = 1; i < M; ++i) {
    const double d = psi[i] - gamma_[size_t(i)];
    J += p_.rho_p * d * d;
    g[i] += 2.0 * p_.rho_p * d;

    const double Tl = T_[size_t(i - 1)], Tr = T_[size_t(i)];
    const double vel = (psi[i + 1] - psi[i - 1]) / (Tl + Tr);
    const double ev = std::abs(vel) - p_.v_max;
    if (ev > 0) {
      J += p_.rho_v * ev * ev * ev;
      const double dv = 3.0 * p_.rho_v * ev * ev * (vel > 0 ? 1.0 : -1.0) / (Tl + Tr);
      g[i + 1] += dv;
      g[i - 1] -= dv;
    }
    const double h = 0.5 * (Tl + Tr);
    const double acc = ((psi[i + 1] - psi[i]) / Tr - (psi[i] - psi[i - 1]) / Tl) / h;
    const double ea = std::abs(acc) - p_.a_max;
    if (ea > 0) {
      J += p_.rho_a * ea * ea * ea;
      const double da = 3.0 * p_.rho_a * ea * ea * (acc > 0 ? 1.0 : -1.0) / h;
      g[i + 1] += da / Tr;
      g[i] -= da * (1.0 / Tr + 1.0 / Tl);
      g[i - 1] += da / Tl;
    }
  }
  if (!std::isfinite(J)) throw RuntimeFailure("yaw objective is not finite");
  if (grad) *grad = g.segment(1, std::max(0, M - 1));
  return J;
}

YawPlan optimize_yaw(const std::vector<double>& gamma, const std::vector<double>& T, const YawParams& params) {
  params.validate();
  YawObjective obj(gamma, T, params);
  const int n = obj.interior();
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = gamma[size_t(i + 1)];
  YawPlan plan;
  plan.gamma = gamma;
  Eigen::VectorXd g;
  double f = obj.value(x, &g);
  plan.cost_reference = f;
  if (n > 0) {
    double step = 1.0 / std::max(1.0, g.cwiseAbs().maxCoeff());
    Eigen::VectorXd x_prev, g_prev;
    int it = 0;
    for (; it < 500; ++it) {
      if (g.norm() < 1e-6) break;
      if (it > 0) {
        const Eigen::VectorXd s = x - x_prev, y = g - g_prev;
        const double sy = s.dot(y);
        if (sy > 1e-300) step = std::clamp(s.dot(s) / sy, 1e-12, 1e6);
      }
      double a = step;
      Eigen::VectorXd xn, gn;
      double fn = 0.0;
      bool accepted = false;
      for (int k = 0; k < 60; ++k) {
        xn = x - a * g;
        fn = obj.value(xn, &gn);
        if (fn <= f - 1e-4 * a * g.squaredNorm()) {
          accepted = true;
          break;
        }
        a *= 0.5;
      }
      if (!accepted) break;
      x_prev = x;
      g_prev = g;
      x = xn;
      g = gn;
      f = fn;
    }
    plan.iterations = it;
  }
  plan.cost = f;
  const Eigen::VectorXd psi = obj.full(x);
  plan.psi.assign(psi.data(), psi.data() + psi.size());
  Eigen::MatrixXd P(psi.size(), 1);
  P.col(0) = psi;
  plan.traj = solve_min_jerk(P, T, Eigen::MatrixXd::Zero(2, 1), Eigen::MatrixXd::Zero(2, 1));
  return plan;
}

std::vector<double> yaw_knot_durations(double total, double spacing) {
  const int m = std::max(1, int(std::ceil(total / spacing - 1e-9)));
  return std::vector<double>(static_cast<size_t>(m), total / m);
}

std::string export_trajectory(const PiecewisePoly& position, const PiecewisePoly& yaw, double rate_hz, double t_offset) {
  std::string out;
  char buf[160];
  const double dur = position.duration();
  const int n = int(std::floor(dur * rate_hz + 1e-9));
  for (int i = 0; i <= n; ++i) {
    const double t = i / rate_hz;
    const Eigen::VectorXd p = position.eval(t);
    const double y = yaw.dim ? wrap_angle(yaw.eval(t)[0]) : 0.0;
    std::snprintf(buf, sizeof(buf), "%.3f %.4f %.4f %.4f %.4f\n", t + t_offset, p[0], p[1], p[2], y);
    out += buf;
  }
  return out;
}

}  // namespace explore
