#include <explore/explore_runtime.hpp>

#include <chrono>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace explore {

MethodKind parse_method(const std::string& name) {
  if (name == "frontier") return MethodKind::kFrontier;
  if (name == "frontier-util" || name == "frontier_util") return MethodKind::kFrontierUtil;
  if (name == "frontier-pred" || name == "frontier_pred") return MethodKind::kFrontierPred;
  if (name == "seer") return MethodKind::kSeer;
  throw ConfigError("unknown method '" + name + "' (frontier, frontier-util, frontier-pred, seer)");
}

std::string method_name(MethodKind m) {
  switch (m) {
    case MethodKind::kFrontier: return "frontier";
    case MethodKind::kFrontierUtil: return "frontier-util";
    case MethodKind::kFrontierPred: return "frontier-pred";
    case MethodKind::kSeer: return "seer";
  }
  return "?";
}

void RunConfig::validate() const {
  if (!(dt > 0) || substeps < 1) throw ConfigError("tick and sub-steps must be positive");
  if (!(timeout_s > 0)) throw ConfigError("timeout must be positive");
  if (!(replan_period > 0)) throw ConfigError("replan period must be positive");
  limits.validate();
  camera.validate();
  sampler.validate(camera);
  behavior.validate();
  yaw.validate();
}

namespace {

class Runner {
 public:
  Runner(const World& world, MethodKind method, const PredictorKind& pk, const RunConfig& cfg, const ReplanHook& hook)
      : world_(world),
        method_(method),
        cfg_(cfg),
        hook_(hook),
        gt_(world),
        map_(make_map(world, cfg.map)),
        safety_(map_, cfg.safety),
        frontiers_(map_, cfg.frontier),
        store_(map_) {
    cfg.validate();
    if (pk.type != PredictorType::kNull) predictor_.emplace(pk);
    rep_.method = method_name(method);
    rep_.predictor = predictor_name(pk.type);
    rep_.seed = world.seed;
    rep_.run_seed = cfg.run_seed;
    pose_ = world.start;
    if (cfg.run_seed != 0) {
      std::mt19937_64 rng(cfg.run_seed);
      pose_.yaw = std::uniform_real_distribution<double>(-kPi, kPi)(rng);
    }
    rep_.min_clearance = world.clearance(pose_.p);
  }

  ExperimentReport run() {
    bootstrap();
    using clock = std::chrono::steady_clock;
    double cycle_sum = 0.0;
    int cycles = 0;
    while (!finished_) {
      const auto c0 = clock::now();
      tick();
      const double ms = std::chrono::duration<double, std::milli>(clock::now() - c0).count();
      cycle_sum += ms;
      rep_.max_cycle_ms = std::max(rep_.max_cycle_ms, ms);
      ++cycles;
    }
    rep_.mean_cycle_ms = cycles ? cycle_sum / cycles : 0.0;
    rep_.end_time_s = t_;
    rep_.total_path_m = path_;
    rep_.final_coverage = coverage_;
    if (!reached_) {
      rep_.time_s = t_;
      rep_.path_m = path_;
    }
    rep_.success = !rep_.collision && reached_;
    return rep_;
  }

 private:
  void event(const std::string& what) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "t=%.1f ", t_);
    rep_.events.push_back(buf + what);
  }

  void finish(const std::string& reason) {
    finished_ = true;
    rep_.reason = reason;
    event("finish reason=" + reason);
  }

  bool uses_prediction() const { return method_ == MethodKind::kFrontierPred || method_ == MethodKind::kSeer; }
  const PredictionStore* gain_store() const { return uses_prediction() && predictor_ ? &store_ : nullptr; }

  void bootstrap() {
    // the robot knows the space its own body occupies
    const double r = cfg_.bootstrap_radius;
    Aabb changed;
    const Vec3i lo = map_.to_index(pose_.p - Vec3::Constant(r)), hi = map_.to_index(pose_.p + Vec3::Constant(r));
    for (int z = lo.z(); z <= hi.z(); ++z)
      for (int y = lo.y(); y <= hi.y(); ++y)
        for (int x = lo.x(); x <= hi.x(); ++x) {
          const Vec3i v(x, y, z);
          if (!map_.in_map(v) || (map_.center(v) - pose_.p).norm() > r || gt_.at(v) != kFree) continue;
          map_.set_logodds(v, cfg_.map.clamp_min);
          changed.extend(v);
        }
    pending_changed_ = changed;
  }

  void tick() {
    // sense and map
    const auto rays = render_depth(world_, pose_, cfg_.camera);
    Aabb changed = map_.integrate_scan(pose_.p, rays);
    changed.extend(pending_changed_);
    pending_changed_ = Aabb{};
    const auto tracked = snapshot_tracked();
    const FrontierUpdate fu = frontiers_.update(map_, changed);
    remap_tracked(tracked, fu);
    safety_.update(map_, changed);

    coverage_ = coverage(map_, gt_);
    rep_.curve.push_back({t_, coverage_});
    if (!reached_ && coverage_ >= cfg_.success_coverage) {
      reached_ = true;
      rep_.time_s = t_;
      rep_.path_m = path_;
      event("coverage_reached");
    }
    if (coverage_ >= cfg_.stop_coverage) return finish("coverage");
    if (t_ >= cfg_.timeout_s) return finish("timeout");

    if (method_ == MethodKind::kSeer) update_semantics(fu);
    if (predictor_) update_predictions(fu);

    std::string reason;
    if (moving_ && t_ - traj_t0_ >= motion_duration_ - 1e-9) {
      moving_ = false;
      reason = "reached";
      have_goal_ = false;
    } else if (moving_ && goal_invalid()) {
      reason = "invalidated";
    } else if (moving_ && t_ - last_replan_ >= cfg_.replan_period - 1e-9) {
      reason = "period";
    } else if (!moving_ && t_ - last_replan_ >= 0.5 - 1e-9) {
      reason = "idle";
    } else if (!have_goal_ && last_replan_ < -1.0) {
      reason = "start";
    }
    if (!reason.empty()) replan(reason);
    if (finished_) return;

    advance();
    if (!finished_) t_ = std::round((t_ + cfg_.dt) * 1e6) / 1e6;
  }

  // Cluster ids change whenever the map touches a cluster. The goal cluster
  // and deferred clusters follow their cells to the re-extracted clusters.
  std::map<int, std::vector<size_t>> snapshot_tracked() const {
    std::map<int, std::vector<size_t>> out;
    auto take = [&](int id) {
      if (const FrontierCluster* cl = frontiers_.find(id)) {
        auto& v = out[id];
        for (const auto& c : cl->cells) v.push_back(map_.linear(c));
        std::sort(v.begin(), v.end());
      }
    };
    if (have_goal_ && goal_.kind == GoalKind::kCluster) take(goal_.cluster_id);
    for (const auto& [id, until] : deferred_clusters_)
      if (until > t_) take(id);
    return out;
  }

  void remap_tracked(const std::map<int, std::vector<size_t>>& tracked, const FrontierUpdate& fu) {
    std::map<int, double> deferred;
    for (const auto& [id, until] : deferred_clusters_)
      if (until > t_ && frontiers_.find(id)) deferred[id] = until;
    for (const auto& [old_id, cells] : tracked) {
      if (frontiers_.find(old_id)) continue;
      int best = -1;
      size_t best_n = 0;
      for (int nid : fu.added) {
        const FrontierCluster* cl = frontiers_.find(nid);
        if (!cl) continue;
        size_t n = 0;
        for (const auto& c : cl->cells) n += std::binary_search(cells.begin(), cells.end(), map_.linear(c));
        if (n > best_n) {
          best_n = n;
          best = nid;
        }
        auto it = deferred_clusters_.find(old_id);
        if (n > 0 && it != deferred_clusters_.end() && it->second > t_)
          deferred[nid] = std::max(deferred[nid], it->second);
      }
      if (have_goal_ && goal_.kind == GoalKind::kCluster && goal_.cluster_id == old_id && best >= 0)
        goal_.cluster_id = best;
    }
    deferred_clusters_ = std::move(deferred);
  }

  bool goal_invalid() const {
    if (!have_goal_) return false;
    if (goal_.kind == GoalKind::kCluster) return frontiers_.find(goal_.cluster_id) == nullptr;
    if (goal_.soi_id >= 0) {
      const SemanticObject* o = sois_.find(goal_.soi_id);
      return !o || o->status == SoiStatus::kRejected;
    }
    return false;
  }

  void update_semantics(const FrontierUpdate& fu) {
    for (int id : sois_.recheck(map_, cfg_.doors)) event("soi_removed id=" + std::to_string(id));
    for (int cid : fu.added) {
      const FrontierCluster* cl = frontiers_.find(cid);
      if (!cl) continue;
      for (int id : sois_.add(detect_doors(map_, *cl, cfg_.doors), cfg_.doors)) {
        const SemanticObject* o = sois_.find(id);
        char buf[128];
        std::snprintf(buf, sizeof(buf), "soi_detected id=%d p=(%.2f,%.2f) width=%.2f", id, o->p.x(), o->p.y(), o->width);
        event(buf);
      }
    }
  }

  void update_predictions(const FrontierUpdate& fu) {
    for (int cid : fu.added) {
      const FrontierCluster* cl = frontiers_.find(cid);
      if (!cl) continue;
      bool fresh = false;
      for (const auto& b : blocks_)
        if ((b.first - cl->centroid).head<2>().norm() < cfg_.predict_refresh_distance &&
            t_ - b.second < cfg_.predict_refresh_age)
          fresh = true;
      if (fresh) continue;
      const OccupancyBlock input = map_.extract_block(cl->centroid);
      PredictedBlock pred;
      if (predictor_->needs_context()) {
        const OccupancyBlock ctx = ground_truth_block(gt_, input.origin, input.dims);
        pred = predictor_->predict(input, &ctx);
      } else {
        pred = predictor_->predict(input);
      }
      pred.origin = input.origin;
      store_.insert(pred);
      blocks_.emplace_back(cl->centroid, t_);
    }
  }

  struct Option {
    ClusterOption opt;
    double len = 0.0;
  };

  std::vector<Option> cluster_options(const DistanceField& field, const std::vector<uint8_t>* room_mask) {
    std::vector<Option> out;
    for (auto& [id, cl] : frontiers_.clusters()) {
      if (deferred_clusters_.count(id) || cl.viewpoints.empty()) continue;
      Option o;
      o.opt.id = id;
      if (method_ == MethodKind::kFrontier) {
        // nearest viewpoint by path length
        double best = std::numeric_limits<double>::infinity();
        for (const auto& vp : cl.viewpoints) {
          const double len = field.at(map_.to_index(vp.p));
          if (len < best) {
            best = len;
            o.opt.best = vp;
          }
        }
        if (!std::isfinite(best)) continue;
        o.len = best;
        o.opt.utility = -best;
      } else {
        try {
          const UtilityResult u = utility(cl, map_, field, cfg_.behavior);
          o.opt.utility = u.value;
          o.opt.best = u.best;
          o.len = u.path_length;
        } catch (const RuntimeFailure&) {
          continue;
        }
      }
      if (method_ == MethodKind::kSeer)
        o.opt.label = room_mask ? classify_frontier(cl, bgsm_.mode, *room_mask, map_) : FrontierLabel::kCorridor;
      cl.label = o.opt.label;
      out.push_back(o);
    }
    return out;
  }

  NavGoal choose(const std::vector<Option>& options) {
    std::vector<ClusterOption> opts;
    for (const auto& o : options) opts.push_back(o.opt);
    if (method_ != MethodKind::kSeer) {
      NavGoal g;
      if (auto best = best_option(opts, std::nullopt)) {
        g.kind = GoalKind::kCluster;
        g.cluster_id = best->id;
        g.pose = {best->best.p, best->best.yaw};
        g.utility = best->utility;
      }
      return g;
    }
    BgsmInputs in;
    in.clusters = opts;
    in.robot = pose_;
    for (const auto& o : sois_.objects()) {
      auto it = deferred_sois_.find(o.id);
      if (it != deferred_sois_.end() && t_ < it->second) continue;
      in.sois.push_back(o);
    }
    for (int k = 0; k < 4; ++k) {
      if (bgsm_.mode == BgsmMode::kConfirmSoi && bgsm_.active_soi) {
        const SoiStatus st = sois_.confirm(*bgsm_.active_soi, pose_, cfg_.camera, map_, cfg_.doors);
        event(std::string("soi_") + status_name(st) + " id=" + std::to_string(*bgsm_.active_soi));
        for (auto& o : in.sois)
          if (o.id == *bgsm_.active_soi) o = *sois_.find(o.id);
      }
      const auto [next, g] = step_bgsm(bgsm_, in, cfg_.behavior);
      if (next.mode != bgsm_.mode) event(std::string("mode ") + mode_name(bgsm_.mode) + " -> " + mode_name(next.mode));
      const bool again = next.mode == BgsmMode::kConfirmSoi && bgsm_.mode != BgsmMode::kConfirmSoi;
      bgsm_ = next;
      if (!again) return g;
    }
    return NavGoal{};
  }

  void defer(const NavGoal& g, const std::string& why) {
    if (g.kind == GoalKind::kCluster) {
      deferred_clusters_[g.cluster_id] = t_ + cfg_.cluster_defer_s;
      event("defer cluster=" + std::to_string(g.cluster_id) + " cause=" + why);
    } else if (g.soi_id >= 0) {
      deferred_sois_[g.soi_id] = t_ + cfg_.soi_defer_s;
      event("defer soi=" + std::to_string(g.soi_id) + " cause=" + why);
    }
  }

  static bool same_goal(const NavGoal& a, const NavGoal& b) {
    return a.kind == b.kind && a.cluster_id == b.cluster_id && a.soi_id == b.soi_id &&
           (a.pose.p - b.pose.p).norm() < 1e-9 && std::abs(a.pose.yaw - b.pose.yaw) < 1e-9;
  }

  void replan(const std::string& reason) {
    last_replan_ = t_;
    ++rep_.replans;
    const DistanceField field(map_, safety_, map_.to_index(pose_.p));
    const PredictionStore* gs = gain_store();
    for (auto& [id, cl] : frontiers_.clusters())
      cl.viewpoints = sample_viewpoints(cl, map_, gs, safety_, cfg_.camera, cfg_.sampler);

    if (hook_) {
      const ReplanContext ctx{t_, world_, gt_, map_, predictor_ ? &store_ : nullptr, frontiers_, cfg_.camera, cfg_.sampler};
      if (!hook_(ctx)) return finish("hook");
    }

    std::vector<uint8_t> mask;
    const bool room_mode = bgsm_.mode == BgsmMode::kEnterAoi || bgsm_.mode == BgsmMode::kExploreAoi;
    if (method_ == MethodKind::kSeer && room_mode) mask = same_room_mask(map_, pose_.p, sois_);

    for (int attempt = 0; attempt < 25; ++attempt) {
      const auto options = cluster_options(field, mask.empty() ? nullptr : &mask);
      NavGoal g = choose(options);
      if (g.kind == GoalKind::kNone) {
        if (frontiers_.clusters().empty()) return finish("done");
        if (bgsm_.mode == BgsmMode::kDone) {
          // frontiers remain but none is usable right now
          event("mode Done -> CorridorExplore");
          bgsm_ = BgsmState{};
        }
        idle("no reachable goal");
        return;
      }
      const auto snapped = safety_.nearest_safe(map_, g.pose.p, cfg_.behavior.arrival_distance);
      if (!snapped) {
        defer(g, "goal_unsafe");
        continue;
      }
      g.pose.p = map_.center(*snapped);
      if (g.kind == GoalKind::kCluster && !moving_ && arrived(pose_, g.pose, cfg_.behavior)) {
        // standing at the viewpoint already did not clear the cluster
        defer(g, "exhausted");
        continue;
      }
      if (moving_ && have_goal_ && same_goal(g, goal_)) return;
      if (plan_motion(g, reason)) return;
    }
    idle("planning attempts exhausted");
  }

  void idle(const std::string& why) {
    if (moving_) return;  // keep flying the current motion
    have_goal_ = false;
    if (idle_since_ < 0) {
      idle_since_ = t_;
      event("idle cause=" + why);
    }
    if (t_ - idle_since_ >= cfg_.stuck_s) finish("stuck");
  }

  bool plan_motion(const NavGoal& g, const std::string& reason) {
    StartState s;
    s.p = pose_.p;
    if (moving_) {
      const double lt = std::min(t_ - traj_t0_, pos_traj_.duration());
      if (lt < pos_traj_.duration()) {
        s.v = pos_traj_.eval(lt, 1);
        s.a = pos_traj_.eval(lt, 2);
      }
    }
    PositionPlan plan;
    try {
      plan = plan_position(s, g.pose.p, map_, safety_, cfg_.limits, cfg_.plan);
    } catch (const RuntimeFailure& e) {
      defer(g, e.what() == std::string("corridor failure") ? "corridor_failure" : "unreachable");
      return false;
    }
    if (plan.rest_to_rest) event("plan rest_to_rest");

    const double psi0 = pose_.yaw;
    const double dpsi = wrap_angle(g.pose.yaw - psi0);
    const double total = std::max(plan.traj.duration(), 1.5 * std::abs(dpsi) / cfg_.yaw.v_max + 0.2);
    const std::vector<double> Ty = yaw_knot_durations(total, cfg_.yaw.knot_spacing);
    std::vector<double> gamma;
    if (method_ == MethodKind::kSeer) {
      std::vector<std::vector<Vec3>> pos(Ty.size());
      double t0 = 0.0;
      for (size_t i = 0; i < Ty.size(); ++i) {
        for (int k = 0; k < cfg_.yaw.samples; ++k) pos[i].push_back(plan.traj.eval(t0 + (k + 0.5) * Ty[i] / cfg_.yaw.samples));
        t0 += Ty[i];
      }
      std::optional<Vec3> soi;
      if (g.soi_id >= 0)
        if (const SemanticObject* o = sois_.find(g.soi_id)) soi = o->p;
      const YawRewardTable table(pos, map_, gain_store(), cfg_.camera, soi, cfg_.yaw);
      YawSearchProblem prob;
      prob.psi0 = psi0;
      prob.psi_end = psi0 + dpsi;
      prob.T = Ty;
      prob.reward = [&table](int seg, int k, double psi) { return table(seg, k, psi); };
      gamma = search_yaw(prob, cfg_.yaw).gamma;
    } else {
      double acc = 0.0;
      gamma.push_back(psi0);
      for (double d : Ty) {
        acc += d;
        gamma.push_back(psi0 + dpsi * acc / total);
      }
    }
    const YawPlan yp = optimize_yaw(gamma, Ty, cfg_.yaw);

    pos_traj_ = plan.traj;
    yaw_traj_ = yp.traj;
    traj_t0_ = t_;
    motion_duration_ = total;
    moving_ = true;
    have_goal_ = true;
    goal_ = g;
    idle_since_ = -1.0;
    rep_.max_knot_residual = std::max({rep_.max_knot_residual, pos_traj_.knot_residual(), yaw_traj_.knot_residual()});
    event("replan reason=" + reason + " " + format_goal(bgsm_, g));
    return true;
  }

  void advance() {
    const double h = cfg_.dt / cfg_.substeps;
    for (int k = 1; k <= cfg_.substeps; ++k) {
      const double ts = t_ + k * h;
      if (moving_) {
        const double lt = std::min(ts - traj_t0_, motion_duration_);
        const Vec3 p = pos_traj_.eval(lt);
        path_ += (p - pose_.p).norm();
        pose_.p = p;
        pose_.yaw = wrap_angle(yaw_traj_.eval(lt)[0]);
      }
      const double c = world_.clearance(pose_.p);
      rep_.min_clearance = std::min(rep_.min_clearance, c);
      if (cfg_.record_trajectory) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%.3f %.4f %.4f %.4f %.4f\n", ts, pose_.p.x(), pose_.p.y(), pose_.p.z(), pose_.yaw);
        rep_.trajectory += buf;
      }
      if (c < cfg_.safety.robot_radius - 1e-9) {
        rep_.collision = true;
        t_ = ts;
        return finish("collision");
      }
    }
  }

  const World& world_;
  MethodKind method_;
  const RunConfig& cfg_;
  const ReplanHook& hook_;
  GroundTruth gt_;
  VoxelMap map_;
  SafetyGrid safety_;
  FrontierRegistry frontiers_;
  SemanticRegistry sois_;
  PredictionStore store_;
  std::optional<Predictor> predictor_;
  std::vector<std::pair<Vec3, double>> blocks_;

  Pose pose_;
  double t_ = 0.0, path_ = 0.0, coverage_ = 0.0;
  bool reached_ = false, finished_ = false;
  Aabb pending_changed_;

  bool moving_ = false, have_goal_ = false;
  PiecewisePoly pos_traj_, yaw_traj_;
  double traj_t0_ = 0.0, motion_duration_ = 0.0;
  NavGoal goal_;
  BgsmState bgsm_;
  std::map<int, double> deferred_clusters_;  // id -> until
  std::map<int, double> deferred_sois_;
  double last_replan_ = -1e9;
  double idle_since_ = -1.0;

  ExperimentReport rep_;
};

}  // namespace

ExperimentReport run_experiment(const World& world, MethodKind method, const PredictorKind& predictor,
                                const RunConfig& config, const ReplanHook& hook) {
  Runner r(world, method, predictor, config, hook);
  return r.run();
}

std::string format_report(const ExperimentReport& r) {
  std::ostringstream os;
  char buf[256];
  auto line = [&](const char* fmt, auto... a) {
    std::snprintf(buf, sizeof(buf), fmt, a...);
    os << buf;
  };
  line("method %s\n", r.method.c_str());
  line("predictor %s\n", r.predictor.c_str());
  line("seed %llu\n", static_cast<unsigned long long>(r.seed));
  line("run_seed %llu\n", static_cast<unsigned long long>(r.run_seed));
  line("success %d\n", int(r.success));
  line("reason %s\n", r.reason.c_str());
  line("collision %d\n", int(r.collision));
  line("time_s %.3f\n", r.time_s);
  line("path_m %.4f\n", r.path_m);
  line("end_time_s %.3f\n", r.end_time_s);
  line("total_path_m %.4f\n", r.total_path_m);
  line("final_coverage %.6f\n", r.final_coverage);
  line("min_clearance %.4f\n", r.min_clearance);
  line("max_knot_residual %.3e\n", r.max_knot_residual);
  line("replans %d\n", r.replans);
  os << "coverage_curve\n";
  for (size_t i = 0; i < r.curve.size(); i += 10) line("%.1f %.6f\n", r.curve[i].t, r.curve[i].coverage);
  return os.str();
}

StatSummary summarize(const std::vector<double>& xs) {
  StatSummary s;
  s.n = int(xs.size());
  if (xs.empty()) return s;
  s.min = *std::min_element(xs.begin(), xs.end());
  s.max = *std::max_element(xs.begin(), xs.end());
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.avg = sum / xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - s.avg) * (x - s.avg);
  s.std = std::sqrt(var / xs.size());
  return s;
}

std::vector<MethodSummary> summarize_rows(const std::vector<BenchmarkRow>& rows) {
  std::vector<MethodSummary> out;
  std::vector<std::string> order;
  for (const auto& r : rows)
    if (std::find(order.begin(), order.end(), r.method) == order.end()) order.push_back(r.method);
  for (const auto& m : order) {
    MethodSummary s;
    s.method = m;
    std::vector<double> times, paths;
    for (const auto& r : rows) {
      if (r.method != m) continue;
      ++s.runs;
      if (!r.success) continue;
      ++s.successes;
      times.push_back(r.time_s);
      paths.push_back(r.path_m);
    }
    s.success_pct = s.runs ? 100.0 * s.successes / s.runs : 0.0;
    s.time = summarize(times);
    s.path = summarize(paths);
    out.push_back(s);
  }
  return out;
}

BenchmarkTable run_benchmark(const std::vector<World>& worlds, const std::vector<MethodKind>& methods,
                             const PredictorKind& predictor, const RunConfig& config,
                             const std::vector<uint64_t>& run_seeds,
                             const std::function<void(const ExperimentReport&)>& on_run) {
  if (worlds.empty() || methods.empty()) throw ConfigError("benchmark needs at least one world and one method");
  if (!run_seeds.empty() && run_seeds.size() != worlds.size()) throw ConfigError("one run seed per world expected");
  BenchmarkTable t;
  for (MethodKind m : methods)
    for (size_t i = 0; i < worlds.size(); ++i) {
      RunConfig c = config;
      c.record_trajectory = false;
      if (!run_seeds.empty()) c.run_seed = run_seeds[i];
      const ExperimentReport r = run_experiment(worlds[i], m, predictor, c);
      if (on_run) on_run(r);
      t.rows.push_back({r.method, r.seed, r.time_s, r.path_m, r.success, r.final_coverage});
    }
  t.summary = summarize_rows(t.rows);
  return t;
}

std::string benchmark_csv(const BenchmarkTable& t) {
  std::string out = "method,seed,time_s,path_m,success,coverage\n";
  char buf[200];
  for (const auto& r : t.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%llu,%.3f,%.4f,%d,%.6f\n", r.method.c_str(),
                  static_cast<unsigned long long>(r.seed), r.time_s, r.path_m, int(r.success), r.coverage);
    out += buf;
  }
  return out;
}

std::string benchmark_summary_text(const BenchmarkTable& t) {
  std::string out = "method,stat,min,max,avg,std,succ_pct\n";
  char buf[256];
  for (const auto& s : t.summary)
    for (const auto& [name, st] : {std::pair<const char*, StatSummary>{"time_s", s.time}, {"path_m", s.path}}) {
      if (st.n == 0) {
        std::snprintf(buf, sizeof(buf), "%s,%s,,,,,%.1f\n", s.method.c_str(), name, s.success_pct);
      } else {
        std::snprintf(buf, sizeof(buf), "%s,%s,%.3f,%.3f,%.3f,%.3f,%.1f\n", s.method.c_str(), name, st.min, st.max,
                      st.avg, st.std, s.success_pct);
      }
      out += buf;
    }
  return out;
}

double ground_truth_view_gain(const VoxelMap& map, const GroundTruth& gt, const Vec3& p, double yaw,
                              const CameraModel& camera, int stride) {
  const int cols = camera.cols / stride, rows = camera.rows / stride;
  double g = 0.0;
  for (int c = 0; c < cols; ++c) {
    const double az = yaw - 0.5 * camera.hfov + (c + 0.5) * camera.hfov / cols;
    for (int r = 0; r < rows; ++r) {
      const double el = -0.5 * camera.vfov + (r + 0.5) * camera.vfov / rows;
      walk_ray(map, p, ray_end(p, az, el, camera.max_range), [&](const Vec3i& v) {
        if (map.is_unknown(v)) g += 1.0;
        return gt.at(v) != kOccupied;
      });
    }
  }
  return g;
}

GainErrorReport merge_gain_reports(const std::vector<GainErrorReport>& parts) {
  GainErrorReport out;
  for (const auto& p : parts) out.raw.insert(out.raw.end(), p.raw.begin(), p.raw.end());
  double ec = 0.0, ep = 0.0;
  for (const auto& s : out.raw) {
    if (s.g_gt <= 0) continue;
    ++out.samples;
    ec += std::abs(s.g_cls - s.g_gt) / s.g_gt;
    ep += std::abs(s.g_pred - s.g_gt) / s.g_gt;
  }
  if (out.samples) {
    out.mean_pct_classical = 100.0 * ec / out.samples;
    out.mean_pct_predicted = 100.0 * ep / out.samples;
  }
  return out;
}

GainErrorReport eval_gain_error(const World& world, const PredictorKind& predictor, int n_samples,
                                const RunConfig& config, int per_replan) {
  if (n_samples < 1) throw ConfigError("eval-gain needs at least one sample");
  GainErrorReport rep;
  int qualified = 0;
  ReplanHook hook = [&](const ReplanContext& c) {
    int taken = 0;
    for (const auto& [id, cl] : c.frontiers.clusters()) {
      if (taken >= per_replan || qualified >= n_samples) break;
      if (cl.viewpoints.empty()) continue;
      const Viewpoint& vp = cl.viewpoints.front();
      const int stride = c.sampler.ray_stride;
      GainSample s;
      s.g_gt = ground_truth_view_gain(c.map, c.gt, vp.p, vp.yaw, c.camera, stride);
      s.g_cls = view_gain_classical(c.map, vp.p, vp.yaw, c.camera, stride);
      s.g_pred = view_gain(c.map, c.store, vp.p, vp.yaw, c.camera, stride);
      rep.raw.push_back(s);
      ++taken;
      if (s.g_gt > 0) ++qualified;
    }
    return qualified < n_samples;
  };
  RunConfig cfg = config;
  cfg.record_trajectory = false;
  run_experiment(world, MethodKind::kFrontierUtil, predictor, cfg, hook);
  return merge_gain_reports({rep});
}

}  // namespace explore
