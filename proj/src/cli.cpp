#include <explore/cli.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

namespace explore {

namespace fs = std::filesystem;

namespace {

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
    return x;
  } catch (const std::logic_error&) {
    throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError("config key '" + key + "': not an integer: '" + v + "'");
  return int(x);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write '" + path.string() + "'");
  out << text;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

}  // namespace

void apply_config_text(RunConfig& run, WorldConfig& world, const std::string& text) {
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto d = [](double& f) -> Setter { return [&f](const std::string& k, const std::string& v) { f = to_double(k, v); }; };
  auto i = [](int& f) -> Setter { return [&f](const std::string& k, const std::string& v) { f = to_int(k, v); }; };
  auto deg = [](double& f) -> Setter {
    return [&f](const std::string& k, const std::string& v) { f = to_double(k, v) * kPi / 180.0; };
  };
  const std::map<std::string, Setter> keys = {
      {"dt", d(run.dt)},
      {"substeps", i(run.substeps)},
      {"timeout_s", d(run.timeout_s)},
      {"replan_period", d(run.replan_period)},
      {"success_coverage", d(run.success_coverage)},
      {"stop_coverage", d(run.stop_coverage)},
      {"stuck_s", d(run.stuck_s)},
      {"soi_defer_s", d(run.soi_defer_s)},
      {"max_vel", d(run.limits.max_velocity)},
      {"max_acc", d(run.limits.max_acceleration)},
      {"robot_radius", d(run.safety.robot_radius)},
      {"safety_margin", d(run.safety.margin)},
      {"camera_range", d(run.camera.max_range)},
      {"camera_hfov_deg", deg(run.camera.hfov)},
      {"camera_vfov_deg", deg(run.camera.vfov)},
      {"camera_rows", i(run.camera.rows)},
      {"camera_cols", i(run.camera.cols)},
      {"viewpoints", i(run.sampler.n_vp)},
      {"yaw_bins", i(run.yaw.bins)},
      {"yaw_knot_spacing", d(run.yaw.knot_spacing)},
      {"beta_psi", d(run.yaw.beta_psi)},
      {"beta_s", d(run.yaw.beta_s)},
      {"beta_u", d(run.yaw.beta_u)},
      {"rho_p", d(run.yaw.rho_p)},
      {"rho_v", d(run.yaw.rho_v)},
      {"rho_a", d(run.yaw.rho_a)},
      {"world_length", d(world.length)},
      {"world_width", d(world.width)},
      {"world_height", d(world.height)},
      {"world_rooms", i(world.rooms)},
      {"world_door_min", d(world.door_min)},
      {"world_door_max", d(world.door_max)},
      {"world_obstacles_per_room", i(world.obstacles_per_room)},
  };
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->second(key, value);
  }
}

std::string render_plot(const World& world, const std::string& trajectory, int ppv) {
  if (ppv < 1) throw ConfigError("plot scale must be positive");
  const GroundTruth gt(world);
  const Vec3i dims = gt.dims();
  const int zi = std::clamp(int(std::floor((world.start.p.z() - gt.origin().z()) / gt.resolution())), 0, dims.z() - 1);
  const int W = dims.x() * ppv, H = dims.y() * ppv;
  std::vector<uint8_t> rgb(size_t(W) * H * 3, 255);
  auto put = [&](int px, int py, uint8_t r, uint8_t g, uint8_t b) {
    if (px < 0 || py < 0 || px >= W || py >= H) return;
    const size_t o = (size_t(H - 1 - py) * W + px) * 3;  // +y up
    rgb[o] = r;
    rgb[o + 1] = g;
    rgb[o + 2] = b;
  };
  for (int y = 0; y < dims.y(); ++y)
    for (int x = 0; x < dims.x(); ++x)
      if (gt.at({x, y, zi}) == kOccupied)
        for (int a = 0; a < ppv; ++a)
          for (int b = 0; b < ppv; ++b) put(x * ppv + a, y * ppv + b, 40, 40, 40);
  const double scale = ppv / gt.resolution();
  std::istringstream in(trajectory);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    double t, x, y, z, yaw;
    if (!(ls >> t >> x >> y >> z >> yaw)) continue;
    const int px = int(std::floor((x - gt.origin().x()) * scale)), py = int(std::floor((y - gt.origin().y()) * scale));
    put(px, py, 220, 30, 30);
  }
  const Vec3& s = world.start.p;
  const int sx = int(std::floor((s.x() - gt.origin().x()) * scale)), sy = int(std::floor((s.y() - gt.origin().y()) * scale));
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b) put(sx + a, sy + b, 30, 90, 220);
  std::string out = "P6\n" + std::to_string(W) + " " + std::to_string(H) + "\n255\n";
  out.append(reinterpret_cast<const char*>(rgb.data()), rgb.size());
  return out;
}

namespace {

struct Common {
  uint64_t seed = 1;
  std::string world_path;
  std::string method = "seer";
  std::string predictor = "oracle";
  std::string weights;
  int repeats = 1;
  std::string out = "out";
  std::string config_path;
  std::optional<double> max_vel, max_acc, timeout_s;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "world / run seed");
  sub->add_option("--world", c.world_path, "world file (default: generate from --seed)");
  sub->add_option("--predictor", c.predictor, "null | oracle | slab | tinynet");
  sub->add_option("--weights", c.weights, "SEERNET1 weights for tinynet");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--config", c.config_path, "key=value config file");
  sub->add_option("--max-vel", c.max_vel, "max velocity (m/s)");
  sub->add_option("--max-acc", c.max_acc, "max acceleration (m/s^2)");
  sub->add_option("--timeout-s", c.timeout_s, "simulated timeout (s)");
}

struct Resolved {
  RunConfig run;
  WorldConfig world_cfg;
  PredictorKind predictor;
  fs::path out;
};

Resolved resolve(const Common& c) {
  Resolved r;
  if (!c.config_path.empty()) apply_config_text(r.run, r.world_cfg, read_text(c.config_path));
  if (c.max_vel) r.run.limits.max_velocity = *c.max_vel;
  if (c.max_vel) r.run.behavior.max_velocity = *c.max_vel;
  if (c.max_acc) r.run.limits.max_acceleration = *c.max_acc;
  if (c.timeout_s) r.run.timeout_s = *c.timeout_s;
  r.run.validate();
  r.predictor = parse_predictor(c.predictor, c.weights);
  if (c.repeats < 1) throw ConfigError("--repeats must be at least 1");
  r.out = c.out;
  std::error_code ec;
  fs::create_directories(r.out, ec);
  if (ec) throw RuntimeFailure("cannot create output directory '" + c.out + "'");
  return r;
}

World world_for(const Common& c, const Resolved& r, uint64_t seed) {
  if (!c.world_path.empty()) return load_world(c.world_path);
  return generate_world(seed, r.world_cfg);
}

int cmd_gen_world(const Common& c) {
  const Resolved r = resolve(c);
  const World w = generate_world(c.seed, r.world_cfg);
  save_world((r.out / "world.txt").string(), w);
  std::cout << (r.out / "world.txt").string() << "\n";
  return 0;
}

int cmd_explore(const Common& c) {
  const Resolved r = resolve(c);
  const World w = world_for(c, r, c.seed);
  const MethodKind m = parse_method(c.method);
  const ExperimentReport rep = run_experiment(w, m, r.predictor, r.run);
  std::string log;
  for (const auto& e : rep.events) log += e + "\n";
  write_text(r.out / "report.txt", format_report(rep));
  write_text(r.out / "run.log", log);
  write_text(r.out / "trajectory.txt", rep.trajectory);
  save_world((r.out / "world.txt").string(), w);
  std::printf("method=%s success=%d reason=%s time_s=%.1f path_m=%.2f coverage=%.4f cycle_ms(mean=%.1f max=%.1f)\n",
              rep.method.c_str(), int(rep.success), rep.reason.c_str(), rep.time_s, rep.path_m, rep.final_coverage,
              rep.mean_cycle_ms, rep.max_cycle_ms);
  return 0;
}

int cmd_benchmark(const Common& c, const std::string& methods_arg) {
  const Resolved r = resolve(c);
  std::vector<MethodKind> methods;
  for (const auto& s : split_list(methods_arg)) methods.push_back(parse_method(s));
  if (methods.empty()) throw ConfigError("--methods is empty");
  std::vector<World> worlds;
  std::vector<uint64_t> run_seeds;
  for (int k = 0; k < c.repeats; ++k) {
    worlds.push_back(world_for(c, r, c.seed + uint64_t(k)));
    // a fixed world file is repeated with different start headings
    run_seeds.push_back(c.world_path.empty() ? 0 : uint64_t(k + 1));
  }
  const BenchmarkTable t = run_benchmark(worlds, methods, r.predictor, r.run, run_seeds, [](const ExperimentReport& e) {
    std::fprintf(stderr, "%s seed=%llu success=%d time_s=%.1f path_m=%.2f coverage=%.4f\n", e.method.c_str(),
                 static_cast<unsigned long long>(e.seed), int(e.success), e.time_s, e.path_m, e.final_coverage);
  });
  write_text(r.out / "benchmark.csv", benchmark_csv(t));
  write_text(r.out / "summary.csv", benchmark_summary_text(t));
  std::cout << benchmark_summary_text(t);
  return 0;
}

int cmd_eval_gain(const Common& c, int samples) {
  const Resolved r = resolve(c);
  if (samples < 1) throw ConfigError("--samples must be at least 1");
  std::vector<GainErrorReport> parts;
  const int per_world = (samples + c.repeats - 1) / c.repeats;
  for (int k = 0; k < c.repeats; ++k)
    parts.push_back(eval_gain_error(world_for(c, r, c.seed + uint64_t(k)), r.predictor, per_world, r.run));
  const GainErrorReport g = merge_gain_reports(parts);
  char buf[256];
  std::snprintf(buf, sizeof(buf), "samples %d\nclassical_pct %.3f\npredicted_pct %.3f\n", g.samples,
                g.mean_pct_classical, g.mean_pct_predicted);
  std::string raw = "g_gt,g_cls,g_pred\n";
  for (const auto& s : g.raw) raw += std::to_string(s.g_gt) + "," + std::to_string(s.g_cls) + "," + std::to_string(s.g_pred) + "\n";
  write_text(r.out / "gain_error.txt", buf);
  write_text(r.out / "gain_samples.csv", raw);
  std::cout << buf;
  return 0;
}

int cmd_train_data(const Common& c, int count, int scans) {
  const Resolved r = resolve(c);
  if (count < 1 || scans < 2) throw ConfigError("train-data needs --count >= 1 and --scans >= 2");
  std::mt19937_64 rng(c.seed);
  for (int k = 0; k < count; ++k) {
    const World w = world_for(c, r, c.seed + uint64_t(k));
    const auto poses = sample_scan_poses(w, scans, rng);
    const TrainingPair p = make_training_pair(w, poses, r.run.camera, rng);
    char name[32];
    std::snprintf(name, sizeof(name), "pair_%04d", k);
    write_block((r.out / (std::string(name) + ".in")).string(), p.input);
    write_block((r.out / (std::string(name) + ".tar")).string(), p.target);
  }
  std::cout << count << " pairs in " << r.out.string() << "\n";
  return 0;
}

int cmd_predict_eval(const Common& c, const std::string& pairs_dir) {
  const Resolved r = resolve(c);
  const fs::path dir = pairs_dir.empty() ? r.out : fs::path(pairs_dir);
  if (!fs::is_directory(dir)) throw ConfigError("pairs directory '" + dir.string() + "' does not exist");
  std::vector<fs::path> inputs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".in") inputs.push_back(e.path());
  std::sort(inputs.begin(), inputs.end());
  if (inputs.empty()) throw ConfigError("no .in files in '" + dir.string() + "'");
  const Predictor pred(r.predictor);
  const LossWeights w;
  std::string csv = "pair,loss_occ,loss_struct,loss_total\n";
  double so = 0, ss = 0, st = 0;
  char buf[256];
  for (const auto& in_path : inputs) {
    fs::path tar_path = in_path;
    tar_path.replace_extension(".tar");
    const OccupancyBlock input = read_block(in_path.string());
    const OccupancyBlock target = read_block(tar_path.string());
    if (input.dims != target.dims) throw RuntimeFailure("pair '" + in_path.stem().string() + "': size mismatch");
    const PredictedBlock p = pred.predict(input, pred.needs_context() ? &target : nullptr);
    const double lo = loss_occ(p, target, input, w.alpha), ls = loss_struct(p, target, w.beta);
    const double lt = loss_total(p, target, input, w);
    so += lo;
    ss += ls;
    st += lt;
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f\n", in_path.stem().string().c_str(), lo, ls, lt);
    csv += buf;
  }
  const double n = double(inputs.size());
  std::snprintf(buf, sizeof(buf), "mean,%.6f,%.6f,%.6f\n", so / n, ss / n, st / n);
  csv += buf;
  write_text(r.out / "losses.csv", csv);
  std::cout << buf;
  return 0;
}

int cmd_plot(const Common& c, const std::string& traj_path, int scale) {
  const Resolved r = resolve(c);
  const World w = world_for(c, r, c.seed);
  const std::string traj = traj_path.empty() ? std::string() : read_text(traj_path);
  write_text(r.out / "plot.ppm", render_plot(w, traj, scale));
  std::cout << (r.out / "plot.ppm").string() << "\n";
  return 0;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args) {
  CLI::App app{"Headless indoor exploration engine"};
  app.require_subcommand(1);
  Common c;
  std::string methods = "frontier,frontier-util,frontier-pred,seer", pairs_dir, traj_path;
  int samples = 200, count = 8, scans = 12, scale = 4;

  auto* gen = app.add_subcommand("gen-world", "generate a world file");
  add_common(gen, c);
  auto* exp = app.add_subcommand("explore", "run one exploration");
  add_common(exp, c);
  exp->add_option("--method", c.method, "frontier | frontier-util | frontier-pred | seer");
  auto* bench = app.add_subcommand("benchmark", "run methods over seeded worlds");
  add_common(bench, c);
  bench->add_option("--methods", methods, "comma-separated method list");
  bench->add_option("--repeats", c.repeats, "number of worlds (seed, seed+1, ...)");
  auto* gain = app.add_subcommand("eval-gain", "gain-estimate error against ground truth");
  add_common(gain, c);
  gain->add_option("--samples", samples, "qualifying viewpoints in total");
  gain->add_option("--repeats", c.repeats, "number of worlds");
  auto* train = app.add_subcommand("train-data", "export (in, tar) block pairs");
  add_common(train, c);
  train->add_option("--count", count, "pairs");
  train->add_option("--scans", scans, "scan poses per world");
  auto* peval = app.add_subcommand("predict-eval", "predictor losses over block pairs");
  add_common(peval, c);
  peval->add_option("--pairs", pairs_dir, "directory with .in/.tar files (default: --out)");
  auto* plot = app.add_subcommand("plot", "top-down PPM of a world and trajectory");
  add_common(plot, c);
  plot->add_option("--trajectory", traj_path, "trajectory rows 't x y z yaw'");
  plot->add_option("--scale", scale, "pixels per voxel");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_world(c);
    if (exp->parsed()) return cmd_explore(c);
    if (bench->parsed()) return cmd_benchmark(c, methods);
    if (gain->parsed()) return cmd_eval_gain(c, samples);
    if (train->parsed()) return cmd_train_data(c, count, scans);
    if (peval->parsed()) return cmd_predict_eval(c, pairs_dir);
    if (plot->parsed()) return cmd_plot(c, traj_path, scale);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const RuntimeFailure& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace explore
