#include <explore/occ_predict.hpp>

#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace explore {

namespace {

constexpr char kNetMagic[8] = {'S', 'E', 'E', 'R', 'N', 'E', 'T', '1'};
constexpr double kProbEps = 1e-7;

struct LayerShape {
  int out, in, k;
};
constexpr LayerShape kArch[3] = {{8, 3, 3}, {8, 8, 3}, {1, 8, 1}};

void put_u32(std::ostream& os, uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

bool get_u32(std::istream& is, uint32_t& v) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) return false;
  v = uint32_t(b[0]) | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) | (uint32_t(b[3]) << 24);
  return true;
}

void put_floats(std::ostream& os, const std::vector<float>& xs) {
  for (float f : xs) {
    uint32_t u;
    std::memcpy(&u, &f, 4);
    put_u32(os, u);
  }
}

bool get_floats(std::istream& is, std::vector<float>& xs) {
  for (float& f : xs) {
    uint32_t u;
    if (!get_u32(is, u)) return false;
    std::memcpy(&f, &u, 4);
  }
  return true;
}

// Channel-major activations: [channel][z][y][x].
std::vector<float> conv3d(const ConvLayer& L, const std::vector<float>& in, const Vec3i& d, bool relu, Exec exec) {
  const int nx = d.x(), ny = d.y(), nz = d.z();
  const size_t n = size_t(nx) * ny * nz;
  std::vector<float> out(size_t(L.out) * n);
  const int px = L.kx / 2, py = L.ky / 2, pz = L.kz / 2;
  auto plane = [&](int job) {
    const int o = job / nz, z = job % nz;
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        float acc = L.bias[size_t(o)];
        for (int i = 0; i < L.in; ++i) {
          const float* src = in.data() + size_t(i) * n;
          for (int kz = 0; kz < L.kz; ++kz) {
            const int zz = z + kz - pz;
            if (zz < 0 || zz >= nz) continue;
            for (int ky = 0; ky < L.ky; ++ky) {
              const int yy = y + ky - py;
              if (yy < 0 || yy >= ny) continue;
              for (int kx = 0; kx < L.kx; ++kx) {
                const int xx = x + kx - px;
                if (xx < 0 || xx >= nx) continue;
                acc += L.w(o, i, kx, ky, kz) * src[size_t(xx) + size_t(nx) * (size_t(yy) + size_t(ny) * size_t(zz))];
              }
            }
          }
        }
        out[size_t(o) * n + size_t(x) + size_t(nx) * (size_t(y) + size_t(ny) * size_t(z))] =
            relu ? std::max(acc, 0.0f) : acc;
      }
  };
  const int jobs = L.out * nz;
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(static)
    for (int j = 0; j < jobs; ++j) plane(j);
  } else {
    for (int j = 0; j < jobs; ++j) plane(j);
  }
  return out;
}

}  // namespace

size_t PredictedBlock::masked_count() const { return size_t(std::count(mask.begin(), mask.end(), uint8_t(1))); }

int8_t predicted_trinary(double prob, const PredictionCutoff& cut) {
  if (prob > cut.occupied_above) return kOccupied;
  if (prob < cut.free_below) return kFree;
  return kUnknown;
}

void LossWeights::validate() const {
  if (w_occ < 0 || w_struct < 0 || alpha < 0 || beta < 0) throw ConfigError("loss weights must be nonnegative");
}

double loss_occ(const PredictedBlock& pred, const OccupancyBlock& target, const OccupancyBlock& input, double alpha) {
  if (pred.dims != target.dims || target.dims != input.dims) throw ConfigError("loss_occ: shape mismatch");
  const size_t n = target.size();
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const int8_t t = target.values[i];
    if (t == kUnknown) continue;
    const double lambda = (input.values[i] == kUnknown && t == kOccupied) ? alpha : 1.0;
    const double p = std::clamp(pred.probs[i], kProbEps, 1.0 - kProbEps);
    sum += lambda * (t == kOccupied ? std::log(p) : std::log(1.0 - p));
  }
  return -sum / double(n);
}

double loss_struct(const PredictedBlock& pred, const OccupancyBlock& target, double beta) {
  if (pred.dims != target.dims) throw ConfigError("loss_struct: shape mismatch");
  const int nx = target.dims.x(), ny = target.dims.y(), nz = target.dims.z();
  if (nx * ny == 0) return 0.0;
  double sum = 0.0;
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      int n_pred = 0, n_tar = 0;
      for (int z = 0; z < nz; ++z) {
        const size_t i = target.index(x, y, z);
        if (pred.probs[i] > 0.5) ++n_pred;
        if (target.values[i] == kOccupied) ++n_tar;
      }
      const double phi = n_tar > 0.5 * nz ? beta : 1.0;
      sum += phi * std::abs(n_pred - n_tar);
    }
  return sum / double(nx * ny);
}

double loss_total(const PredictedBlock& pred, const OccupancyBlock& target, const OccupancyBlock& input,
                  const LossWeights& w) {
  w.validate();
  return w.w_occ * loss_occ(pred, target, input, w.alpha) + w.w_struct * loss_struct(pred, target, w.beta);
}

TinyNetWeights tinynet_zero_weights() {
  TinyNetWeights w;
  for (const auto& s : kArch) {
    ConvLayer L;
    L.out = s.out;
    L.in = s.in;
    L.kx = L.ky = L.kz = s.k;
    L.kernel.assign(size_t(s.out) * s.in * s.k * s.k * s.k, 0.0f);
    L.bias.assign(size_t(s.out), 0.0f);
    w.layers.push_back(std::move(L));
  }
  return w;
}

void validate_tinynet(const TinyNetWeights& w) {
  if (w.layers.size() != 3)
    throw ConfigError("tiny net expects 3 layers, got " + std::to_string(w.layers.size()));
  for (size_t i = 0; i < 3; ++i) {
    const auto& L = w.layers[i];
    const auto& s = kArch[i];
    if (L.out != s.out || L.in != s.in || L.kx != s.k || L.ky != s.k || L.kz != s.k) {
      std::ostringstream msg;
      msg << "layer " << i << ": shape (" << L.out << "," << L.in << "," << L.kx << "," << L.ky << "," << L.kz
          << ") does not match (" << s.out << "," << s.in << "," << s.k << "," << s.k << "," << s.k << ")";
      throw ConfigError(msg.str());
    }
    if (L.kernel.size() != size_t(L.out) * L.in * L.kx * L.ky * L.kz || L.bias.size() != size_t(L.out))
      throw ConfigError("layer " + std::to_string(i) + ": parameter count mismatch");
  }
}

TinyNetWeights read_weights(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open weights file " + path);
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kNetMagic, 8) != 0) throw ConfigError("bad weights magic in " + path);
  uint32_t count = 0;
  if (!get_u32(is, count) || count > 64) throw ConfigError("bad layer count in " + path);
  TinyNetWeights w;
  for (uint32_t li = 0; li < count; ++li) {
    uint32_t shape[5];
    for (auto& s : shape)
      if (!get_u32(is, s) || s == 0 || s > 4096) throw ConfigError("layer " + std::to_string(li) + ": bad shape");
    ConvLayer L;
    L.out = int(shape[0]);
    L.in = int(shape[1]);
    L.kx = int(shape[2]);
    L.ky = int(shape[3]);
    L.kz = int(shape[4]);
    L.kernel.resize(size_t(L.out) * L.in * L.kx * L.ky * L.kz);
    L.bias.resize(size_t(L.out));
    if (!get_floats(is, L.kernel) || !get_floats(is, L.bias))
      throw ConfigError("layer " + std::to_string(li) + ": truncated parameters");
    w.layers.push_back(std::move(L));
  }
  validate_tinynet(w);
  return w;
}

void write_weights(const std::string& path, const TinyNetWeights& w) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw RuntimeFailure("cannot write weights file " + path);
  os.write(kNetMagic, 8);
  put_u32(os, uint32_t(w.layers.size()));
  for (const auto& L : w.layers) {
    for (int v : {L.out, L.in, L.kx, L.ky, L.kz}) put_u32(os, uint32_t(v));
    put_floats(os, L.kernel);
    put_floats(os, L.bias);
  }
}

PredictedBlock tinynet_forward(const TinyNetWeights& w, const OccupancyBlock& input, Exec exec) {
  validate_tinynet(w);
  const size_t n = input.size();
  std::vector<float> act(3 * n, 0.0f);
  for (size_t i = 0; i < n; ++i) act[size_t(input.values[i] + 1) * n + i] = 1.0f;
  act = conv3d(w.layers[0], act, input.dims, true, exec);
  act = conv3d(w.layers[1], act, input.dims, true, exec);
  act = conv3d(w.layers[2], act, input.dims, false, exec);
  PredictedBlock out(input);
  for (size_t i = 0; i < n; ++i) {
    out.probs[i] = 1.0 / (1.0 + std::exp(-double(act[i])));
    out.mask[i] = input.values[i] == kUnknown ? 1 : 0;
  }
  return out;
}

PredictorKind parse_predictor(const std::string& name, const std::string& weights_path) {
  PredictorKind k;
  k.weights_path = weights_path;
  if (name == "null" || name == "none") {
    k.type = PredictorType::kNull;
  } else if (name == "oracle") {
    k.type = PredictorType::kOracleSim;
  } else if (name == "slab") {
    k.type = PredictorType::kSlabExtrapolation;
  } else if (name == "tinynet") {
    k.type = PredictorType::kTinyConvNet;
    if (weights_path.empty()) throw ConfigError("predictor tinynet requires --weights");
  } else {
    throw ConfigError("unknown predictor '" + name + "' (null, oracle, slab, tinynet)");
  }
  return k;
}

std::string predictor_name(PredictorType t) {
  switch (t) {
    case PredictorType::kNull: return "null";
    case PredictorType::kOracleSim: return "oracle";
    case PredictorType::kSlabExtrapolation: return "slab";
    case PredictorType::kTinyConvNet: return "tinynet";
  }
  return "?";
}

Predictor::Predictor(const PredictorKind& kind, int slab_horizon_voxels) : kind_(kind), horizon_(slab_horizon_voxels) {
  if (kind.type == PredictorType::kTinyConvNet) weights_ = read_weights(kind.weights_path);
}

PredictedBlock Predictor::predict(const OccupancyBlock& input, const OccupancyBlock* context) const {
  if (needs_context() != (context != nullptr))
    throw ConfigError(needs_context() ? "oracle predictor needs a ground-truth context" : "unexpected context block");
  switch (kind_.type) {
    case PredictorType::kNull:
      return PredictedBlock(input);
    case PredictorType::kOracleSim: {
      if (context->dims != input.dims) throw ConfigError("context block shape mismatch");
      PredictedBlock out(input);
      for (size_t i = 0; i < input.size(); ++i) {
        if (input.values[i] != kUnknown || context->values[i] == kUnknown) continue;
        out.mask[i] = 1;
        out.probs[i] = context->values[i] == kOccupied ? 1.0 : 0.0;
      }
      return out;
    }
    case PredictorType::kSlabExtrapolation:
      return slab_extrapolation(input);
    case PredictorType::kTinyConvNet:
      return tinynet_forward(weights_, input);
  }
  return PredictedBlock(input);
}

PredictedBlock Predictor::slab_extrapolation(const OccupancyBlock& input) const {
  PredictedBlock out(input);
  const int nx = input.dims.x(), ny = input.dims.y(), nz = input.dims.z();
  const Vec2 c(0.5 * nx, 0.5 * ny);
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      const Vec2 s(x + 0.5, y + 0.5);
      const Vec2 to_c = c - s;
      const double dist = to_c.norm();
      if (dist < 1e-9) continue;
      const Vec2 dir = to_c / dist;
      // Cells along the inward line, nearest first (2-D DDA), up to the horizon.
      std::vector<std::pair<int, int>> line;
      int cx = x, cy = y;
      const int sx = dir.x() > 0 ? 1 : -1, sy = dir.y() > 0 ? 1 : -1;
      double tmx = dir.x() != 0 ? (dir.x() > 0 ? (cx + 1 - s.x()) / dir.x() : (s.x() - cx) / -dir.x())
                                : std::numeric_limits<double>::infinity();
      double tmy = dir.y() != 0 ? (dir.y() > 0 ? (cy + 1 - s.y()) / dir.y() : (s.y() - cy) / -dir.y())
                                : std::numeric_limits<double>::infinity();
      const double tdx = dir.x() != 0 ? 1.0 / std::abs(dir.x()) : std::numeric_limits<double>::infinity();
      const double tdy = dir.y() != 0 ? 1.0 / std::abs(dir.y()) : std::numeric_limits<double>::infinity();
      const double limit = std::min<double>(horizon_, dist + 0.5);
      while (true) {
        double t;
        if (tmx < tmy) {
          t = tmx;
          tmx += tdx;
          cx += sx;
        } else {
          t = tmy;
          tmy += tdy;
          cy += sy;
        }
        if (t > limit || cx < 0 || cy < 0 || cx >= nx || cy >= ny) break;
        line.emplace_back(cx, cy);
      }
      for (int z = 0; z < nz; ++z) {
        const size_t i = input.index(x, y, z);
        if (input.values[i] != kUnknown) continue;
        for (auto [lx, ly] : line) {
          const int8_t v = input.at(lx, ly, z);
          if (v == kUnknown) continue;
          out.mask[i] = 1;
          out.probs[i] = v == kOccupied ? 1.0 : 0.0;
          break;
        }
      }
    }
  return out;
}

OccupancyBlock ground_truth_block(const GroundTruth& gt, const Vec3i& origin, const Vec3i& dims) {
  OccupancyBlock b(dims);
  b.origin = origin;
  for (int z = 0; z < dims.z(); ++z)
    for (int y = 0; y < dims.y(); ++y)
      for (int x = 0; x < dims.x(); ++x) {
        const Vec3i v = origin + Vec3i(x, y, z);
        if ((v.array() < 0).any() || (v.array() >= gt.dims().array()).any()) continue;
        b.at(x, y, z) = gt.at(v);
      }
  return b;
}

void mask_half_plane(OccupancyBlock& block, double angle) {
  const double cx = 0.5 * block.dims.x(), cy = 0.5 * block.dims.y();
  const double ca = std::cos(angle), sa = std::sin(angle);
  for (int y = 0; y < block.dims.y(); ++y)
    for (int x = 0; x < block.dims.x(); ++x) {
      if ((x + 0.5 - cx) * ca + (y + 0.5 - cy) * sa <= 1e-12) continue;
      for (int z = 0; z < block.dims.z(); ++z) block.at(x, y, z) = kUnknown;
    }
}

std::vector<Pose> sample_scan_poses(const World& world, int count, std::mt19937_64& rng, double clearance) {
  std::vector<Pose> poses;
  std::uniform_real_distribution<double> ux(world.bounds.min.x(), world.bounds.max.x());
  std::uniform_real_distribution<double> uy(world.bounds.min.y(), world.bounds.max.y());
  std::uniform_real_distribution<double> uyaw(-kPi, kPi);
  int attempts = 0;
  while (int(poses.size()) < count && attempts < count * 1000) {
    ++attempts;
    Pose p;
    p.p = Vec3(ux(rng), uy(rng), world.start.p.z());
    p.yaw = uyaw(rng);
    if (world.clearance(p.p) < clearance) continue;
    poses.push_back(p);
  }
  return poses;
}

TrainingPair make_training_pair(const World& world, const std::vector<Pose>& scan_poses, const CameraModel& camera,
                                std::mt19937_64& rng, const Vec3i& dims) {
  if (scan_poses.empty()) throw ConfigError("training pair needs at least one scan pose");
  VoxelMap full = make_map(world), partial = make_map(world);
  std::vector<size_t> order(scan_poses.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const size_t keep = std::max<size_t>(1, scan_poses.size() / 2);
  std::vector<uint8_t> in_subset(scan_poses.size(), 0);
  for (size_t k = 0; k < keep; ++k) in_subset[order[k]] = 1;

  for (size_t i = 0; i < scan_poses.size(); ++i) {
    const auto rays = render_depth(world, scan_poses[i], camera);
    // two integrations per pose: a single miss does not reach the free threshold
    for (int rep = 0; rep < 2; ++rep) {
      full.integrate_scan(scan_poses[i].p, rays);
      if (in_subset[i]) partial.integrate_scan(scan_poses[i].p, rays);
    }
  }
  const Vec3 center = 0.5 * (world.bounds.min + world.bounds.max);
  TrainingPair pair;
  pair.target = full.extract_block(center, dims);
  const OccupancyBlock sub = partial.extract_block(center, dims);
  pair.input = pair.target;
  for (size_t i = 0; i < sub.size(); ++i)
    if (sub.values[i] == kUnknown) pair.input.values[i] = kUnknown;
  std::uniform_real_distribution<double> uangle(0.0, kPi);
  const double angle = uangle(rng);
  // either side of the cut may be removed
  const double side = std::uniform_int_distribution<int>(0, 1)(rng) ? 0.0 : kPi;
  mask_half_plane(pair.input, angle + side);
  return pair;
}

}  // namespace explore
