#pragma once

#include <explore/common.hpp>
#include <explore/sim_world.hpp>
#include <explore/voxel_map.hpp>

#include <random>
#include <string>
#include <vector>

namespace explore {

/// Per-voxel occupancy probabilities over an OccupancyBlock footprint. Only
/// voxels with mask set carry a prediction; mask is never set on voxels that
/// were known in the input.
struct PredictedBlock {
  Vec3i dims{Vec3i::Zero()};
  Vec3i origin{Vec3i::Zero()};
  std::vector<double> probs;
  std::vector<uint8_t> mask;

  PredictedBlock() = default;
  explicit PredictedBlock(const OccupancyBlock& like)
      : dims(like.dims), origin(like.origin), probs(like.size(), 0.5), mask(like.size(), 0) {}

  size_t size() const { return probs.size(); }
  size_t masked_count() const;
};

/// Trinary view of a prediction for gain lookup: confident probabilities
/// become free/occupied, everything else stays unknown.
struct PredictionCutoff {
  double occupied_above = 0.65;
  double free_below = 0.35;
};
int8_t predicted_trinary(double prob, const PredictionCutoff& cut = {});

struct LossWeights {
  double w_occ = 2.0;
  double w_struct = 1.0;
  double alpha = 5.0;
  double beta = 2.0;
  void validate() const;
};

/// Weighted BCE: zero weight on unknown targets, `alpha` on voxels unknown in
/// the input and occupied in the target, one elsewhere; averaged over all voxels.
double loss_occ(const PredictedBlock& pred, const OccupancyBlock& target, const OccupancyBlock& input, double alpha);
/// Column-count L1 between predicted (p > 0.5) and target occupancy, weighted
/// by `beta` on columns whose target is mostly occupied.
double loss_struct(const PredictedBlock& pred, const OccupancyBlock& target, double beta);
double loss_total(const PredictedBlock& pred, const OccupancyBlock& target, const OccupancyBlock& input,
                  const LossWeights& w);

// ---- tiny 3-D conv net -------------------------------------------------------

struct ConvLayer {
  int out = 0, in = 0, kx = 0, ky = 0, kz = 0;
  std::vector<float> kernel;  // x-fastest: x + kx*(y + ky*(z + kz*(in_ch + in*out_ch)))
  std::vector<float> bias;

  float w(int o, int i, int x, int y, int z) const {
    return kernel[size_t(x) + size_t(kx) * (size_t(y) + size_t(ky) * (size_t(z) + size_t(kz) * (size_t(i) + size_t(in) * size_t(o))))];
  }
};

struct TinyNetWeights {
  std::vector<ConvLayer> layers;
};

/// Zero-initialized weights with the fixed architecture
/// 3 -> conv3 8 -> relu -> conv3 8 -> relu -> conv1 1 -> logistic.
TinyNetWeights tinynet_zero_weights();
/// Throws ConfigError naming the first layer that does not match the architecture.
void validate_tinynet(const TinyNetWeights& w);
TinyNetWeights read_weights(const std::string& path);
void write_weights(const std::string& path, const TinyNetWeights& w);

/// Forward pass; the input is one-hot encoded as channels (unknown, free, occupied).
PredictedBlock tinynet_forward(const TinyNetWeights& w, const OccupancyBlock& input, Exec exec = Exec::kParallel);

// ---- predictors --------------------------------------------------------------

enum class PredictorType { kNull, kOracleSim, kSlabExtrapolation, kTinyConvNet };

struct PredictorKind {
  PredictorType type = PredictorType::kNull;
  std::string weights_path;
};

PredictorKind parse_predictor(const std::string& name, const std::string& weights_path = {});
std::string predictor_name(PredictorType t);

class Predictor {
 public:
  explicit Predictor(const PredictorKind& kind, int slab_horizon_voxels = 20);

  PredictorType type() const { return kind_.type; }
  bool needs_context() const { return kind_.type == PredictorType::kOracleSim; }

  /// `context` is the ground-truth block over the same footprint (unknown
  /// outside the world) and must be given iff the predictor is OracleSim.
  PredictedBlock predict(const OccupancyBlock& input, const OccupancyBlock* context = nullptr) const;

 private:
  PredictedBlock slab_extrapolation(const OccupancyBlock& input) const;

  PredictorKind kind_;
  int horizon_;
  TinyNetWeights weights_;
};

/// Ground-truth block covering the same footprint as extract_block(center).
OccupancyBlock ground_truth_block(const GroundTruth& gt, const Vec3i& origin, const Vec3i& dims = kBlockDims);

// ---- training pairs ----------------------------------------------------------

struct TrainingPair {
  OccupancyBlock input;
  OccupancyBlock target;
};

/// Unknowns every voxel whose center lies strictly on the positive side of the
/// vertical plane through the block center with horizontal normal at `angle`.
void mask_half_plane(OccupancyBlock& block, double angle);

/// Random free poses at flight height with random headings.
std::vector<Pose> sample_scan_poses(const World& world, int count, std::mt19937_64& rng, double clearance = 0.4);

/// Target from all scans; input from a random half of the scans, restricted to
/// voxels known in the target, then cut by a random vertical half-plane.
TrainingPair make_training_pair(const World& world, const std::vector<Pose>& scan_poses, const CameraModel& camera,
                                std::mt19937_64& rng, const Vec3i& dims = kBlockDims);

}  // namespace explore
