#include <algorithm>
#include <cmath>
#include <numeric>

#include "corrnet/dataset.hpp"
#include "corrnet/error.hpp"
#include "corrnet/rng.hpp"

namespace corrnet {

void SyntheticConfig::validate() const {
  if (grid_x < 1 || grid_y < 1 || grid_z < 1) throw InvalidArgument("voxel grid dims must be positive");
  if (!(pitch.array() > 0.0).all()) throw InvalidArgument("voxel pitch must be positive");
  if (!(snr > 0.0)) throw InvalidArgument("snr must be positive");
  if (!(jitter >= 0.0 && jitter <= 0.4)) throw InvalidArgument("jitter must lie in [0, 0.4]");
  if (!(irrelevant_fraction >= 0.0 && irrelevant_fraction < 1.0)) {
    throw InvalidArgument("irrelevant fraction must lie in [0, 1)");
  }
  if (!(rf_sigma > 0.0)) throw InvalidArgument("rf_sigma must be positive");
  if (!(gain > 0.0)) throw InvalidArgument("gain must be positive");
}

namespace {

// Cortical-magnification style warp of u in [-1, 1]. With center weighting the
// slope at the center is halved, so twice as many voxels land per central pixel.
double retinotopic_warp(double u, bool center_weighting) {
  if (!center_weighting) return u;
  constexpr double kCenterSlope = 0.5;
  return u * (kCenterSlope + (1.0 - kCenterSlope) * std::abs(u));
}

double pixel_mass(int k, double center, double sigma) {
  const double s = std::sqrt(2.0) * sigma;
  return 0.5 * (std::erf((k + 0.5 - center) / s) - std::erf((k - 0.5 - center) / s));
}

}  // namespace

VoxelModel build_voxel_model(const SyntheticConfig& cfg, int rows, int cols) {
  cfg.validate();
  if (rows < 1 || cols < 1) throw InvalidArgument("grid dimensions must be positive");
  const int d1 = cfg.grid_x * cfg.grid_y * cfg.grid_z;
  if (d1 < 4) throw InvalidArgument("synthetic layout needs at least 4 voxels");
  const int d2 = rows * cols;

  Rng layout_rng(derive_seed(cfg.seed, "synthetic-layout"));
  std::vector<Point3> positions;
  std::vector<Eigen::Vector2d> grid_xy;  // fractional grid coordinates after jitter
  positions.reserve(static_cast<std::size_t>(d1));
  for (int z = 0; z < cfg.grid_z; ++z) {
    for (int y = 0; y < cfg.grid_y; ++y) {
      for (int x = 0; x < cfg.grid_x; ++x) {
        const double jx = layout_rng.uniform(-cfg.jitter, cfg.jitter);
        const double jy = layout_rng.uniform(-cfg.jitter, cfg.jitter);
        const double jz = layout_rng.uniform(-cfg.jitter, cfg.jitter);
        positions.emplace_back((x + jx) * cfg.pitch.x(), (y + jy) * cfg.pitch.y(),
                               (z + jz) * cfg.pitch.z());
        grid_xy.emplace_back(x + jx, y + jy);
      }
    }
  }

  VoxelModel model;
  model.layout = VoxelLayout(std::move(positions));
  auto& truth = model.truth;
  truth.rf = Matrix::Zero(d1, d2);
  truth.relevance = BinaryMatrix::Zero(d1, d2);
  truth.relevant_voxel.assign(static_cast<std::size_t>(d1), 1);
  truth.rf_center = Matrix::Constant(d1, 2, std::numeric_limits<double>::quiet_NaN());
  truth.noise_sigma = Vector::Zero(d1);

  std::vector<int> order(static_cast<std::size_t>(d1));
  std::iota(order.begin(), order.end(), 0);
  Rng pick_rng(derive_seed(cfg.seed, "synthetic-irrelevant"));
  pick_rng.shuffle(order);
  const int irrelevant = static_cast<int>(std::lround(cfg.irrelevant_fraction * d1));
  for (int i = 0; i < std::min(irrelevant, d1 - 1); ++i) truth.relevant_voxel[order[i]] = 0;

  for (int j = 0; j < d1; ++j) {
    if (!truth.relevant_voxel[j]) continue;
    // Map the (jittered) in-slab coordinate to the image plane.
    const double ux = 2.0 * (grid_xy[j].x() + 0.5) / cfg.grid_x - 1.0;
    const double uy = 2.0 * (grid_xy[j].y() + 0.5) / cfg.grid_y - 1.0;
    const double cc = (retinotopic_warp(ux, cfg.center_weighting) + 1.0) * 0.5 * cols - 0.5;
    const double rc = (retinotopic_warp(uy, cfg.center_weighting) + 1.0) * 0.5 * rows - 0.5;
    truth.rf_center(j, 0) = rc;
    truth.rf_center(j, 1) = cc;
    // Gaussian mass over each unit pixel square.
    for (int r = 0; r < rows; ++r) {
      const double wr = pixel_mass(r, rc, cfg.rf_sigma);
      for (int c = 0; c < cols; ++c) truth.rf(j, r * cols + c) = wr * pixel_mass(c, cc, cfg.rf_sigma);
    }
    const double peak = truth.rf.row(j).maxCoeff();
    for (int k = 0; k < d2; ++k) truth.relevance(j, k) = truth.rf(j, k) >= 0.25 * peak ? 1 : 0;
  }

  // Noise level per relevant voxel from its expected clean signal under fair
  // random pixels; irrelevant voxels get the average of those levels.
  if (std::isfinite(cfg.snr)) {
    double sum = 0.0;
    int count = 0;
    for (int j = 0; j < d1; ++j) {
      if (!truth.relevant_voxel[j]) continue;
      truth.noise_sigma(j) = cfg.gain * 0.5 * truth.rf.row(j).sum() / cfg.snr;
      sum += truth.noise_sigma(j);
      ++count;
    }
    const double fallback = count > 0 ? sum / count : cfg.gain / cfg.snr;
    for (int j = 0; j < d1; ++j) {
      if (!truth.relevant_voxel[j]) truth.noise_sigma(j) = fallback;
    }
  }
  return model;
}

std::pair<ResponseSet, GroundTruth> synthesize_responses(const StimulusSet& stimuli,
                                                         const SyntheticConfig& cfg,
                                                         std::uint64_t noise_stream) {
  stimuli.validate();
  auto model = build_voxel_model(cfg, stimuli.rows, stimuli.cols);
  const int n = stimuli.trials();
  const int d1 = model.layout.size();

  ResponseSet out;
  out.layout = model.layout;
  out.values = cfg.gain * (stimuli.values.cast<double>() * model.truth.rf.transpose());
  if (std::isfinite(cfg.snr)) {
    Rng noise(derive_seed(cfg.seed, "synthetic-noise", noise_stream));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d1; ++j) out.values(i, j) += model.truth.noise_sigma(j) * noise.normal();
    }
  }
  return {std::move(out), std::move(model.truth)};
}

}  // namespace corrnet
