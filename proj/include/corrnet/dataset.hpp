#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "corrnet/types.hpp"

namespace corrnet {

// N trials x D2 pixels, row-major pixel order (pixel k = r * cols + c).
struct StimulusSet {
  BinaryMatrix values;
  int rows = 0;
  int cols = 0;
  // Optional per-trial tag ("random", "geometry", "digit"); empty if unknown.
  std::vector<std::string> categories;

  int trials() const { return static_cast<int>(values.rows()); }
  int pixels() const { return static_cast<int>(values.cols()); }
  void validate() const;
};

// Voxel positions in mm, world frame. Construction rejects non-finite and
// duplicate positions (within 1e-9 mm).
class VoxelLayout {
 public:
  VoxelLayout() = default;
  explicit VoxelLayout(std::vector<Point3> positions);

  int size() const { return static_cast<int>(positions_.size()); }
  const Point3& operator[](int j) const { return positions_[static_cast<std::size_t>(j)]; }
  const std::vector<Point3>& positions() const { return positions_; }
  double distance(int j, int m) const { return ((*this)[j] - (*this)[m]).norm(); }

 private:
  std::vector<Point3> positions_;
};

struct ResponseSet {
  Matrix values;  // N x D1
  VoxelLayout layout;
  bool standardized = false;
  // Per voxel, set when the column had zero variance at standardization time.
  std::vector<std::uint8_t> zero_variance;

  int trials() const { return static_cast<int>(values.rows()); }
  int voxels() const { return static_cast<int>(values.cols()); }
  void validate() const;
};

// Per-voxel statistics of a training set, reused to standardize test data.
struct Standardization {
  Vector mean;
  Vector stddev;  // sample standard deviation (N-1)
  std::vector<std::uint8_t> zero_variance;

  static Standardization fit(const Matrix& values);
  // Columns flagged zero-variance map to 0.
  Matrix apply(const Matrix& values) const;
  Vector apply(const Vector& response) const;
};

// Per-voxel z-scoring over trials. Requires N >= 2.
ResponseSet standardize(const ResponseSet& responses);

// ---------------------------------------------------------------------------
// Stimulus generation

StimulusSet generate_random_stimuli(int count, int rows, int cols, std::uint64_t seed);

enum class ShapeCatalog { Geometry, Digits, All };

std::vector<std::string> shape_names(ShapeCatalog catalog);
// Template bitmap for a named shape ('#' = 1), as stored in the built-in table.
const std::vector<std::string>& shape_template(const std::string& name);

// Every shape in the catalog, repeated `repetitions` times. Trial order is
// shape-major within each repetition pass: pass 0 holds one copy of each shape,
// then pass 1, and so on.
StimulusSet generate_shape_stimuli(ShapeCatalog catalog, int rows, int cols, int repetitions);

// ---------------------------------------------------------------------------
// Synthetic retinotopic responses

struct SyntheticConfig {
  int grid_x = 28;
  int grid_y = 28;
  int grid_z = 2;
  Point3 pitch{1.875, 1.875, 3.0};
  double jitter = 0.1;       // fraction of pitch, uniform in [-j, j] per axis
  double rf_sigma = 0.6;     // Gaussian receptive-field width in pixels
  double gain = 1.0;
  // Amplitude ratio: mean clean signal of a voxel over its noise std. An
  // infinite value disables noise.
  double snr = 2.0;
  double irrelevant_fraction = 0.3;
  bool center_weighting = true;
  std::uint64_t seed = 42;

  void validate() const;
  static constexpr double kNoiseless = std::numeric_limits<double>::infinity();
};

struct GroundTruth {
  Matrix rf;                  // D1 x D2, non-negative
  BinaryMatrix relevance;     // rf >= 0.25 * per-voxel peak
  std::vector<std::uint8_t> relevant_voxel;
  Matrix rf_center;           // D1 x 2 (row, col) in pixel units; NaN for irrelevant voxels
  Vector noise_sigma;         // per voxel
};

// Voxel layout and receptive fields, a pure function of (cfg, rows, cols).
struct VoxelModel {
  VoxelLayout layout;
  GroundTruth truth;
};

VoxelModel build_voxel_model(const SyntheticConfig& cfg, int rows, int cols);

// Responses for the given stimuli. Train and test sets built from the same cfg
// share the voxel model; `noise_stream` selects an independent noise stream.
std::pair<ResponseSet, GroundTruth> synthesize_responses(const StimulusSet& stimuli,
                                                         const SyntheticConfig& cfg,
                                                         std::uint64_t noise_stream = 0);

// ---------------------------------------------------------------------------
// Dataset directory I/O

struct Dataset {
  StimulusSet stimuli;
  ResponseSet responses;
  std::optional<Matrix> rf;  // optional rf.csv (D1 x D2)
};

void store_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace corrnet
