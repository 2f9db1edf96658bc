#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "corrnet/correlation.hpp"
#include "corrnet/dataset.hpp"
#include "corrnet/types.hpp"

namespace corrnet {

using CountMatrix = Eigen::MatrixXi;

struct AccuracyReport {
  std::string method;
  Matrix per_pixel;                // rows x cols, fraction of trials with the right bit
  double mean = 0.0;               // average of per_pixel
  std::vector<double> per_trial;   // fraction of pixels right in each trial
  double trial_std = 0.0;          // sample std of per_trial (0 for a single trial)
  std::map<std::string, double> category_mean;
};

// predicted and truth are trials x D2. For {0,1} pixels the per-pixel
// Euclidean criterion reduces to bit agreement.
AccuracyReport pixel_accuracy(const BinaryMatrix& predicted, const BinaryMatrix& truth, int rows, int cols,
                              const std::vector<std::string>& categories = {}, std::string method = {});

// Mean per-pixel accuracy over the centered s x s patch, s = 1..min(rows, cols);
// the patch starts at floor((rows - s) / 2), floor((cols - s) / 2).
struct PatchCurve {
  std::vector<double> values;  // values[s - 1]
};

PatchCurve patch_scale_accuracy(const AccuracyReport& report);

CountMatrix bin_heatmap(const CorrelationGraph& graph, int rows, int cols);

struct BinRecovery {
  // Per pixel; NaN where the pixel has no ground-truth voxels.
  Vector precision;
  Vector recall;
  Vector f1;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_f1 = 0.0;
  int skipped = 0;
};

BinRecovery bin_recovery(const CorrelationGraph& graph, const GroundTruth& truth);

// Binary PGM (P5), one byte per pixel. Values are rounded to integers and must
// lie in [0, max_val] with max_val <= 255.
void render_pgm(const Matrix& image, const std::filesystem::path& path, int max_val = 255);

struct PgmImage {
  CountMatrix pixels;
  int max_val = 255;
};

PgmImage read_pgm(const std::filesystem::path& path);

// Linear map of [lo, hi] onto [0, 255], rounded.
Matrix to_gray(const Matrix& values, double lo, double hi);

}  // namespace corrnet
