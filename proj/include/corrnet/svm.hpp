#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "corrnet/correlation.hpp"
#include "corrnet/types.hpp"

namespace corrnet {

struct SvmConfig {
  double c = 1.0;
  double tolerance = 1e-3;  // projected-gradient spread at which the solver stops
  // Coordinate-update budget; 0 means 10 * N * |bin_k|.
  long max_updates = 0;

  void validate() const;
};

struct SvmDiagnostics {
  double dual_objective = 0.0;
  double kkt_residual = 0.0;
  long iterations = 0;  // coordinate updates
  int epochs = 0;
  bool converged = true;
  std::vector<double> objective_per_epoch;
};

// Per-pixel linear classifier. A constant model (single-class training labels)
// has zero weights and bias +1 or -1.
struct LinearPixelModel {
  IndexSet members;
  Vector weights;
  double bias = 0.0;
  bool constant = false;
  Vector dual;  // solver's dual variables, one per training trial
  SvmDiagnostics diagnostics;

  double decision(const Vector& feature) const;
};

// Soft-margin linear SVM trained by dual coordinate ascent with the bias folded
// in as a constant feature. Labels are 0/1 (mapped to -1/+1).
LinearPixelModel train_pixel_svm(const Matrix& features, const std::vector<std::uint8_t>& labels,
                                 const SvmConfig& cfg = {});

// 1 iff weights . x + bias >= 0.
int predict_pixel_svm(const LinearPixelModel& model, const Vector& feature);

// Trains one model per pixel on standardized responses restricted to its bin.
std::vector<LinearPixelModel> train_svm_decoder(const StimulusSet& stimuli, const Matrix& responses,
                                                const std::vector<IndexSet>& bins, const SvmConfig& cfg,
                                                unsigned threads = 0);

// Row-major rows x cols image from one standardized response vector.
BinaryMatrix decode_image_svm(const std::vector<LinearPixelModel>& models, const Vector& response,
                              const CorrelationGraph& graph, int rows, int cols);
BinaryMatrix decode_image_svm(const std::vector<LinearPixelModel>& models, const Vector& response,
                              int rows, int cols);

// svm_models.csv: pixel, bias, member:weight ...
void write_svm_models(const std::filesystem::path& path, const std::vector<LinearPixelModel>& models);
std::vector<LinearPixelModel> read_svm_models(const std::filesystem::path& path);

}  // namespace corrnet
