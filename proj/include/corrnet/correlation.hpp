#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "corrnet/dataset.hpp"
#include "corrnet/types.hpp"

namespace corrnet {

// Pearson correlation between voxel response columns (D1 x D1). Symmetric,
// unit diagonal; zero-variance voxels are 0 off the diagonal. Requires N >= 2.
Matrix strength_correlation(const ResponseSet& responses);

struct CouplingMatrix {
  Matrix strength;  // p(S|POS)
  Matrix joint;     // strength gated elementwise by the binary position prior
  BinaryMatrix cv;  // joint >= eps_cv, diagonal forced to 1
  double eps_cv = 0.1;
};

// With abs_correlation set, |strength| is compared against eps_cv instead of
// the signed value.
CouplingMatrix voxel_coupling(const Matrix& strength, const BinaryMatrix& prior, double eps_cv,
                              bool abs_correlation = false);

struct PixelVoxelCorrelation {
  Matrix values;                              // D2 x D1
  std::vector<std::uint8_t> constant_pixel;   // pixel never varies in training
};

// Sample covariance between z-scored pixel labels and standardized voxel
// responses, i.e. their Pearson correlation. Throws InvalidArgument if the
// responses are not standardized or trial counts differ.
PixelVoxelCorrelation pixel_voxel_correlation(const ResponseSet& responses, const StimulusSet& stimuli);

struct CorrelationGraph {
  Matrix weights;  // D2 x D1, p(p_k, v_j | bin_k)
  Matrix pixvox;   // D2 x D1, p(p_k, v_j)
  BinaryMatrix corr;
  std::vector<IndexSet> bins;
  double eps_corr = 0.5;
  // p(bin_k) is fixed at one: every pixel owns a bin. Kept for the record.
  static constexpr double kBinPrior = 1.0;
  // Set for pixels where no voxel reached eps_corr and the argmax voxel seeded
  // the bin instead.
  std::vector<std::uint8_t> used_fallback;

  int pixels() const { return static_cast<int>(bins.size()); }
  int voxels() const { return static_cast<int>(weights.cols()); }
};

struct CorrelationOptions {
  bool abs_correlation = false;
  unsigned threads = 0;
};

// Probabilistic correlation graph. Per pixel, seeds (voxels whose pixel-voxel
// correlation reaches eps_corr) are visited in ascending order; each merges
// its coupled voxels into the candidate list and raises their weights by the
// pixel-voxel correlation scaled with a distance factor relative to the
// nearest candidate. The bin keeps candidates whose weight reaches eps_corr
// (or every candidate if none does).
CorrelationGraph build_correlation_graph(const CouplingMatrix& coupling, const Matrix& pixvox,
                                         const VoxelLayout& layout, double eps_corr,
                                         const CorrelationOptions& options = {});

struct BinStats {
  double mean_size = 0.0;
  double utilization = 0.0;  // |union of bins| / D1
};

BinStats bin_stats(const CorrelationGraph& graph);

// bins.csv (pixel, members...), weights.csv (D2 x D1), corr.csv (binary D2 x D1).
void write_graph_dump(const std::filesystem::path& dir, const CorrelationGraph& graph);
std::vector<IndexSet> read_bins(const std::filesystem::path& path);

}  // namespace corrnet
