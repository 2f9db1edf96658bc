#include <algorithm>
#include <cmath>

#include "corrnet/dataset.hpp"
#include "corrnet/error.hpp"
#include "corrnet/rng.hpp"

namespace corrnet {

void StimulusSet::validate() const {
  if (rows < 1 || cols < 1) throw InvalidArgument("stimulus grid must be at least 1x1");
  if (values.cols() != static_cast<Eigen::Index>(rows) * cols) {
    throw InvalidArgument("stimulus column count differs from rows*cols");
  }
  if (values.rows() < 1) throw InvalidArgument("stimulus set has no trials");
  if ((values.array() > 1).any()) throw InvalidArgument("stimulus entries must be 0 or 1");
  if (!categories.empty() && static_cast<int>(categories.size()) != trials()) {
    throw InvalidArgument("category tags do not match the trial count");
  }
}

VoxelLayout::VoxelLayout(std::vector<Point3> positions) : positions_(std::move(positions)) {
  for (const auto& p : positions_) {
    if (!p.allFinite()) throw InvalidArgument("voxel position is not finite");
  }
  // Sort by x so only a narrow window needs pairwise comparison.
  std::vector<int> order(positions_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return positions_[a].x() < positions_[b].x(); });
  constexpr double kTol = 1e-9;
  for (std::size_t a = 0; a < order.size(); ++a) {
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      const auto& pa = positions_[order[a]];
      const auto& pb = positions_[order[b]];
      if (pb.x() - pa.x() > kTol) break;
      if ((pa - pb).norm() <= kTol) {
        throw InvalidArgument("duplicate voxel positions at indices " +
                              std::to_string(std::min(order[a], order[b])) + " and " +
                              std::to_string(std::max(order[a], order[b])));
      }
    }
  }
}

void ResponseSet::validate() const {
  if (values.cols() != layout.size()) {
    throw InvalidArgument("response column count differs from the voxel count");
  }
  if (!values.allFinite()) throw InvalidArgument("responses contain non-finite values");
  if (!zero_variance.empty() && static_cast<int>(zero_variance.size()) != voxels()) {
    throw InvalidArgument("zero-variance flags do not match the voxel count");
  }
}

Standardization Standardization::fit(const Matrix& values) {
  const auto n = values.rows();
  if (n < 2) throw InvalidArgument("standardization needs at least 2 trials");
  Standardization s;
  s.mean = values.colwise().mean().transpose();
  s.stddev.resize(values.cols());
  s.zero_variance.assign(static_cast<std::size_t>(values.cols()), 0);
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    const double ss = (values.col(j).array() - s.mean(j)).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    // Relative test so large constant offsets are still caught.
    const double scale = std::max(1.0, std::abs(s.mean(j)));
    s.stddev(j) = sd;
    if (!(sd > 1e-12 * scale)) s.zero_variance[static_cast<std::size_t>(j)] = 1;
  }
  return s;
}

Matrix Standardization::apply(const Matrix& values) const {
  if (values.cols() != mean.size()) throw InvalidArgument("standardization width mismatch");
  Matrix out(values.rows(), values.cols());
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    if (zero_variance[static_cast<std::size_t>(j)]) {
      out.col(j).setZero();
    } else {
      out.col(j) = (values.col(j).array() - mean(j)) / stddev(j);
    }
  }
  return out;
}

Vector Standardization::apply(const Vector& response) const {
  if (response.size() != mean.size()) throw InvalidArgument("standardization width mismatch");
  Vector out(response.size());
  for (Eigen::Index j = 0; j < response.size(); ++j) {
    out(j) = zero_variance[static_cast<std::size_t>(j)] ? 0.0 : (response(j) - mean(j)) / stddev(j);
  }
  return out;
}

ResponseSet standardize(const ResponseSet& responses) {
  if (responses.trials() < 2) throw InvalidArgument("standardize needs at least 2 trials");
  const auto stats = Standardization::fit(responses.values);
  ResponseSet out;
  out.values = stats.apply(responses.values);
  out.layout = responses.layout;
  out.standardized = true;
  out.zero_variance = stats.zero_variance;
  return out;
}

StimulusSet generate_random_stimuli(int count, int rows, int cols, std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("trial count must be positive");
  if (rows < 1 || cols < 1) throw InvalidArgument("grid dimensions must be positive");
  Rng rng(derive_seed(seed, "random-stimuli"));
  StimulusSet s;
  s.rows = rows;
  s.cols = cols;
  s.values.resize(count, static_cast<Eigen::Index>(rows) * cols);
  for (int i = 0; i < count; ++i) {
    for (Eigen::Index k = 0; k < s.values.cols(); ++k) {
      s.values(i, k) = static_cast<std::uint8_t>(rng.next_u64() >> 63);
    }
  }
  s.categories.assign(static_cast<std::size_t>(count), "random");
  return s;
}

}  // namespace corrnet
