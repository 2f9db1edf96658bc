#include <algorithm>
#include <cmath>
#include <limits>

#include "corrnet/error.hpp"
#include "corrnet/evaluation.hpp"

namespace corrnet {

AccuracyReport pixel_accuracy(const BinaryMatrix& predicted, const BinaryMatrix& truth, int rows, int cols,
                              const std::vector<std::string>& categories, std::string method) {
  if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols()) {
    throw InvalidArgument("predicted and true stimuli differ in shape");
  }
  if (truth.cols() != static_cast<Eigen::Index>(rows) * cols) throw InvalidArgument("pixel count differs from rows*cols");
  if (truth.rows() < 1) throw InvalidArgument("accuracy needs at least one trial");
  if (!categories.empty() && static_cast<Eigen::Index>(categories.size()) != truth.rows()) {
    throw InvalidArgument("category tags do not match the trial count");
  }
  const auto n = truth.rows();
  const auto d2 = truth.cols();

  AccuracyReport r;
  r.method = std::move(method);
  r.per_pixel = Matrix::Zero(rows, cols);
  r.per_trial.assign(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    long hits = 0;
    for (Eigen::Index k = 0; k < d2; ++k) {
      if (predicted(i, k) == truth(i, k)) {
        ++hits;
        r.per_pixel(k / cols, k % cols) += 1.0;
      }
    }
    r.per_trial[static_cast<std::size_t>(i)] = static_cast<double>(hits) / static_cast<double>(d2);
  }
  r.per_pixel /= static_cast<double>(n);
  r.mean = r.per_pixel.mean();

  double trial_mean = 0.0;
  for (double v : r.per_trial) trial_mean += v;
  trial_mean /= static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double v : r.per_trial) ss += (v - trial_mean) * (v - trial_mean);
    r.trial_std = std::sqrt(ss / static_cast<double>(n - 1));
  }

  std::map<std::string, std::pair<double, long>> sums;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    auto& s = sums[categories[i]];
    s.first += r.per_trial[i];
    s.second += 1;
  }
  for (const auto& [cat, s] : sums) r.category_mean[cat] = s.first / static_cast<double>(s.second);
  return r;
}

PatchCurve patch_scale_accuracy(const AccuracyReport& report) {
  const auto rows = report.per_pixel.rows();
  const auto cols = report.per_pixel.cols();
  PatchCurve curve;
  const auto smax = std::min(rows, cols);
  for (Eigen::Index s = 1; s <= smax; ++s) {
    const auto r0 = (rows - s) / 2;
    const auto c0 = (cols - s) / 2;
    if (s == rows && s == cols) {
      curve.values.push_back(report.per_pixel.mean());
    } else {
      curve.values.push_back(report.per_pixel.block(r0, c0, s, s).mean());
    }
  }
  return curve;
}

CountMatrix bin_heatmap(const CorrelationGraph& graph, int rows, int cols) {
  if (graph.pixels() != rows * cols) throw InvalidArgument("graph pixel count differs from rows*cols");
  CountMatrix heat(rows, cols);
  for (int k = 0; k < rows * cols; ++k) heat(k / cols, k % cols) = static_cast<int>(graph.bins[k].size());
  return heat;
}

BinRecovery bin_recovery(const CorrelationGraph& graph, const GroundTruth& truth) {
  const int d2 = graph.pixels();
  if (truth.relevance.cols() != d2 || truth.relevance.rows() != graph.voxels()) {
    throw InvalidArgument("ground truth does not match the graph dimensions");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  BinRecovery out;
  out.precision = Vector::Constant(d2, nan);
  out.recall = Vector::Constant(d2, nan);
  out.f1 = Vector::Constant(d2, nan);
  int counted = 0;
  for (int k = 0; k < d2; ++k) {
    const long truth_size = truth.relevance.col(k).cast<long>().sum();
    if (truth_size == 0) {
      ++out.skipped;
      continue;
    }
    long hit = 0;
    for (int j : graph.bins[k]) hit += truth.relevance(j, k);
    const double p = graph.bins[k].empty() ? 0.0 : static_cast<double>(hit) / graph.bins[k].size();
    const double r = static_cast<double>(hit) / truth_size;
    out.precision(k) = p;
    out.recall(k) = r;
    out.f1(k) = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    out.mean_precision += p;
    out.mean_recall += r;
    out.mean_f1 += out.f1(k);
    ++counted;
  }
  if (counted > 0) {
    out.mean_precision /= counted;
    out.mean_recall /= counted;
    out.mean_f1 /= counted;
  }
  return out;
}

Matrix to_gray(const Matrix& values, double lo, double hi) {
  const double span = hi > lo ? hi - lo : 1.0;
  return ((values.array() - lo) / span * 255.0).round().max(0.0).min(255.0).matrix();
}

}  // namespace corrnet
