#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "corrnet/correlation.hpp"
#include "corrnet/csv.hpp"
#include "corrnet/error.hpp"
#include "corrnet/parallel.hpp"

namespace corrnet {

Matrix strength_correlation(const ResponseSet& responses) {
  if (responses.trials() < 2) throw InvalidArgument("strength correlation needs at least 2 trials");
  const auto stats = Standardization::fit(responses.values);
  const Matrix z = stats.apply(responses.values);
  const int d1 = responses.voxels();
  const Matrix gram = (z.transpose() * z) / static_cast<double>(responses.trials() - 1);
  Matrix r(d1, d1);
  for (int j = 0; j < d1; ++j) {
    r(j, j) = 1.0;
    for (int m = j + 1; m < d1; ++m) {
      const double v = std::clamp(gram(j, m), -1.0, 1.0);
      r(j, m) = v;
      r(m, j) = v;
    }
  }
  return r;
}

CouplingMatrix voxel_coupling(const Matrix& strength, const BinaryMatrix& prior, double eps_cv,
                              bool abs_correlation) {
  if (strength.rows() != strength.cols() || prior.rows() != strength.rows() ||
      prior.cols() != strength.cols()) {
    throw InvalidArgument("strength and prior shapes differ");
  }
  CouplingMatrix out;
  out.eps_cv = eps_cv;
  out.strength = strength;
  out.joint = strength.cwiseProduct(prior.cast<double>());
  out.cv = BinaryMatrix::Zero(strength.rows(), strength.cols());
  for (Eigen::Index m = 0; m < strength.cols(); ++m) {
    for (Eigen::Index j = 0; j < strength.rows(); ++j) {
      const double v = abs_correlation ? std::abs(out.joint(j, m)) : out.joint(j, m);
      out.cv(j, m) = (j == m || v >= eps_cv) ? 1 : 0;
    }
  }
  return out;
}

PixelVoxelCorrelation pixel_voxel_correlation(const ResponseSet& responses, const StimulusSet& stimuli) {
  if (!responses.standardized) throw InvalidArgument("pixel-voxel correlation needs standardized responses");
  if (responses.trials() != stimuli.trials()) throw InvalidArgument("trial counts differ");
  if (responses.trials() < 2) throw InvalidArgument("pixel-voxel correlation needs at least 2 trials");
  const auto n = responses.trials();
  const Matrix labels = stimuli.values.cast<double>();
  const auto pixel_stats = Standardization::fit(labels);
  const Matrix zp = pixel_stats.apply(labels);
  PixelVoxelCorrelation out;
  out.values = (zp.transpose() * responses.values) / static_cast<double>(n - 1);
  out.constant_pixel = pixel_stats.zero_variance;
  for (Eigen::Index k = 0; k < out.values.rows(); ++k) {
    if (out.constant_pixel[k]) out.values.row(k).setZero();
  }
  return out;
}

namespace {

struct PixelResult {
  IndexSet bin;
  bool fallback = false;
};

}  // namespace

CorrelationGraph build_correlation_graph(const CouplingMatrix& coupling, const Matrix& pixvox,
                                         const VoxelLayout& layout, double eps_corr,
                                         const CorrelationOptions& options) {
  const int d1 = layout.size();
  const int d2 = static_cast<int>(pixvox.rows());
  if (pixvox.cols() != d1 || coupling.cv.rows() != d1 || coupling.cv.cols() != d1) {
    throw InvalidArgument("correlation graph inputs have inconsistent sizes");
  }
  if (!(eps_corr >= 0.0 && eps_corr <= 1.0)) throw InvalidArgument("eps_corr must lie in [0, 1]");

  std::vector<IndexSet> coupled(static_cast<std::size_t>(d1));
  for (int j = 0; j < d1; ++j) {
    for (int m = 0; m < d1; ++m) {
      if (coupling.cv(j, m)) coupled[j].push_back(m);
    }
  }
  const Matrix score = options.abs_correlation ? Matrix(pixvox.cwiseAbs()) : pixvox;

  CorrelationGraph g;
  g.eps_corr = eps_corr;
  g.pixvox = pixvox;
  g.weights = score;
  std::vector<PixelResult> results(static_cast<std::size_t>(d2));

  parallel_for(
      d2,
      [&](int k) {
        auto w = g.weights.row(k);
        std::vector<char> in_list(static_cast<std::size_t>(d1), 0);
        IndexSet list;

        auto absorb_seed = [&](int j) {
          for (int m : coupled[j]) {
            if (!in_list[m]) {
              in_list[m] = 1;
              list.push_back(m);
            }
          }
          double nearest = std::numeric_limits<double>::infinity();
          for (int m : list) {
            if (m != j) nearest = std::min(nearest, layout.distance(j, m));
          }
          for (int m : list) {
            const double topo = m == j ? 1.0 : std::min(1.0, nearest / layout.distance(j, m));
            w(m) = std::max(w(m), score(k, m) * topo);
          }
        };

        bool seeded = false;
        for (int j = 0; j < d1; ++j) {
          if (score(k, j) >= eps_corr) {
            absorb_seed(j);
            seeded = true;
          }
        }
        if (!seeded) {
          int best = 0;
          for (int j = 1; j < d1; ++j) {
            if (w(j) > w(best)) best = j;
          }
          absorb_seed(best);
          results[k].fallback = true;
        }
        std::sort(list.begin(), list.end());
        for (int j : list) {
          if (w(j) >= eps_corr) results[k].bin.push_back(j);
        }
        if (results[k].bin.empty()) results[k].bin = list;
      },
      options.threads);

  g.corr = BinaryMatrix::Zero(d2, d1);
  g.bins.resize(static_cast<std::size_t>(d2));
  g.used_fallback.resize(static_cast<std::size_t>(d2));
  for (int k = 0; k < d2; ++k) {
    g.bins[k] = std::move(results[k].bin);
    g.used_fallback[k] = results[k].fallback ? 1 : 0;
    for (int j : g.bins[k]) g.corr(k, j) = 1;
  }
  return g;
}

BinStats bin_stats(const CorrelationGraph& graph) {
  BinStats s;
  if (graph.bins.empty()) return s;
  std::vector<char> used(static_cast<std::size_t>(graph.voxels()), 0);
  double total = 0.0;
  for (const auto& bin : graph.bins) {
    total += static_cast<double>(bin.size());
    for (int j : bin) used[j] = 1;
  }
  s.mean_size = total / static_cast<double>(graph.bins.size());
  const auto count = std::count(used.begin(), used.end(), 1);
  s.utilization = graph.voxels() > 0 ? static_cast<double>(count) / graph.voxels() : 0.0;
  return s;
}

void write_graph_dump(const std::filesystem::path& dir, const CorrelationGraph& graph) {
  std::filesystem::create_directories(dir);
  std::ofstream bins(dir / "bins.csv", std::ios::binary);
  if (!bins) throw IoError("cannot write " + (dir / "bins.csv").string());
  for (int k = 0; k < graph.pixels(); ++k) {
    bins << k;
    for (int j : graph.bins[k]) bins << ',' << j;
    bins << '\n';
  }
  csv::write_matrix(dir / "weights.csv", graph.weights);
  csv::write_matrix(dir / "corr.csv", graph.corr);
}

std::vector<IndexSet> read_bins(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  std::vector<IndexSet> bins(lines.size());
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto fields = csv::split(lines[r]);
    const auto k = csv::parse_int(fields[0], path.string(), r + 1);
    if (k != static_cast<long long>(r)) throw FormatError(path.string(), r + 1, "pixel index out of order");
    for (std::size_t f = 1; f < fields.size(); ++f) {
      bins[r].push_back(static_cast<int>(csv::parse_int(fields[f], path.string(), r + 1)));
    }
    if (bins[r].empty()) throw FormatError(path.string(), r + 1, "empty bin");
  }
  return bins;
}

}  // namespace corrnet
