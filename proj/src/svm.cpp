#include <algorithm>
#include <cmath>
#include <fstream>

#include "corrnet/csv.hpp"
#include "corrnet/error.hpp"
#include "corrnet/parallel.hpp"
#include "corrnet/svm.hpp"

namespace corrnet {

void SvmConfig::validate() const {
  if (!(c > 0.0)) throw InvalidArgument("SVM C must be positive");
  if (!(tolerance > 0.0)) throw InvalidArgument("SVM tolerance must be positive");
  if (max_updates < 0) throw InvalidArgument("SVM update budget must be non-negative");
}

double LinearPixelModel::decision(const Vector& feature) const {
  if (feature.size() != weights.size()) {
    throw InvalidArgument("feature length " + std::to_string(feature.size()) + " differs from model width " +
                          std::to_string(weights.size()));
  }
  return weights.dot(feature) + bias;
}

LinearPixelModel train_pixel_svm(const Matrix& features, const std::vector<std::uint8_t>& labels,
                                 const SvmConfig& cfg) {
  cfg.validate();
  const auto n = features.rows();
  const auto d = features.cols();
  if (n < 1) throw InvalidArgument("SVM training needs at least one trial");
  if (static_cast<Eigen::Index>(labels.size()) != n) throw InvalidArgument("label count differs from trial count");
  if (!features.allFinite()) throw InvalidArgument("SVM features must be finite");

  LinearPixelModel model;
  model.weights = Vector::Zero(d);
  model.dual = Vector::Zero(n);
  const auto positives = std::count_if(labels.begin(), labels.end(), [](auto v) { return v != 0; });
  if (positives == 0 || positives == n) {
    model.constant = true;
    model.bias = positives == n ? 1.0 : -1.0;
    return model;
  }

  constexpr double kBiasFeature = 1.0;
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = labels[i] ? 1.0 : -1.0;
  Vector qdiag = features.rowwise().squaredNorm();
  qdiag.array() += kBiasFeature * kBiasFeature;

  Vector w = Vector::Zero(d);
  double w_bias = 0.0;
  Vector& alpha = model.dual;
  const long budget = cfg.max_updates > 0 ? cfg.max_updates : 10L * n * std::max<Eigen::Index>(d, 1);
  auto& diag = model.diagnostics;
  diag.converged = false;

  auto dual_objective = [&] { return alpha.sum() - 0.5 * (w.squaredNorm() + w_bias * w_bias); };

  while (diag.iterations < budget) {
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n && diag.iterations < budget; ++i, ++diag.iterations) {
      const double g = y(i) * (features.row(i).dot(w) + w_bias * kBiasFeature) - 1.0;
      double pg = g;
      if (alpha(i) <= 0.0) {
        pg = std::min(g, 0.0);
      } else if (alpha(i) >= cfg.c) {
        pg = std::max(g, 0.0);
      }
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (std::abs(pg) > 1e-12) {
        const double old = alpha(i);
        alpha(i) = std::clamp(old - g / qdiag(i), 0.0, cfg.c);
        const double step = (alpha(i) - old) * y(i);
        w.noalias() += step * features.row(i).transpose();
        w_bias += step * kBiasFeature;
      }
    }
    ++diag.epochs;
    diag.kkt_residual = pg_max - pg_min;
    diag.objective_per_epoch.push_back(dual_objective());
    if (diag.kkt_residual <= cfg.tolerance) {
      diag.converged = true;
      break;
    }
  }
  diag.dual_objective = dual_objective();
  model.weights = w;
  model.bias = w_bias * kBiasFeature;
  return model;
}

int predict_pixel_svm(const LinearPixelModel& model, const Vector& feature) {
  if (model.constant && feature.size() == model.weights.size()) return model.bias >= 0.0 ? 1 : 0;
  return model.decision(feature) >= 0.0 ? 1 : 0;
}

namespace {

Matrix gather_columns(const Matrix& values, const IndexSet& cols) {
  Matrix out(values.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = values.col(cols[c]);
  return out;
}

Vector gather(const Vector& v, const IndexSet& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) out(static_cast<Eigen::Index>(c)) = v(idx[c]);
  return out;
}

}  // namespace

std::vector<LinearPixelModel> train_svm_decoder(const StimulusSet& stimuli, const Matrix& responses,
                                                const std::vector<IndexSet>& bins, const SvmConfig& cfg,
                                                unsigned threads) {
  if (static_cast<int>(bins.size()) != stimuli.pixels()) throw InvalidArgument("one bin per pixel required");
  if (responses.rows() != stimuli.trials()) throw InvalidArgument("trial counts differ");
  std::vector<LinearPixelModel> models(bins.size());
  parallel_for(
      static_cast<int>(bins.size()),
      [&](int k) {
        std::vector<std::uint8_t> labels(static_cast<std::size_t>(stimuli.trials()));
        for (int i = 0; i < stimuli.trials(); ++i) labels[i] = stimuli.values(i, k);
        models[k] = train_pixel_svm(gather_columns(responses, bins[k]), labels, cfg);
        models[k].members = bins[k];
      },
      threads);
  return models;
}

BinaryMatrix decode_image_svm(const std::vector<LinearPixelModel>& models, const Vector& response, int rows,
                              int cols) {
  if (static_cast<int>(models.size()) != rows * cols) {
    throw InvalidArgument("expected " + std::to_string(rows * cols) + " pixel models, got " +
                          std::to_string(models.size()));
  }
  BinaryMatrix image(rows, cols);
  for (int k = 0; k < rows * cols; ++k) {
    image(k / cols, k % cols) = static_cast<std::uint8_t>(predict_pixel_svm(models[k], gather(response, models[k].members)));
  }
  return image;
}

BinaryMatrix decode_image_svm(const std::vector<LinearPixelModel>& models, const Vector& response,
                              const CorrelationGraph& graph, int rows, int cols) {
  if (graph.pixels() != rows * cols) throw InvalidArgument("graph pixel count differs from the image size");
  for (std::size_t k = 0; k < models.size() && k < graph.bins.size(); ++k) {
    if (models[k].members != graph.bins[k]) {
      throw InvalidArgument("model for pixel " + std::to_string(k) + " was trained on a different bin");
    }
  }
  return decode_image_svm(models, response, rows, cols);
}

void write_svm_models(const std::filesystem::path& path, const std::vector<LinearPixelModel>& models) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t k = 0; k < models.size(); ++k) {
    const auto& m = models[k];
    out << k << ',' << csv::format_double(m.bias);
    for (std::size_t c = 0; c < m.members.size(); ++c) {
      out << ',' << m.members[c] << ':' << csv::format_double(m.weights(static_cast<Eigen::Index>(c)));
    }
    out << '\n';
  }
}

std::vector<LinearPixelModel> read_svm_models(const std::filesystem::path& path) {
  const auto file = path.string();
  const auto lines = csv::read_lines(path);
  std::vector<LinearPixelModel> models(lines.size());
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto fields = csv::split(lines[r]);
    if (fields.size() < 2) throw FormatError(file, r + 1, "expected pixel and bias");
    if (csv::parse_int(fields[0], file, r + 1) != static_cast<long long>(r)) {
      throw FormatError(file, r + 1, "pixel index out of order");
    }
    auto& m = models[r];
    m.bias = csv::parse_double(fields[1], file, r + 1);
    m.weights.resize(static_cast<Eigen::Index>(fields.size() - 2));
    for (std::size_t f = 2; f < fields.size(); ++f) {
      const auto colon = fields[f].find(':');
      if (colon == std::string_view::npos) throw FormatError(file, r + 1, "expected member:weight");
      m.members.push_back(static_cast<int>(csv::parse_int(fields[f].substr(0, colon), file, r + 1)));
      m.weights(static_cast<Eigen::Index>(f - 2)) = csv::parse_double(fields[f].substr(colon + 1), file, r + 1);
    }
    m.constant = m.weights.isZero(0.0) && std::abs(m.bias) == 1.0;
  }
  return models;
}

}  // namespace corrnet
