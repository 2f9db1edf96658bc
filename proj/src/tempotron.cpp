#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "corrnet/csv.hpp"
#include "corrnet/error.hpp"
#include "corrnet/parallel.hpp"
#include "corrnet/rng.hpp"
#include "corrnet/tempotron.hpp"

namespace corrnet {

void SimParams::validate() const {
  if (!(tau_s > 0.0 && tau_m > tau_s)) throw InvalidArgument("need tau_m > tau_s > 0");
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (!(window >= dt)) throw InvalidArgument("window must be at least dt");
  if (!(lr >= 0.0)) throw InvalidArgument("learning rate must be non-negative");
  if (max_epochs < 0) throw InvalidArgument("max_epochs must be non-negative");
}

int SimParams::steps() const { return static_cast<int>(std::lround((window + 5.0 * tau_m) / dt)); }

PspKernel::PspKernel(const SimParams& p) : tau_m_(p.tau_m), tau_s_(p.tau_s) {
  peak_time_ = tau_m_ * tau_s_ / (tau_m_ - tau_s_) * std::log(tau_m_ / tau_s_);
  v0_ = 1.0 / (std::exp(-peak_time_ / tau_m_) - std::exp(-peak_time_ / tau_s_));
}

double PspKernel::operator()(double s) const {
  if (s < 0.0) return 0.0;
  return v0_ * (std::exp(-s / tau_m_) - std::exp(-s / tau_s_));
}

SpikeTrain encode_spikes(const Vector& feature, const Vector& range_min, const Vector& range_max,
                         const SimParams& params) {
  if (feature.size() != range_min.size() || feature.size() != range_max.size()) {
    throw InvalidArgument("feature and encoding ranges differ in length");
  }
  SpikeTrain out;
  out.times.resize(static_cast<std::size_t>(feature.size()));
  for (Eigen::Index i = 0; i < feature.size(); ++i) {
    const double span = range_max(i) - range_min(i);
    double t = params.window;
    if (span > 0.0) {
      const double u = std::clamp((feature(i) - range_min(i)) / span, 0.0, 1.0);
      t = (1.0 - u) * params.window;
    }
    out.times[static_cast<std::size_t>(i)] = std::round(t / params.dt) * params.dt;
  }
  return out;
}

namespace {

// Potential on the grid via two exponential filters; equivalent to summing
// w_i K(t - t_i) for spikes on grid points.
class Integrator {
 public:
  explicit Integrator(const SimParams& p)
      : params_(p),
        kernel_(p),
        steps_(p.steps()),
        decay_m_(std::exp(-p.dt / p.tau_m)),
        decay_s_(std::exp(-p.dt / p.tau_s)),
        drive_(static_cast<std::size_t>(steps_ + 1), 0.0) {
    // Same normalization as PspKernel.
    const double tp = kernel_.peak_time();
    v0_ = 1.0 / (std::exp(-tp / p.tau_m) - std::exp(-tp / p.tau_s));
  }

  int steps() const { return steps_; }
  const PspKernel& kernel() const { return kernel_; }

  int slot(double t) const { return static_cast<int>(std::lround(t / params_.dt)); }

  MembraneResult run(const std::vector<int>& slots, const Vector& weights, bool record) {
    std::fill(drive_.begin(), drive_.end(), 0.0);
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const int s = slots[i];
      if (s >= 0 && s <= steps_) drive_[static_cast<std::size_t>(s)] += weights(static_cast<Eigen::Index>(i));
    }
    MembraneResult r;
    if (record) r.trace.reserve(static_cast<std::size_t>(steps_ + 1));
    double xm = 0.0, xs = 0.0;
    double best = -std::numeric_limits<double>::infinity();
    int best_step = 0;
    for (int n = 0; n <= steps_; ++n) {
      xm = xm * decay_m_ + drive_[static_cast<std::size_t>(n)];
      xs = xs * decay_s_ + drive_[static_cast<std::size_t>(n)];
      const double v = params_.v_rest + v0_ * (xm - xs);
      if (v > best) {
        best = v;
        best_step = n;
      }
      if (!r.fired && v >= params_.v_thre) {
        r.fired = true;
        r.t_fire = n * params_.dt;
        if (record) r.trace.push_back(v);
      } else if (record) {
        r.trace.push_back(r.fired ? params_.v_rest : v);
      }
    }
    r.t_max = best_step * params_.dt;
    r.v_max = best;
    return r;
  }

 private:
  SimParams params_;
  PspKernel kernel_;
  int steps_;
  double decay_m_;
  double decay_s_;
  double v0_ = 1.0;
  std::vector<double> drive_;
};

std::vector<int> to_slots(const SpikeTrain& spikes, const Integrator& integ) {
  std::vector<int> slots(spikes.times.size());
  for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = integ.slot(spikes.times[i]);
  return slots;
}

void apply_delta(Vector& weights, const std::vector<int>& slots, int t_max_slot, double sign,
                 const std::vector<double>& kernel_table, double lr) {
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i] < t_max_slot) {
      weights(static_cast<Eigen::Index>(i)) += sign * lr * kernel_table[static_cast<std::size_t>(t_max_slot - slots[i])];
    }
  }
}

std::vector<double> kernel_table(const SimParams& p) {
  const PspKernel k(p);
  std::vector<double> table(static_cast<std::size_t>(p.steps() + 1));
  for (std::size_t n = 0; n < table.size(); ++n) table[n] = k(static_cast<double>(n) * p.dt);
  return table;
}

}  // namespace

MembraneResult simulate_membrane(const SpikeTrain& spikes, const Vector& weights, const SimParams& params,
                                 bool record_trace) {
  params.validate();
  if (spikes.afferents() != weights.size()) throw InvalidArgument("spike train and weights differ in length");
  Integrator integ(params);
  return integ.run(to_slots(spikes, integ), weights, record_trace);
}

Vector tempotron_delta(const SpikeTrain& spikes, const MembraneResult& outcome, int label, const SimParams& params) {
  Vector delta = Vector::Zero(spikes.afferents());
  const bool bright_error = label == 1 && !outcome.fired;
  const bool dark_error = label == 0 && outcome.fired;
  if (!bright_error && !dark_error) return delta;
  const PspKernel k(params);
  const double sign = bright_error ? 1.0 : -1.0;
  for (int i = 0; i < spikes.afferents(); ++i) {
    const double ti = spikes.times[static_cast<std::size_t>(i)];
    if (ti < outcome.t_max) delta(i) = sign * params.lr * k(outcome.t_max - ti);
  }
  return delta;
}

TempotronModel tempotron_update(const TempotronModel& model, const SpikeTrain& spikes, int label,
                                const SimParams& params) {
  const auto outcome = simulate_membrane(spikes, model.weights, params);
  TempotronModel out = model;
  out.weights += tempotron_delta(spikes, outcome, label, params);
  return out;
}

TempotronModel train_pixel_tempotron(const Matrix& features, const std::vector<std::uint8_t>& labels,
                                     const SimParams& params, const TempotronTraining& training) {
  params.validate();
  const auto n = features.rows();
  const auto d = features.cols();
  if (n < 1) throw InvalidArgument("tempotron training needs at least one trial");
  if (static_cast<Eigen::Index>(labels.size()) != n) throw InvalidArgument("label count differs from trial count");

  TempotronModel model;
  model.range_min = features.colwise().minCoeff().transpose();
  model.range_max = features.colwise().maxCoeff().transpose();
  Rng rng(training.seed);
  model.weights.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) model.weights(i) = training.init_max * rng.uniform();

  Integrator integ(params);
  const auto table = kernel_table(params);
  std::vector<std::vector<int>> slots(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector row = features.row(i).transpose();
    slots[static_cast<std::size_t>(i)] = to_slots(encode_spikes(row, model.range_min, model.range_max, params), integ);
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < params.max_epochs; ++epoch) {
    rng.shuffle(order);
    int errors = 0;
    for (int i : order) {
      const auto& s = slots[static_cast<std::size_t>(i)];
      const auto r = integ.run(s, model.weights, false);
      const int label = labels[static_cast<std::size_t>(i)] ? 1 : 0;
      if (label == 1 && !r.fired) {
        apply_delta(model.weights, s, integ.slot(r.t_max), 1.0, table, params.lr);
        ++errors;
      } else if (label == 0 && r.fired) {
        apply_delta(model.weights, s, integ.slot(r.t_max), -1.0, table, params.lr);
        ++errors;
      }
    }
    model.errors_per_epoch.push_back(errors);
    if (errors == 0) {
      model.converged = true;
      break;
    }
  }
  return model;
}

int predict_pixel_tempotron(const TempotronModel& model, const Vector& feature, const SimParams& params) {
  const auto spikes = encode_spikes(feature, model.range_min, model.range_max, params);
  return simulate_membrane(spikes, model.weights, params).fired ? 1 : 0;
}

namespace {

Vector gather(const Vector& v, const IndexSet& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) out(static_cast<Eigen::Index>(c)) = v(idx[c]);
  return out;
}

}  // namespace

std::vector<TempotronModel> train_snn_decoder(const StimulusSet& stimuli, const Matrix& responses,
                                              const std::vector<IndexSet>& bins, const SimParams& params,
                                              std::uint64_t master_seed, unsigned threads) {
  if (static_cast<int>(bins.size()) != stimuli.pixels()) throw InvalidArgument("one bin per pixel required");
  if (responses.rows() != stimuli.trials()) throw InvalidArgument("trial counts differ");
  std::vector<TempotronModel> models(bins.size());
  parallel_for(
      static_cast<int>(bins.size()),
      [&](int k) {
        Matrix features(responses.rows(), static_cast<Eigen::Index>(bins[k].size()));
        for (std::size_t c = 0; c < bins[k].size(); ++c) {
          features.col(static_cast<Eigen::Index>(c)) = responses.col(bins[k][c]);
        }
        std::vector<std::uint8_t> labels(static_cast<std::size_t>(stimuli.trials()));
        for (int i = 0; i < stimuli.trials(); ++i) labels[i] = stimuli.values(i, k);
        TempotronTraining training;
        training.seed = derive_seed(master_seed, "snn", static_cast<std::uint64_t>(k));
        models[k] = train_pixel_tempotron(features, labels, params, training);
        models[k].members = bins[k];
      },
      threads);
  return models;
}

BinaryMatrix decode_image_snn(const std::vector<TempotronModel>& models, const Vector& response,
                              const SimParams& params, int rows, int cols) {
  if (static_cast<int>(models.size()) != rows * cols) {
    throw InvalidArgument("expected " + std::to_string(rows * cols) + " pixel models, got " +
                          std::to_string(models.size()));
  }
  BinaryMatrix image(rows, cols);
  for (int k = 0; k < rows * cols; ++k) {
    image(k / cols, k % cols) =
        static_cast<std::uint8_t>(predict_pixel_tempotron(models[k], gather(response, models[k].members), params));
  }
  return image;
}

BinaryMatrix decode_image_snn(const std::vector<TempotronModel>& models, const Vector& response,
                              const CorrelationGraph& graph, const SimParams& params, int rows, int cols) {
  if (graph.pixels() != rows * cols) throw InvalidArgument("graph pixel count differs from the image size");
  for (std::size_t k = 0; k < models.size() && k < graph.bins.size(); ++k) {
    if (models[k].members != graph.bins[k]) {
      throw InvalidArgument("model for pixel " + std::to_string(k) + " was trained on a different bin");
    }
  }
  return decode_image_snn(models, response, params, rows, cols);
}

void write_snn_models(const std::filesystem::path& models_path, const std::filesystem::path& ranges_path,
                      const std::vector<TempotronModel>& models) {
  std::ofstream out(models_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + models_path.string());
  std::ofstream ranges(ranges_path, std::ios::binary);
  if (!ranges) throw IoError("cannot write " + ranges_path.string());
  for (std::size_t k = 0; k < models.size(); ++k) {
    const auto& m = models[k];
    out << k;
    ranges << k;
    for (std::size_t c = 0; c < m.members.size(); ++c) {
      const auto i = static_cast<Eigen::Index>(c);
      out << ',' << m.members[c] << ':' << csv::format_double(m.weights(i));
      ranges << ',' << m.members[c] << ':' << csv::format_double(m.range_min(i)) << ':'
             << csv::format_double(m.range_max(i));
    }
    out << '\n';
    ranges << '\n';
  }
}

std::vector<TempotronModel> read_snn_models(const std::filesystem::path& models_path,
                                            const std::filesystem::path& ranges_path) {
  const auto mfile = models_path.string();
  const auto rfile = ranges_path.string();
  const auto mlines = csv::read_lines(models_path);
  const auto rlines = csv::read_lines(ranges_path);
  if (mlines.size() != rlines.size()) throw FormatError(rfile, rlines.size(), "pixel count differs from " + mfile);
  std::vector<TempotronModel> models(mlines.size());
  for (std::size_t r = 0; r < mlines.size(); ++r) {
    const auto mf = csv::split(mlines[r]);
    const auto rf = csv::split(rlines[r]);
    if (mf.size() != rf.size()) throw FormatError(rfile, r + 1, "member count differs from " + mfile);
    if (csv::parse_int(mf[0], mfile, r + 1) != static_cast<long long>(r)) {
      throw FormatError(mfile, r + 1, "pixel index out of order");
    }
    auto& m = models[r];
    const auto width = static_cast<Eigen::Index>(mf.size() - 1);
    m.weights.resize(width);
    m.range_min.resize(width);
    m.range_max.resize(width);
    for (std::size_t f = 1; f < mf.size(); ++f) {
      const auto parts = csv::split(mf[f], ':');
      const auto rparts = csv::split(rf[f], ':');
      if (parts.size() != 2) throw FormatError(mfile, r + 1, "expected member:weight");
      if (rparts.size() != 3) throw FormatError(rfile, r + 1, "expected member:min:max");
      const int member = static_cast<int>(csv::parse_int(parts[0], mfile, r + 1));
      if (csv::parse_int(rparts[0], rfile, r + 1) != member) throw FormatError(rfile, r + 1, "member mismatch");
      const auto i = static_cast<Eigen::Index>(f - 1);
      m.members.push_back(member);
      m.weights(i) = csv::parse_double(parts[1], mfile, r + 1);
      m.range_min(i) = csv::parse_double(rparts[1], rfile, r + 1);
      m.range_max(i) = csv::parse_double(rparts[2], rfile, r + 1);
    }
  }
  return models;
}

}  // namespace corrnet
