#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "corrnet/correlation.hpp"
#include "corrnet/types.hpp"

namespace corrnet {

struct SimParams {
  double tau_m = 20.0;  // ms
  double tau_s = 5.0;   // ms
  double v_thre = 1.0;
  double v_rest = 0.6;
  double resistance = 1.0;  // recorded only; the PSP-sum form absorbs it
  double window = 100.0;    // ms
  double dt = 1.0;          // ms
  double lr = 0.005;
  int max_epochs = 500;

  void validate() const;
  // Number of grid intervals covering [0, window + 5 tau_m].
  int steps() const;
};

// Double-exponential PSP kernel with its continuous peak scaled to 1.
class PspKernel {
 public:
  explicit PspKernel(const SimParams& p);

  double operator()(double s) const;
  // Time of the kernel's maximum.
  double peak_time() const { return peak_time_; }

 private:
  double tau_m_;
  double tau_s_;
  double v0_;
  double peak_time_;
};

// One latency-coded spike per afferent, in ms within [0, window].
struct SpikeTrain {
  std::vector<double> times;

  int afferents() const { return static_cast<int>(times.size()); }
};

// u = clamp((x - min) / (max - min), 0, 1), t = (1 - u) * window rounded to
// the dt grid. Afferents with max <= min spike at the window end.
SpikeTrain encode_spikes(const Vector& feature, const Vector& range_min, const Vector& range_max,
                         const SimParams& params);

struct TempotronModel {
  IndexSet members;
  Vector weights;
  Vector range_min;
  Vector range_max;
  std::vector<int> errors_per_epoch;
  bool converged = false;

  int afferents() const { return static_cast<int>(weights.size()); }
};

struct MembraneResult {
  bool fired = false;
  double t_fire = -1.0;  // first threshold crossing, ms (-1 when silent)
  double t_max = 0.0;    // argmax of the unreset potential, earliest on ties
  double v_max = 0.0;
  // Sampled potential on the dt grid; after a crossing the neuron is reset to
  // v_rest and integration stops. Only filled on request.
  std::vector<double> trace;
};

MembraneResult simulate_membrane(const SpikeTrain& spikes, const Vector& weights, const SimParams& params,
                                 bool record_trace = false);
inline MembraneResult simulate_membrane(const SpikeTrain& spikes, const TempotronModel& model,
                                        const SimParams& params, bool record_trace = false) {
  return simulate_membrane(spikes, model.weights, params, record_trace);
}

// Weight change for one pattern: +lr * K(t_max - t_i) over afferents with
// t_i < t_max on a bright error (label 1, silent), the negative on a dark
// error (label 0, fired), zero otherwise.
Vector tempotron_delta(const SpikeTrain& spikes, const MembraneResult& outcome, int label, const SimParams& params);
TempotronModel tempotron_update(const TempotronModel& model, const SpikeTrain& spikes, int label,
                                const SimParams& params);

struct TempotronTraining {
  std::uint64_t seed = 0;
  double init_max = 0.01;  // initial weights ~ U[0, init_max]
};

// Encoding ranges are frozen from the training features; epochs visit trials
// in a seeded shuffled order until an epoch is error-free or max_epochs pass.
TempotronModel train_pixel_tempotron(const Matrix& features, const std::vector<std::uint8_t>& labels,
                                     const SimParams& params, const TempotronTraining& training = {});

int predict_pixel_tempotron(const TempotronModel& model, const Vector& feature, const SimParams& params);

// Per-pixel seeds come from (master seed, "snn", pixel index).
std::vector<TempotronModel> train_snn_decoder(const StimulusSet& stimuli, const Matrix& responses,
                                              const std::vector<IndexSet>& bins, const SimParams& params,
                                              std::uint64_t master_seed, unsigned threads = 0);

BinaryMatrix decode_image_snn(const std::vector<TempotronModel>& models, const Vector& response,
                              const SimParams& params, int rows, int cols);
BinaryMatrix decode_image_snn(const std::vector<TempotronModel>& models, const Vector& response,
                              const CorrelationGraph& graph, const SimParams& params, int rows, int cols);

// snn_models.csv: pixel, member:weight ...; encoding ranges go to a separate
// file (pixel, member:min:max ...).
void write_snn_models(const std::filesystem::path& models_path, const std::filesystem::path& ranges_path,
                      const std::vector<TempotronModel>& models);
std::vector<TempotronModel> read_snn_models(const std::filesystem::path& models_path,
                                            const std::filesystem::path& ranges_path);

}  // namespace corrnet
