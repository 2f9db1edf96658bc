#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "corrnet/correlation.hpp"
#include "corrnet/dataset.hpp"
#include "corrnet/evaluation.hpp"
#include "corrnet/svm.hpp"
#include "corrnet/tempotron.hpp"
#include "corrnet/topology.hpp"

namespace corrnet {

enum class Decoder { CorrNetSvm, CorrNetSnn, PureSvm, PureSnn };

// Config token ("svm", "snn", "pure-svm", "pure-snn").
const char* decoder_key(Decoder d);
// Report name ("corrnet-svm", ...).
const char* decoder_method(Decoder d);
bool is_snn(Decoder d);
bool is_pure(Decoder d);

struct PipelineConfig {
  double eps_cv = 0.1;
  double eps_corr = 0.5;
  bool abs_correlation = false;
  std::vector<Decoder> decoders{Decoder::CorrNetSvm, Decoder::CorrNetSnn, Decoder::PureSvm, Decoder::PureSnn};
  RadiusMode svm_radius = RadiusMode::SvmMinEdge;
  RadiusMode snn_radius = RadiusMode::SnnMeanDistance;
  SvmConfig svm;
  SimParams snn;
  SyntheticConfig synthetic;
  int rows = 12;
  int cols = 12;
  int train_trials = 352;
  int test_repetitions = 4;  // passes over the 20-shape catalog
  std::uint64_t seed = 42;
  std::filesystem::path out = "corrnet_out";
  unsigned threads = 0;

  // Sets one key from its text form; throws ConfigError naming the key.
  void set(const std::string& key, const std::string& value);
  // Cross-field checks; throws ConfigError.
  void validate() const;
  // Effective configuration as key=value lines in a fixed order.
  std::string echo() const;

  static const std::vector<std::string>& keys();
};

// Key=value file (blank lines and '#' comments allowed) with overrides applied
// on top in order. An empty path means defaults plus overrides.
PipelineConfig parse_config(const std::optional<std::filesystem::path>& path,
                            const std::vector<std::pair<std::string, std::string>>& overrides = {});

class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string stage, const std::string& what)
      : std::runtime_error("stage '" + stage + "': " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct MethodResult {
  Decoder decoder;
  AccuracyReport accuracy;
  PatchCurve patch_curve;
};

struct GraphSummary {
  RadiusMode mode;
  BinStats stats;
  BinRecovery recovery;
  int fallback_pixels = 0;
};

struct RunReport {
  std::string config_echo;
  std::map<std::string, std::string> digests;  // dataset split -> content hash
  std::vector<GraphSummary> graphs;
  std::vector<MethodResult> methods;
  std::vector<std::pair<std::string, double>> timings;  // stage -> seconds

  const MethodResult* find(Decoder d) const;
  const GraphSummary* find(RadiusMode m) const;
};

// Stages; each reads its inputs from and writes its outputs to cfg.out.
void stage_generate(const PipelineConfig& cfg);
std::vector<GraphSummary> stage_correlate(const PipelineConfig& cfg);
void stage_train(const PipelineConfig& cfg);
void stage_decode(const PipelineConfig& cfg);
RunReport stage_evaluate(const PipelineConfig& cfg);

// All stages in order. On failure the outputs written by this run are removed
// and a PipelineError naming the stage is thrown.
RunReport run_pipeline(const PipelineConfig& cfg);

}  // namespace corrnet
