#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sys/wait.h>

#include "corrnet/error.hpp"
#include "corrnet/pipeline.hpp"

using namespace corrnet;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("corrnet_test_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

fs::path write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  EXPECT_TRUE(in.good()) << p;
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string config_error_key(const std::optional<fs::path>& path,
                             const std::vector<std::pair<std::string, std::string>>& overrides) {
  try {
    parse_config(path, overrides);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<no error>";
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CORRNET_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Smaller than the default benchmark so the suite stays quick.
std::vector<std::pair<std::string, std::string>> quick(const fs::path& out, const std::string& decoders) {
  return {{"out", out.string()}, {"decoders", decoders}, {"train_trials", "120"}, {"test_repetitions", "1"},
          {"max_epochs", "20"}};
}

}  // namespace

TEST(Config, EmptyFileGivesDefaults) {
  const auto path = write_file(scratch("empty") / "c.txt", "");
  const auto cfg = parse_config(path);
  EXPECT_EQ(cfg.eps_corr, 0.5);
  EXPECT_EQ(cfg.eps_cv, 0.1);
  EXPECT_EQ(cfg.snn.lr, 0.005);
  EXPECT_EQ(cfg.decoders.size(), 4u);
  EXPECT_EQ(cfg.svm_radius, RadiusMode::SvmMinEdge);
  EXPECT_EQ(cfg.snn_radius, RadiusMode::SnnMeanDistance);
  EXPECT_EQ(cfg.train_trials, 352);
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.echo(), PipelineConfig{}.echo());
}

TEST(Config, OverridesWinOverFile) {
  const auto path = write_file(scratch("prec") / "c.txt", "# comment\neps_corr = 0.5\n\nseed=7\n");
  const auto cfg = parse_config(path, {{"eps_corr", "0.3"}});
  EXPECT_EQ(cfg.eps_corr, 0.3);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.synthetic.seed, 7u);
}

TEST(Config, ErrorsNameTheKey) {
  EXPECT_EQ(config_error_key(std::nullopt, {{"eps_corr", "1.5"}}), "eps_corr");
  EXPECT_EQ(config_error_key(std::nullopt, {{"eps_cv", "-0.1"}}), "eps_cv");
  EXPECT_EQ(config_error_key(std::nullopt, {{"eps_corr", "abc"}}), "eps_corr");
  EXPECT_EQ(config_error_key(std::nullopt, {{"no_such_key", "1"}}), "no_such_key");
  EXPECT_EQ(config_error_key(std::nullopt, {{"decoders", ""}}), "decoders");
  EXPECT_EQ(config_error_key(std::nullopt, {{"decoders", "svm,cnn"}}), "decoders");
  EXPECT_EQ(config_error_key(std::nullopt, {{"svm_radius", "widest"}}), "svm_radius");
  EXPECT_EQ(config_error_key(std::nullopt, {{"svm_c", "0"}}), "svm_c");
  EXPECT_EQ(config_error_key(std::nullopt, {{"jitter", "0.9"}}), "snr");
  EXPECT_EQ(config_error_key(write_file(scratch("bad") / "c.txt", "eps_corr\n"), {}), "eps_corr");
}

TEST(Config, EchoRoundTrips) {
  auto cfg = parse_config(std::nullopt, {{"decoders", "pure-snn,svm"}, {"snr", "inf"}, {"abs_correlation", "true"},
                                         {"snn_radius", "svm-min-edge"}, {"out", "/tmp/x y"}});
  const auto path = write_file(scratch("echo") / "c.txt", cfg.echo());
  EXPECT_EQ(parse_config(path).echo(), cfg.echo());
  EXPECT_EQ(cfg.decoders, (std::vector<Decoder>{Decoder::PureSnn, Decoder::CorrNetSvm}));
  EXPECT_TRUE(std::isinf(cfg.synthetic.snr));
  for (const auto& key : PipelineConfig::keys()) EXPECT_NE(cfg.echo().find(key + "="), std::string::npos);
}

TEST(Pipeline, ReportCoversEnabledDecodersAndIsReproducible) {
  const auto a = scratch("run_a"), b = scratch("run_b");
  const auto ra = run_pipeline(parse_config(std::nullopt, quick(a, "svm,pure-svm")));
  const auto rb = run_pipeline(parse_config(std::nullopt, quick(b, "svm,pure-svm")));
  ASSERT_EQ(ra.methods.size(), 2u);
  EXPECT_NE(ra.find(Decoder::CorrNetSvm), nullptr);
  EXPECT_NE(ra.find(Decoder::PureSvm), nullptr);
  EXPECT_EQ(ra.find(Decoder::CorrNetSnn), nullptr);
  ASSERT_EQ(ra.graphs.size(), 1u);
  EXPECT_EQ(ra.digests, rb.digests);
  for (const char* rel : {"eval/report.csv", "eval/bins.csv", "eval/corrnet-svm/pixel_accuracy.pgm",
                          "decode/corrnet-svm/montage.pgm", "corr/svm-min-edge/bin_heatmap.pgm",
                          "models/pure-svm/svm_models.csv"}) {
    EXPECT_EQ(slurp(a / rel), slurp(b / rel)) << rel;
  }
  EXPECT_EQ(slurp(a / "config.txt"), ra.config_echo);
  EXPECT_TRUE(fs::exists(a / "timings.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Pipeline, SvmOutputsIndependentOfSnnDecoders) {
  const auto a = scratch("iso_a"), b = scratch("iso_b");
  run_pipeline(parse_config(std::nullopt, quick(a, "svm")));
  run_pipeline(parse_config(std::nullopt, quick(b, "svm,snn,pure-snn")));
  EXPECT_EQ(slurp(a / "models/corrnet-svm/svm_models.csv"), slurp(b / "models/corrnet-svm/svm_models.csv"));
  EXPECT_EQ(slurp(a / "decode/corrnet-svm/predictions.csv"), slurp(b / "decode/corrnet-svm/predictions.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Pipeline, StagesComposeToFullRun) {
  const auto a = scratch("stages_a"), b = scratch("stages_b");
  const auto ca = parse_config(std::nullopt, quick(a, "svm,snn"));
  stage_generate(ca);
  stage_correlate(ca);
  stage_train(ca);
  stage_decode(ca);
  const auto ra = stage_evaluate(ca);
  run_pipeline(parse_config(std::nullopt, quick(b, "svm,snn")));
  EXPECT_EQ(slurp(a / "eval/report.csv"), slurp(b / "eval/report.csv"));
  EXPECT_EQ(ra.methods.size(), 2u);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Pipeline, NoiselessSnnReconstructsEachTrial) {
  const auto out = scratch("noiseless_snn");
  const auto r = run_pipeline(parse_config(std::nullopt, {{"snr", "inf"}, {"decoders", "snn"}, {"out", out.string()}}));
  const auto* m = r.find(Decoder::CorrNetSnn);
  ASSERT_NE(m, nullptr);
  for (std::size_t t = 0; t < m->accuracy.per_trial.size(); ++t) EXPECT_GE(m->accuracy.per_trial[t], 0.90) << "trial " << t;
  fs::remove_all(out);
}

TEST(Pipeline, FailureNamesStageAndRemovesOutputs) {
  const auto out = scratch("fail");
  auto overrides = quick(out, "svm");
  overrides.push_back({"grid_z", "1"});
  overrides.push_back({"jitter", "0"});
  const auto cfg = parse_config(std::nullopt, overrides);
  try {
    run_pipeline(cfg);
    FAIL() << "expected a pipeline error";
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), "corr");
  }
  EXPECT_FALSE(fs::exists(out));
}

TEST(Pipeline, MissingInputsFailTheStage) {
  const auto out = scratch("missing");
  const auto cfg = parse_config(std::nullopt, quick(out, "svm"));
  EXPECT_THROW(stage_train(cfg), FormatError);
}

TEST(Cli, ExitCodes) {
  const auto out = scratch("cli");
  EXPECT_EQ(run_cli("run --out " + out.string() + " --set no_such_key=1"), 2);
  EXPECT_EQ(run_cli("run --out " + out.string() + " --eps-corr 1.5"), 2);
  EXPECT_EQ(run_cli("run --out " + out.string() + " --decoders ''"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("train --out " + out.string() + " --decoders svm"), 1);
  EXPECT_EQ(run_cli("gen --out " + out.string() + " --seed 5 --set train_trials=40"), 0);
  EXPECT_TRUE(fs::exists(out / "data" / "train" / "stimuli.csv"));
  EXPECT_NE(slurp(out / "config.txt").find("seed=5"), std::string::npos);
  fs::remove_all(out);
}
