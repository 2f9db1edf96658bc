#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "corrnet/error.hpp"
#include "corrnet/pipeline.hpp"

namespace {

struct Options {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> decoders;
  std::optional<std::string> eps_corr;
  std::optional<std::string> eps_cv;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "key=value configuration file");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--decoders", o.decoders, "comma list of svm, snn, pure-svm, pure-snn");
  cmd->add_option("--eps-corr", o.eps_corr, "pixel-voxel correlation threshold");
  cmd->add_option("--eps-cv", o.eps_cv, "voxel coupling threshold");
  cmd->add_option("--set", o.sets, "override any config key (key=value), repeatable");
}

corrnet::PipelineConfig resolve(const Options& o) {
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw corrnet::ConfigError(s, "expected key=value");
    overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (o.seed) overrides.emplace_back("seed", std::to_string(*o.seed));
  if (o.out) overrides.emplace_back("out", *o.out);
  if (o.decoders) overrides.emplace_back("decoders", *o.decoders);
  if (o.eps_corr) overrides.emplace_back("eps_corr", *o.eps_corr);
  if (o.eps_cv) overrides.emplace_back("eps_cv", *o.eps_cv);
  std::optional<std::filesystem::path> path;
  if (!o.config.empty()) path = o.config;
  return corrnet::parse_config(path, overrides);
}

void print_report(const corrnet::RunReport& report) {
  for (const auto& g : report.graphs) {
    std::cout << "bins " << corrnet::to_string(g.mode) << ": mean size " << g.stats.mean_size << ", utilization "
              << g.stats.utilization << ", recovery f1 " << g.recovery.mean_f1 << '\n';
  }
  for (const auto& m : report.methods) {
    std::cout << corrnet::decoder_method(m.decoder) << ": accuracy " << m.accuracy.mean << " (trial std "
              << m.accuracy.trial_std << ")\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topology-aware correlation network decoder for voxel responses"};
  app.require_subcommand(1);
  Options o;
  auto* gen = app.add_subcommand("gen", "generate synthetic training and test data");
  auto* corr = app.add_subcommand("corr", "build topology and correlation graphs");
  auto* train = app.add_subcommand("train", "train per-pixel decoders");
  auto* decode = app.add_subcommand("decode", "reconstruct test images");
  auto* eval = app.add_subcommand("eval", "score reconstructions");
  auto* run = app.add_subcommand("run", "all stages in order");
  for (auto* cmd : {gen, corr, train, decode, eval, run}) add_common(cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  corrnet::PipelineConfig cfg;
  try {
    cfg = resolve(o);
  } catch (const corrnet::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  const char* stage = "run";
  try {
    if (gen->parsed()) {
      stage = "gen";
      corrnet::stage_generate(cfg);
    } else if (corr->parsed()) {
      stage = "corr";
      corrnet::stage_correlate(cfg);
    } else if (train->parsed()) {
      stage = "train";
      corrnet::stage_train(cfg);
    } else if (decode->parsed()) {
      stage = "decode";
      corrnet::stage_decode(cfg);
    } else if (eval->parsed()) {
      stage = "eval";
      print_report(corrnet::stage_evaluate(cfg));
    } else {
      print_report(corrnet::run_pipeline(cfg));
    }
  } catch (const corrnet::PipelineError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: stage '" << stage << "': " << e.what() << '\n';
    return 1;
  }
  return 0;
}
