#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "corrnet/csv.hpp"
#include "corrnet/error.hpp"
#include "corrnet/pipeline.hpp"
#include "corrnet/rng.hpp"

namespace fs = std::filesystem;

namespace corrnet {

const MethodResult* RunReport::find(Decoder d) const {
  for (const auto& m : methods) {
    if (m.decoder == d) return &m;
  }
  return nullptr;
}

const GraphSummary* RunReport::find(RadiusMode m) const {
  for (const auto& g : graphs) {
    if (g.mode == m) return &g;
  }
  return nullptr;
}

namespace {

constexpr const char* kOutputs[] = {"config.txt", "data", "corr", "models", "decode", "eval", "timings.csv"};

fs::path data_dir(const PipelineConfig& cfg, const char* split) { return cfg.out / "data" / split; }
fs::path corr_dir(const PipelineConfig& cfg, RadiusMode m) { return cfg.out / "corr" / to_string(m); }
fs::path model_dir(const PipelineConfig& cfg, Decoder d) { return cfg.out / "models" / decoder_method(d); }
fs::path decode_dir(const PipelineConfig& cfg, Decoder d) { return cfg.out / "decode" / decoder_method(d); }

RadiusMode mode_for(const PipelineConfig& cfg, Decoder d) { return is_snn(d) ? cfg.snn_radius : cfg.svm_radius; }

// Radius modes needed by the enabled CorrNet decoders, without duplicates.
std::vector<RadiusMode> graph_modes(const PipelineConfig& cfg) {
  std::vector<RadiusMode> modes;
  for (Decoder d : cfg.decoders) {
    if (is_pure(d)) continue;
    const RadiusMode m = mode_for(cfg, d);
    if (std::find(modes.begin(), modes.end(), m) == modes.end()) modes.push_back(m);
  }
  return modes;
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::uint64_t file_hash(const fs::path& path, std::uint64_t h) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return h;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string digest(const fs::path& dir) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char* name : {"meta.txt", "stimuli.csv", "responses.csv", "positions.csv"}) h = file_hash(dir / name, h);
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void write_standardization(const fs::path& path, const Standardization& s) {
  auto out = open_out(path);
  out << "voxel,mean,stddev,zero_variance\n";
  for (Eigen::Index j = 0; j < s.mean.size(); ++j) {
    out << j << ',' << csv::format_double(s.mean(j)) << ',' << csv::format_double(s.stddev(j)) << ','
        << int(s.zero_variance[static_cast<std::size_t>(j)]) << '\n';
  }
}

Standardization read_standardization(const fs::path& path, int voxels) {
  const auto lines = csv::read_lines(path);
  if (lines.size() != static_cast<std::size_t>(voxels) + 1) {
    throw FormatError(path.string(), lines.size(), "expected " + std::to_string(voxels) + " voxel rows");
  }
  Standardization s;
  s.mean.resize(voxels);
  s.stddev.resize(voxels);
  s.zero_variance.assign(static_cast<std::size_t>(voxels), 0);
  for (int j = 0; j < voxels; ++j) {
    const std::size_t line = static_cast<std::size_t>(j) + 2;
    const auto f = csv::split(lines[static_cast<std::size_t>(j) + 1]);
    if (f.size() != 4) throw FormatError(path.string(), line, "expected 4 fields");
    s.mean(j) = csv::parse_double(f[1], path.string(), line);
    s.stddev(j) = csv::parse_double(f[2], path.string(), line);
    s.zero_variance[static_cast<std::size_t>(j)] = csv::parse_int(f[3], path.string(), line) != 0;
  }
  return s;
}

// Training responses standardized with their own statistics, test responses
// with the training statistics.
struct Prepared {
  Dataset train;
  Dataset test;
  Standardization stats;
};

Prepared load_prepared(const PipelineConfig& cfg) {
  Prepared p;
  p.train = load_dataset(data_dir(cfg, "train"));
  p.test = load_dataset(data_dir(cfg, "test"));
  if (p.train.responses.voxels() != p.test.responses.voxels()) {
    throw FormatError(data_dir(cfg, "test").string(), 0, "voxel count differs from training data");
  }
  const fs::path stats_path = cfg.out / "corr" / "standardization.csv";
  if (fs::exists(stats_path)) {
    p.stats = read_standardization(stats_path, p.train.responses.voxels());
  } else {
    p.stats = Standardization::fit(p.train.responses.values);
  }
  if (!p.train.responses.standardized) p.train.responses.values = p.stats.apply(p.train.responses.values);
  if (!p.test.responses.standardized) p.test.responses.values = p.stats.apply(p.test.responses.values);
  p.train.responses.standardized = p.test.responses.standardized = true;
  p.train.responses.zero_variance = p.stats.zero_variance;
  p.test.responses.zero_variance = p.stats.zero_variance;
  return p;
}

std::vector<IndexSet> all_voxel_bins(int pixels, int voxels) {
  IndexSet all(static_cast<std::size_t>(voxels));
  for (int j = 0; j < voxels; ++j) all[static_cast<std::size_t>(j)] = j;
  return std::vector<IndexSet>(static_cast<std::size_t>(pixels), all);
}

std::vector<IndexSet> bins_for(const PipelineConfig& cfg, Decoder d, int pixels, int voxels) {
  if (is_pure(d)) return all_voxel_bins(pixels, voxels);
  const auto bins = read_bins(corr_dir(cfg, mode_for(cfg, d)) / "bins.csv");
  if (static_cast<int>(bins.size()) != pixels) {
    throw FormatError((corr_dir(cfg, mode_for(cfg, d)) / "bins.csv").string(), 0, "pixel count differs from data");
  }
  for (const auto& bin : bins) {
    for (int j : bin) {
      if (j < 0 || j >= voxels) throw FormatError("bins.csv", 0, "voxel index out of range");
    }
  }
  return bins;
}

// Test predictions tiled one pass of the shape catalog per montage row, with
// one gray separator pixel between tiles.
void write_montage(const BinaryMatrix& predictions, int rows, int cols, int per_row, const fs::path& path) {
  const int n = static_cast<int>(predictions.rows());
  per_row = std::max(1, std::min(per_row, n));
  const int tiles_down = (n + per_row - 1) / per_row;
  Matrix img = Matrix::Constant(tiles_down * (rows + 1) + 1, per_row * (cols + 1) + 1, 128.0);
  for (int t = 0; t < n; ++t) {
    const int r0 = (t / per_row) * (rows + 1) + 1;
    const int c0 = (t % per_row) * (cols + 1) + 1;
    for (int k = 0; k < rows * cols; ++k) img(r0 + k / cols, c0 + k % cols) = predictions(t, k) ? 255.0 : 0.0;
  }
  render_pgm(img, path);
}

GraphSummary summarize(const PipelineConfig& cfg, RadiusMode mode, const GroundTruth& truth) {
  const fs::path dir = corr_dir(cfg, mode);
  CorrelationGraph graph;
  graph.bins = read_bins(dir / "bins.csv");
  graph.weights = Matrix::Zero(static_cast<Eigen::Index>(graph.bins.size()), truth.rf.rows());
  GraphSummary s;
  s.mode = mode;
  s.stats = bin_stats(graph);
  s.recovery = bin_recovery(graph, truth);
  const auto lines = csv::read_lines(dir / "fallback.csv");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = csv::split(lines[i]);
    if (f.size() == 2 && csv::parse_int(f[1], (dir / "fallback.csv").string(), i + 1) != 0) ++s.fallback_pixels;
  }
  return s;
}

template <typename F>
void timed(std::vector<std::pair<std::string, double>>& timings, const char* stage, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(stage, e.what());
  }
  timings.emplace_back(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

}  // namespace

void stage_generate(const PipelineConfig& cfg) {
  fs::create_directories(cfg.out);
  {
    auto out = open_out(cfg.out / "config.txt");
    out << cfg.echo();
  }
  SyntheticConfig syn = cfg.synthetic;
  syn.seed = cfg.seed;

  Dataset train;
  train.stimuli = generate_random_stimuli(cfg.train_trials, cfg.rows, cfg.cols, derive_seed(cfg.seed, "train-stimuli"));
  auto [train_resp, truth] = synthesize_responses(train.stimuli, syn, 0);
  train.responses = std::move(train_resp);
  train.rf = truth.rf;
  store_dataset(train, data_dir(cfg, "train"));

  Dataset test;
  test.stimuli = generate_shape_stimuli(ShapeCatalog::All, cfg.rows, cfg.cols, cfg.test_repetitions);
  auto [test_resp, test_truth] = synthesize_responses(test.stimuli, syn, 1);
  test.responses = std::move(test_resp);
  test.rf = test_truth.rf;
  store_dataset(test, data_dir(cfg, "test"));
}

std::vector<GraphSummary> stage_correlate(const PipelineConfig& cfg) {
  const Dataset train = load_dataset(data_dir(cfg, "train"));
  const Standardization stats = Standardization::fit(train.responses.values);
  write_standardization(cfg.out / "corr" / "standardization.csv", stats);

  ResponseSet z = train.responses;
  if (!z.standardized) {
    z.values = stats.apply(z.values);
    z.standardized = true;
    z.zero_variance = stats.zero_variance;
  }
  const auto modes = graph_modes(cfg);
  if (modes.empty()) return {};

  const Matrix strength = strength_correlation(z);
  const PixelVoxelCorrelation pv = pixel_voxel_correlation(z, train.stimuli);
  const TopologyGraph topo = delaunay3d(z.layout);
  const VoxelModel model = build_voxel_model([&] {
    SyntheticConfig s = cfg.synthetic;
    s.seed = cfg.seed;
    return s;
  }(), cfg.rows, cfg.cols);

  std::vector<GraphSummary> out;
  for (RadiusMode mode : modes) {
    const fs::path dir = corr_dir(cfg, mode);
    fs::create_directories(dir);
    const NeighborhoodSet neigh = topological_neighborhood(topo, z.layout, adaptive_radii(topo, z.layout, mode), mode);
    write_topology_dump(dir, topo, neigh);
    const CouplingMatrix coupling = voxel_coupling(strength, position_prior(neigh), cfg.eps_cv, cfg.abs_correlation);
    const CorrelationGraph graph =
        build_correlation_graph(coupling, pv.values, z.layout, cfg.eps_corr, {cfg.abs_correlation, cfg.threads});
    write_graph_dump(dir, graph);
    {
      auto f = open_out(dir / "fallback.csv");
      f << "pixel,fallback\n";
      for (int k = 0; k < graph.pixels(); ++k) f << k << ',' << int(graph.used_fallback[static_cast<std::size_t>(k)]) << '\n';
    }
    const CountMatrix heat = bin_heatmap(graph, cfg.rows, cfg.cols);
    const double peak = std::max(1, heat.maxCoeff());
    render_pgm(to_gray(heat.cast<double>(), 0.0, peak), dir / "bin_heatmap.pgm");
    if (model.truth.rf.rows() == z.voxels() && model.truth.rf.cols() == graph.pixels()) {
      out.push_back(summarize(cfg, mode, model.truth));
    }
  }
  return out;
}

void stage_train(const PipelineConfig& cfg) {
  const Prepared p = load_prepared(cfg);
  const int d2 = p.train.stimuli.pixels();
  const int d1 = p.train.responses.voxels();
  for (Decoder d : cfg.decoders) {
    const auto bins = bins_for(cfg, d, d2, d1);
    const fs::path dir = model_dir(cfg, d);
    fs::create_directories(dir);
    if (is_snn(d)) {
      const auto models = train_snn_decoder(p.train.stimuli, p.train.responses.values, bins, cfg.snn, cfg.seed, cfg.threads);
      write_snn_models(dir / "snn_models.csv", dir / "snn_ranges.csv", models);
    } else {
      const auto models = train_svm_decoder(p.train.stimuli, p.train.responses.values, bins, cfg.svm, cfg.threads);
      write_svm_models(dir / "svm_models.csv", models);
    }
  }
}

void stage_decode(const PipelineConfig& cfg) {
  const Prepared p = load_prepared(cfg);
  const int rows = p.test.stimuli.rows;
  const int cols = p.test.stimuli.cols;
  const int n = p.test.stimuli.trials();
  const int per_row = static_cast<int>(shape_names(ShapeCatalog::All).size());
  for (Decoder d : cfg.decoders) {
    const fs::path dir = model_dir(cfg, d);
    BinaryMatrix pred(n, rows * cols);
    if (is_snn(d)) {
      const auto models = read_snn_models(dir / "snn_models.csv", dir / "snn_ranges.csv");
      if (static_cast<int>(models.size()) != rows * cols) throw FormatError("snn_models.csv", 0, "pixel count differs");
      for (int t = 0; t < n; ++t) {
        const Vector r = p.test.responses.values.row(t).transpose();
        const BinaryMatrix img = decode_image_snn(models, r, cfg.snn, rows, cols);
        for (int k = 0; k < rows * cols; ++k) pred(t, k) = img(k / cols, k % cols);
      }
    } else {
      const auto models = read_svm_models(dir / "svm_models.csv");
      if (static_cast<int>(models.size()) != rows * cols) throw FormatError("svm_models.csv", 0, "pixel count differs");
      for (int t = 0; t < n; ++t) {
        const Vector r = p.test.responses.values.row(t).transpose();
        const BinaryMatrix img = decode_image_svm(models, r, rows, cols);
        for (int k = 0; k < rows * cols; ++k) pred(t, k) = img(k / cols, k % cols);
      }
    }
    const fs::path out = decode_dir(cfg, d);
    fs::create_directories(out);
    csv::write_matrix(out / "predictions.csv", pred);
    write_montage(pred, rows, cols, per_row, out / "montage.pgm");
  }
}

RunReport stage_evaluate(const PipelineConfig& cfg) {
  RunReport report;
  report.config_echo = cfg.echo();
  report.digests["train"] = digest(data_dir(cfg, "train"));
  report.digests["test"] = digest(data_dir(cfg, "test"));

  const Dataset test = load_dataset(data_dir(cfg, "test"));
  const int rows = test.stimuli.rows;
  const int cols = test.stimuli.cols;
  const fs::path eval = cfg.out / "eval";
  fs::create_directories(eval);

  SyntheticConfig syn = cfg.synthetic;
  syn.seed = cfg.seed;
  const VoxelModel model = build_voxel_model(syn, rows, cols);
  for (RadiusMode mode : graph_modes(cfg)) report.graphs.push_back(summarize(cfg, mode, model.truth));

  std::set<std::string> categories(test.stimuli.categories.begin(), test.stimuli.categories.end());
  for (Decoder d : cfg.decoders) {
    const BinaryMatrix pred =
        csv::read_matrix(decode_dir(cfg, d) / "predictions.csv", test.stimuli.trials(), rows * cols)
            .unaryExpr([](double v) { return v != 0.0 ? 1.0 : 0.0; })
            .cast<std::uint8_t>();
    MethodResult m{d, pixel_accuracy(pred, test.stimuli.values, rows, cols, test.stimuli.categories, decoder_method(d)), {}};
    m.patch_curve = patch_scale_accuracy(m.accuracy);
    const fs::path dir = eval / decoder_method(d);
    fs::create_directories(dir);
    csv::write_matrix(dir / "pixel_accuracy.csv", m.accuracy.per_pixel);
    render_pgm(to_gray(m.accuracy.per_pixel, 0.0, 1.0), dir / "pixel_accuracy.pgm");
    {
      auto out = open_out(dir / "patch_curve.csv");
      out << "size,accuracy\n";
      for (std::size_t s = 0; s < m.patch_curve.values.size(); ++s) {
        out << s + 1 << ',' << csv::format_double(m.patch_curve.values[s]) << '\n';
      }
    }
    {
      auto out = open_out(dir / "trial_accuracy.csv");
      out << "trial,category,accuracy\n";
      for (std::size_t t = 0; t < m.accuracy.per_trial.size(); ++t) {
        out << t << ',' << (t < test.stimuli.categories.size() ? test.stimuli.categories[t] : "") << ','
            << csv::format_double(m.accuracy.per_trial[t]) << '\n';
      }
    }
    report.methods.push_back(std::move(m));
  }

  {
    auto out = open_out(eval / "report.csv");
    out << "method,split,mean_accuracy,trial_std";
    for (const auto& c : categories) out << ",mean_" << c;
    out << '\n';
    for (const auto& m : report.methods) {
      out << decoder_method(m.decoder) << ",test," << csv::format_double(m.accuracy.mean) << ','
          << csv::format_double(m.accuracy.trial_std);
      for (const auto& c : categories) {
        const auto it = m.accuracy.category_mean.find(c);
        out << ',' << (it == m.accuracy.category_mean.end() ? "" : csv::format_double(it->second));
      }
      out << '\n';
    }
  }
  {
    auto out = open_out(eval / "bins.csv");
    out << "mode,mean_size,utilization,fallback_pixels,precision,recall,f1,skipped\n";
    for (const auto& g : report.graphs) {
      out << to_string(g.mode) << ',' << csv::format_double(g.stats.mean_size) << ','
          << csv::format_double(g.stats.utilization) << ',' << g.fallback_pixels << ','
          << csv::format_double(g.recovery.mean_precision) << ',' << csv::format_double(g.recovery.mean_recall)
          << ',' << csv::format_double(g.recovery.mean_f1) << ',' << g.recovery.skipped << '\n';
    }
  }
  {
    auto out = open_out(eval / "digests.csv");
    out << "split,hash\n";
    for (const auto& [split, hash] : report.digests) out << split << ',' << hash << '\n';
  }
  return report;
}

RunReport run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  const bool existed = fs::exists(cfg.out);
  std::vector<std::pair<std::string, double>> timings;
  RunReport report;
  try {
    timed(timings, "gen", [&] { stage_generate(cfg); });
    timed(timings, "corr", [&] { stage_correlate(cfg); });
    timed(timings, "train", [&] { stage_train(cfg); });
    timed(timings, "decode", [&] { stage_decode(cfg); });
    timed(timings, "eval", [&] { report = stage_evaluate(cfg); });
  } catch (...) {
    std::error_code ec;
    for (const char* name : kOutputs) fs::remove_all(cfg.out / name, ec);
    if (!existed) fs::remove_all(cfg.out, ec);
    throw;
  }
  report.timings = timings;
  auto out = open_out(cfg.out / "timings.csv");
  out << "stage,seconds\n";
  for (const auto& [stage, sec] : timings) out << stage << ',' << csv::format_double(sec) << '\n';
  return report;
}

}  // namespace corrnet
