#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>

#include "corrnet/error.hpp"
#include "corrnet/evaluation.hpp"
#include "corrnet/pipeline.hpp"
#include "corrnet/rng.hpp"

using namespace corrnet;
namespace fs = std::filesystem;

namespace {

BinaryMatrix random_bits(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  BinaryMatrix m(n, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.bernoulli(0.5);
  return m;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Accuracy, IdentityAndComplement) {
  const auto truth = random_bits(7, 12, 1);
  const auto same = pixel_accuracy(truth, truth, 3, 4);
  EXPECT_EQ(same.per_pixel, Matrix::Ones(3, 4));
  EXPECT_EQ(same.mean, 1.0);
  const BinaryMatrix flipped = truth.unaryExpr([](std::uint8_t v) -> std::uint8_t { return 1 - v; });
  const auto inv = pixel_accuracy(flipped, truth, 3, 4);
  EXPECT_EQ(inv.per_pixel, Matrix::Zero(3, 4));
  EXPECT_EQ(inv.mean, 0.0);
}

TEST(Accuracy, HalfTheTrialsFlippedAtOnePixel) {
  const auto truth = random_bits(8, 4, 2);
  BinaryMatrix pred = truth;
  for (int i = 0; i < 4; ++i) pred(i, 2) = 1 - pred(i, 2);
  const auto r = pixel_accuracy(pred, truth, 2, 2);
  EXPECT_EQ(r.per_pixel(1, 0), 0.5);
  EXPECT_EQ(r.per_pixel(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(r.mean, 3.5 / 4.0);
}

TEST(Accuracy, ShapeMismatch) {
  EXPECT_THROW(pixel_accuracy(random_bits(3, 4, 1), random_bits(2, 4, 1), 2, 2), InvalidArgument);
  EXPECT_THROW(pixel_accuracy(random_bits(3, 4, 1), random_bits(3, 4, 1), 3, 2), InvalidArgument);
}

TEST(Accuracy, CategoriesAndTrialSpread) {
  const auto truth = random_bits(4, 4, 3);
  BinaryMatrix pred = truth;
  pred(0, 0) = 1 - pred(0, 0);
  pred(1, 0) = 1 - pred(1, 0);
  pred(1, 1) = 1 - pred(1, 1);
  const auto r = pixel_accuracy(pred, truth, 2, 2, {"a", "a", "b", "b"}, "m");
  EXPECT_EQ(r.method, "m");
  EXPECT_DOUBLE_EQ(r.category_mean.at("a"), (0.75 + 0.5) / 2.0);
  EXPECT_DOUBLE_EQ(r.category_mean.at("b"), 1.0);
  ASSERT_EQ(r.per_trial.size(), 4u);
  const double m = (0.75 + 0.5 + 1 + 1) / 4.0;
  double ss = 0.0;
  for (double v : {0.75, 0.5, 1.0, 1.0}) ss += (v - m) * (v - m);
  EXPECT_NEAR(r.trial_std, std::sqrt(ss / 3.0), 1e-15);
  for (double v : r.per_trial) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Patch, EndpointAndFlatCurve) {
  AccuracyReport r;
  r.per_pixel = Matrix::Constant(12, 12, 0.7);
  for (double v : patch_scale_accuracy(r).values) EXPECT_NEAR(v, 0.7, 1e-12);

  Rng rng(4);
  r.per_pixel = Matrix(12, 12);
  for (Eigen::Index i = 0; i < r.per_pixel.size(); ++i) r.per_pixel.data()[i] = rng.uniform();
  const auto curve = patch_scale_accuracy(r);
  ASSERT_EQ(curve.values.size(), 12u);
  EXPECT_EQ(curve.values.back(), r.per_pixel.mean());
  EXPECT_EQ(curve.values[0], r.per_pixel(5, 5));
  EXPECT_DOUBLE_EQ(curve.values[1], r.per_pixel.block(5, 5, 2, 2).mean());
  EXPECT_DOUBLE_EQ(curve.values[2], r.per_pixel.block(4, 4, 3, 3).mean());
}

TEST(Heatmap, CountsAndMass) {
  CorrelationGraph g;
  g.weights = Matrix::Zero(4, 6);
  g.bins = {{0, 1}, {0, 1, 2}, {0, 1, 2, 3}, {0, 1, 2, 3, 4}};
  const auto h = bin_heatmap(g, 2, 2);
  EXPECT_EQ(h, (Eigen::Matrix2i() << 2, 3, 4, 5).finished());
  EXPECT_EQ(h.sum(), 14);
  g.bins = {{1}, {2}, {3}, {4}};
  EXPECT_EQ(bin_heatmap(g, 2, 2), Eigen::MatrixXi::Ones(2, 2));
}

TEST(Recovery, ExactDisjointAndSkipped) {
  CorrelationGraph g;
  g.weights = Matrix::Zero(3, 4);
  g.bins = {{0, 1}, {2}, {3}};
  GroundTruth t;
  t.relevance = BinaryMatrix::Zero(4, 3);
  t.relevance(0, 0) = t.relevance(1, 0) = 1;
  t.relevance(3, 1) = 1;
  const auto r = bin_recovery(g, t);
  EXPECT_EQ(r.f1(0), 1.0);
  EXPECT_EQ(r.precision(0), 1.0);
  EXPECT_EQ(r.recall(0), 1.0);
  EXPECT_EQ(r.f1(1), 0.0);
  EXPECT_TRUE(std::isnan(r.f1(2)));
  EXPECT_EQ(r.skipped, 1);
  EXPECT_DOUBLE_EQ(r.mean_f1, 0.5);
}

TEST(Pgm, PayloadBytes) {
  const auto path = fs::temp_directory_path() / "corrnet_test.pgm";
  Matrix img(2, 2);
  img << 0, 255, 255, 0;
  render_pgm(img, path);
  EXPECT_EQ(slurp(path), std::string("P5\n2 2\n255\n\x00\xff\xff\x00", 15));
  const auto back = read_pgm(path);
  EXPECT_EQ(back.max_val, 255);
  EXPECT_EQ(back.pixels.cast<double>(), img);

  render_pgm(Matrix::Zero(3, 5), path);
  const auto zero = slurp(path);
  EXPECT_EQ(zero.substr(0, 9), "P5\n5 3\n25");
  EXPECT_EQ(zero.substr(zero.size() - 15), std::string(15, '\0'));

  Rng rng(5);
  Matrix r(4, 7);
  for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = static_cast<double>(rng.below(256));
  render_pgm(r, path);
  EXPECT_EQ(read_pgm(path).pixels.cast<double>(), r);

  EXPECT_THROW(render_pgm(Matrix::Constant(1, 1, 300.0), path), InvalidArgument);
  EXPECT_THROW(render_pgm(img, "/nonexistent-dir/x.pgm"), IoError);
  fs::remove(path);
}

TEST(Gray, LinearMap) {
  Matrix v(1, 3);
  v << 0.0, 0.5, 1.0;
  const Matrix g = to_gray(v, 0.0, 1.0);
  EXPECT_EQ(g(0, 0), 0.0);
  EXPECT_EQ(g(0, 1), 128.0);
  EXPECT_EQ(g(0, 2), 255.0);
}

// Center-weighted default benchmark: the generator packs more receptive
// fields into the middle of the image, which should show in bin sizes and in
// the patch curve.
class CenterWeighted : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "corrnet_test_center";
    fs::remove_all(dir_);
    cfg_ = parse_config(std::nullopt, {{"decoders", "svm"}, {"out", dir_.string()}});
    report_ = new RunReport(run_pipeline(cfg_));
  }
  static void TearDownTestSuite() {
    delete report_;
    fs::remove_all(dir_);
  }
  static inline fs::path dir_;
  static inline PipelineConfig cfg_;
  static inline RunReport* report_ = nullptr;
};

TEST_F(CenterWeighted, PatchCurveFavorsCenter) {
  const auto* m = report_->find(Decoder::CorrNetSvm);
  ASSERT_NE(m, nullptr);
  const auto& v = m->patch_curve.values;
  for (int s = 1; s <= 6; ++s) EXPECT_GE(v[s - 1], v[11]) << "size " << s;
}

TEST_F(CenterWeighted, HeatmapDenserInCenter) {
  const auto bins = read_bins(dir_ / "corr" / "svm-min-edge" / "bins.csv");
  CorrelationGraph g;
  g.weights = Matrix::Zero(144, cfg_.synthetic.grid_x * cfg_.synthetic.grid_y * cfg_.synthetic.grid_z);
  g.bins = bins;
  const Matrix h = bin_heatmap(g, 12, 12).cast<double>();
  const double center = h.block(3, 3, 6, 6).mean();
  const double periphery = (h.sum() - h.block(3, 3, 6, 6).sum()) / (144.0 - 36.0);
  EXPECT_GE(center, periphery);
}
