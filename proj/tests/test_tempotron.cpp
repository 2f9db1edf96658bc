#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "corrnet/error.hpp"
#include "corrnet/rng.hpp"
#include "corrnet/tempotron.hpp"
#include "oracles.hpp"
#include "tempotron_task.hpp"

using namespace corrnet;

namespace {

SpikeTrain train_of(std::vector<double> t) { return SpikeTrain{std::move(t)}; }

}  // namespace

TEST(Kernel, PeakIsNormalized) {
  const SimParams p;
  const PspKernel k(p);
  const double tstar = oracle::kernel_peak_time(p.tau_m, p.tau_s);
  EXPECT_NEAR(k.peak_time(), tstar, 1e-12);
  EXPECT_NEAR(k(tstar), 1.0, 1e-12);
  EXPECT_EQ(k(-0.5), 0.0);
  EXPECT_EQ(k(0.0), 0.0);
  // Sampled maximum on a grid ten times finer than dt. The grid point nearest
  // the continuous peak sits about 8e-3 ms away, which costs ~1e-5 of height.
  double best = 0.0;
  for (int n = 0; n <= 10 * p.steps(); ++n) best = std::max(best, k(n * p.dt / 10.0));
  EXPECT_LE(best, 1.0 + 1e-12);
  EXPECT_GE(best, 1.0 - 1e-5);
}

TEST(Encode, LatencyCode) {
  SimParams p;
  const Vector lo = Vector::Constant(3, -1.0), hi = Vector::Constant(3, 3.0);
  Vector x(3);
  x << 3.0, -1.0, 1.0;
  const auto s = encode_spikes(x, lo, hi, p);
  EXPECT_EQ(s.times[0], 0.0);
  EXPECT_EQ(s.times[1], p.window);
  EXPECT_EQ(s.times[2], 50.0);
  x << 10.0, -10.0, 1.0;
  const auto clamped = encode_spikes(x, lo, hi, p);
  EXPECT_EQ(clamped.times[0], 0.0);
  EXPECT_EQ(clamped.times[1], p.window);
}

TEST(Encode, MonotoneAndGridAligned) {
  SimParams p;
  p.dt = 0.5;
  const Vector lo = Vector::Zero(1), hi = Vector::Ones(1);
  double prev = 1e9;
  for (int i = 0; i <= 100; ++i) {
    const double t = encode_spikes(Vector::Constant(1, i / 100.0 + 0.0013), lo, hi, p).times[0];
    EXPECT_LE(t, prev);
    EXPECT_DOUBLE_EQ(std::fmod(t, p.dt), 0.0);
    prev = t;
  }
}

TEST(Encode, ConstantRangeSpikesLast) {
  const SimParams p;
  const auto s = encode_spikes(Vector::Constant(1, 2.0), Vector::Constant(1, 2.0), Vector::Constant(1, 2.0), p);
  EXPECT_EQ(s.times[0], p.window);
}

TEST(Membrane, RestWithoutInput) {
  const SimParams p;
  const auto silent = simulate_membrane(train_of({}), Vector(), p, true);
  EXPECT_FALSE(silent.fired);
  ASSERT_EQ(silent.trace.size(), static_cast<std::size_t>(p.steps() + 1));
  for (double v : silent.trace) EXPECT_EQ(v, p.v_rest);
  const auto zero_w = simulate_membrane(train_of({0.0, 10.0}), Vector::Zero(2), p, true);
  EXPECT_FALSE(zero_w.fired);
  for (double v : zero_w.trace) EXPECT_EQ(v, p.v_rest);
}

TEST(Membrane, SingleSpikePeak) {
  const SimParams p;
  const double w = 0.3;
  const auto r = simulate_membrane(train_of({0.0}), Vector::Constant(1, w), p);
  const double tstar = oracle::kernel_peak_time(p.tau_m, p.tau_s);
  EXPECT_LE(std::abs(r.t_max - tstar), p.dt);
  EXPECT_NEAR(r.v_max, w + p.v_rest, 1e-3 * w);
  EXPECT_FALSE(r.fired);
}

TEST(Membrane, MatchesDirectKernelSum) {
  const SimParams p;
  const PspKernel k(p);
  const auto spikes = train_of({3.0, 17.0, 40.0});
  Vector w(3);
  w << 0.1, -0.05, 0.2;
  const auto r = simulate_membrane(spikes, w, p, true);
  for (int n = 0; n <= p.steps(); ++n) {
    double v = p.v_rest;
    for (int i = 0; i < 3; ++i) v += w(i) * k(n * p.dt - spikes.times[static_cast<std::size_t>(i)]);
    EXPECT_NEAR(r.trace[static_cast<std::size_t>(n)], v, 1e-12) << "step " << n;
  }
}

TEST(Membrane, CrossingFiresAndResets) {
  const SimParams p;
  const auto r = simulate_membrane(train_of({0.0}), Vector::Constant(1, 0.8), p, true);
  ASSERT_TRUE(r.fired);
  EXPECT_GT(r.t_fire, 0.0);
  const auto fire_step = static_cast<std::size_t>(std::lround(r.t_fire / p.dt));
  EXPECT_GE(r.trace[fire_step], p.v_thre);
  for (std::size_t n = fire_step + 1; n < r.trace.size(); ++n) EXPECT_EQ(r.trace[n], 0.6);
  // t_max and v_max still describe the unreset potential.
  EXPECT_NEAR(r.v_max, 1.4, 1e-3);
}

TEST(Membrane, ShiftEquivariance) {
  const SimParams p;
  Vector w(3);
  w << 0.15, 0.1, -0.05;
  const auto a = simulate_membrane(train_of({5.0, 12.0, 30.0}), w, p);
  const auto b = simulate_membrane(train_of({25.0, 32.0, 50.0}), w, p);
  EXPECT_DOUBLE_EQ(b.t_max - a.t_max, 20.0);
  EXPECT_NEAR(a.v_max, b.v_max, 1e-9);
}

TEST(Membrane, LengthMismatch) {
  EXPECT_THROW(simulate_membrane(train_of({1.0}), Vector::Zero(2), SimParams{}), InvalidArgument);
}

TEST(Update, CorrectClassificationLeavesWeights) {
  const SimParams p;
  TempotronModel m;
  m.weights = Vector::Constant(2, 0.1);
  const auto spikes = train_of({0.0, 20.0});
  const auto silent = tempotron_update(m, spikes, 0, p);
  EXPECT_EQ(silent.weights, m.weights);
  m.weights = Vector::Constant(2, 0.5);
  const auto fires = tempotron_update(m, spikes, 1, p);
  EXPECT_EQ(fires.weights, m.weights);
}

TEST(Update, BrightErrorRaisesEarlyAfferentOnly) {
  const SimParams p;
  const PspKernel k(p);
  Vector w(2);
  w << 0.2, 0.0;
  const auto spikes = train_of({0.0, 80.0});
  const auto r = simulate_membrane(spikes, w, p);
  ASSERT_FALSE(r.fired);
  ASSERT_LT(r.t_max, 80.0);
  const Vector d = tempotron_delta(spikes, r, 1, p);
  EXPECT_NEAR(d(0), p.lr * k(r.t_max), 1e-15);
  EXPECT_GT(d(0), 0.0);
  EXPECT_EQ(d(1), 0.0);
}

TEST(Update, DarkErrorLowersWeights) {
  const SimParams p;
  const auto spikes = train_of({0.0, 2.0, 150.0});
  Vector w = Vector::Constant(3, 0.3);
  const auto r = simulate_membrane(spikes, w, p);
  ASSERT_TRUE(r.fired);
  const Vector d = tempotron_delta(spikes, r, 0, p);
  EXPECT_LT(d(0), 0.0);
  EXPECT_LT(d(1), 0.0);
  EXPECT_EQ(d(2), 0.0);
}

TEST(Update, SignCoherenceOnRandomPatterns) {
  const SimParams p;
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> t(8);
    for (double& v : t) v = std::round(rng.uniform(0.0, 100.0));
    Vector w(8);
    for (int i = 0; i < 8; ++i) w(i) = rng.uniform(-0.1, 0.2);
    const auto spikes = train_of(t);
    const auto r = simulate_membrane(spikes, w, p);
    for (int label : {0, 1}) {
      const Vector d = tempotron_delta(spikes, r, label, p);
      const bool correct = (label == 1) == r.fired;
      if (correct) {
        EXPECT_TRUE(d.isZero(0.0));
      } else if (label == 1) {
        EXPECT_GE(d.minCoeff(), 0.0);
      } else {
        EXPECT_LE(d.maxCoeff(), 0.0);
      }
    }
  }
}

TEST(Training, AllDarkWithZeroWeightsConvergesImmediately) {
  const SimParams p;
  TempotronTraining t;
  t.init_max = 0.0;
  const auto m = train_pixel_tempotron(Matrix::Random(10, 4), std::vector<std::uint8_t>(10, 0), p, t);
  EXPECT_TRUE(m.converged);
  EXPECT_EQ(m.errors_per_epoch, std::vector<int>{0});
  EXPECT_TRUE(m.weights.isZero(0.0));
}

TEST(Training, ZeroLearningRateFreezesWeights) {
  SimParams p;
  p.lr = 0.0;
  p.max_epochs = 5;
  const auto task = make_spike_task(1);
  TempotronTraining t;
  t.seed = 3;
  const auto m = train_pixel_tempotron(task.features, task.labels, p, t);
  Rng rng(3);
  for (int i = 0; i < m.afferents(); ++i) EXPECT_EQ(m.weights(i), 0.01 * rng.uniform());
}

TEST(Training, SeparableTaskReachesZeroErrors) {
  const SimParams p;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto task = make_spike_task(100 + seed);
    TempotronTraining t;
    t.seed = seed;
    const auto m = train_pixel_tempotron(task.features, task.labels, p, t);
    EXPECT_TRUE(m.converged) << "seed " << seed;
    EXPECT_LE(m.errors_per_epoch.size(), 500u);
    for (int i = 0; i < task.features.rows(); ++i) {
      EXPECT_EQ(predict_pixel_tempotron(m, task.features.row(i).transpose(), p), task.labels[static_cast<std::size_t>(i)]);
    }
  }
}

TEST(Training, InitialWeightsAreSmallAndSeeded) {
  SimParams p;
  p.max_epochs = 0;
  const auto task = make_spike_task(2);
  TempotronTraining t;
  t.seed = 11;
  const auto a = train_pixel_tempotron(task.features, task.labels, p, t);
  const auto b = train_pixel_tempotron(task.features, task.labels, p, t);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_GE(a.weights.minCoeff(), 0.0);
  EXPECT_LE(a.weights.maxCoeff(), 0.01);
  EXPECT_EQ(a.range_min, task.features.colwise().minCoeff().transpose());
}

TEST(Decoder, ZeroWeightsGiveBlackImage) {
  const SimParams p;
  std::vector<TempotronModel> models(4);
  for (auto& m : models) {
    m.members = {0, 1};
    m.weights = Vector::Zero(2);
    m.range_min = Vector::Zero(2);
    m.range_max = Vector::Ones(2);
  }
  EXPECT_EQ(decode_image_snn(models, Vector::Constant(2, 0.9), p, 2, 2), BinaryMatrix::Zero(2, 2));
  EXPECT_THROW(decode_image_snn(models, Vector::Constant(2, 0.9), p, 1, 2), InvalidArgument);
}

TEST(Decoder, CompositionAndDumpRoundTrip) {
  const SimParams p;
  const auto task = make_spike_task(5, 6, 20);
  StimulusSet s;
  s.rows = 1;
  s.cols = 2;
  s.values = BinaryMatrix(20, 2);
  for (int i = 0; i < 20; ++i) {
    s.values(i, 0) = task.labels[static_cast<std::size_t>(i)];
    s.values(i, 1) = 1 - task.labels[static_cast<std::size_t>(i)];
  }
  const std::vector<IndexSet> bins{{0, 1, 2, 3, 4, 5}, {5, 4, 3, 2, 1, 0}};
  const auto models = train_snn_decoder(s, task.features, bins, p, 42, 1);
  const auto again = train_snn_decoder(s, task.features, bins, p, 42, 3);
  for (int k = 0; k < 2; ++k) EXPECT_EQ(models[k].weights, again[k].weights);
  for (int i = 0; i < 20; ++i) {
    const Vector r = task.features.row(i).transpose();
    const auto img = decode_image_snn(models, r, p, 1, 2);
    for (int k = 0; k < 2; ++k) {
      Vector f(6);
      for (int c = 0; c < 6; ++c) f(c) = r(bins[k][c]);
      EXPECT_EQ(img(0, k), predict_pixel_tempotron(models[k], f, p));
    }
  }
  const auto dir = std::filesystem::temp_directory_path();
  write_snn_models(dir / "corrnet_test_snn.csv", dir / "corrnet_test_snn_ranges.csv", models);
  const auto back = read_snn_models(dir / "corrnet_test_snn.csv", dir / "corrnet_test_snn_ranges.csv");
  ASSERT_EQ(back.size(), 2u);
  for (int k = 0; k < 2; ++k) {
    EXPECT_EQ(back[k].members, models[k].members);
    EXPECT_EQ(back[k].weights, models[k].weights);
    EXPECT_EQ(back[k].range_min, models[k].range_min);
    EXPECT_EQ(back[k].range_max, models[k].range_max);
  }
  std::filesystem::remove(dir / "corrnet_test_snn.csv");
  std::filesystem::remove(dir / "corrnet_test_snn_ranges.csv");
}

TEST(Params, Validation) {
  SimParams p;
  p.tau_s = 30.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = {};
  p.dt = 0.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = {};
  p.window = 0.5;
  EXPECT_THROW(p.validate(), InvalidArgument);
}
