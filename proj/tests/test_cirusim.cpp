#include <gtest/gtest.h>

#include "netinfer/cirusim.hpp"
#include "netinfer/eval.hpp"
#include "netinfer/simgen.hpp"
#include "support.hpp"

using namespace netinfer;
namespace ts = testing_support;

namespace {

SpikeRaster raster_with(Index frames, Index neurons, const std::vector<std::pair<Index, Index>>& spikes, double rate = 10.0) {
  BinaryMatrix e = BinaryMatrix::Zero(frames, neurons);
  for (const auto& [t, i] : spikes) e(t, i) = 1;
  return SpikeRaster::from_events(e, rate);
}

double training_accuracy(const SvmModel& m, const Matrix& x, const std::vector<int>& y) {
  const Vector f = svm_predict(m, x);
  int ok = 0;
  for (Index i = 0; i < x.rows(); ++i) ok += (f(i) > 0 ? 1 : -1) == y[static_cast<std::size_t>(i)];
  return static_cast<double>(ok) / static_cast<double>(x.rows());
}

double minority_recall(const SvmModel& m, const Matrix& x, const std::vector<int>& y) {
  const Vector f = svm_predict(m, x);
  int pos = 0, hit = 0;
  for (Index i = 0; i < x.rows(); ++i)
    if (y[static_cast<std::size_t>(i)] > 0) {
      ++pos;
      hit += f(i) > 0;
    }
  return static_cast<double>(hit) / pos;
}

}  // namespace

TEST(Spans, SimpleCandidate) {
  // 10 Hz: frame 20 = 2.0 s, frame 22 = 2.2 s.
  const auto table = extract_span_series(raster_with(40, 2, {{20, 0}, {22, 1}}));
  ASSERT_EQ(table.at(0, 1).size(), 1u);
  EXPECT_NEAR(table.at(0, 1)[0], 0.2, 1e-12);
}

TEST(Spans, RefractoryDiscardsCandidate) {
  const auto table = extract_span_series(raster_with(40, 2, {{20, 0}, {21, 0}, {22, 1}}));
  ASSERT_EQ(table.at(0, 1).size(), 1u);
  EXPECT_NEAR(table.at(0, 1)[0], 0.2, 1e-12);
}

TEST(Spans, NoLaterTargetSpike) {
  const auto table = extract_span_series(raster_with(40, 2, {{5, 1}, {20, 0}}));
  EXPECT_TRUE(table.at(0, 1).empty());
  ASSERT_EQ(table.at(1, 0).size(), 1u);
  EXPECT_NEAR(table.at(1, 0)[0], 1.5, 1e-12);
}

TEST(Spans, AnyNeuronScope) {
  // The candidate at 2.2 s follows neuron 2's spike at 1.9 s by 0.3 s.
  const auto r = raster_with(40, 3, {{19, 2}, {20, 0}, {22, 1}});
  EXPECT_EQ(extract_span_series(r, 1.0, RefractoryScope::source_neuron).at(0, 1).size(), 1u);
  EXPECT_TRUE(extract_span_series(r, 1.0, RefractoryScope::any_neuron).at(0, 1).empty());
}

TEST(Spans, StrictlyPositiveProperty) {
  ts::Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = ts::random_raster(rng, 300, 5, ts::uniform(rng, 0.005, 0.1));
    const auto table = extract_span_series(remove_high_activity_frames(r), ts::uniform(rng, 0.0, 1.5));
    for (const auto& series : table.spans)
      for (double s : series) EXPECT_GT(s, 0.0);
  }
}

TEST(Transform, FormulaAndClamp) {
  EXPECT_NEAR(span_score(1.0), std::exp(1.0) - 1.0, 1e-12);
  EXPECT_NEAR(span_score(1.0), 1.71828, 1e-5);
  EXPECT_NEAR(span_score(0.5), 6.38906, 1e-5);
  EXPECT_NEAR(span_score(0.02), std::exp(10.0) - 1.0, 1e-12 * std::exp(10.0));
  EXPECT_NEAR(span_score(0.02), 22025.47, 1e-2);
}

TEST(Transform, StrictlyDecreasingAboveFloor) {
  ts::Rng rng(1);
  std::vector<double> spans;
  for (int k = 0; k < 200; ++k) spans.push_back(ts::uniform(rng, 0.1, 5.0));
  std::sort(spans.begin(), spans.end());
  spans.erase(std::unique(spans.begin(), spans.end()), spans.end());
  for (std::size_t k = 1; k < spans.size(); ++k) EXPECT_LT(span_score(spans[k]), span_score(spans[k - 1]));
}

TEST(Transform, NonPositiveSpanRejected) {
  const std::vector<double> spans{0.3, 0.0};
  EXPECT_THROW(transform_and_featurize(spans), InvalidArgument);
}

TEST(Features, HandStatistics) {
  const auto f = summarize_scores({1.0, 2.0, 3.0, 4.0});
  EXPECT_EQ(f.impulse_count, 4.0);
  EXPECT_DOUBLE_EQ(f.mean_score, 2.5);
  EXPECT_DOUBLE_EQ(f.var_score, 1.25);
  EXPECT_DOUBLE_EQ(f.p95_score, 4.0);
}

TEST(Features, EmptySeriesIsZero) {
  const auto f = summarize_scores({});
  EXPECT_EQ(f.impulse_count, 0.0);
  EXPECT_EQ(f.mean_score, 0.0);
  EXPECT_EQ(f.var_score, 0.0);
  EXPECT_EQ(f.p95_score, 0.0);
}

TEST(Features, NearestRankPercentile) {
  std::vector<double> v;
  for (int k = 1; k <= 20; ++k) v.push_back(k);
  EXPECT_DOUBLE_EQ(summarize_scores(v).p95_score, 19.0);
  v.push_back(21.0);
  EXPECT_DOUBLE_EQ(summarize_scores(v).p95_score, 20.0);
}

TEST(Svm, TwoPointSeparable) {
  const Matrix x{{0.0, 0.0}, {1.0, 1.0}};
  const std::vector<int> y{-1, 1};
  const auto m = svm_train(x, y);
  EXPECT_EQ(m.support_vectors.rows(), 2);
  const Vector f = svm_predict(m, x);
  EXPECT_LT(f(0), 0.0);
  EXPECT_GT(f(1), 0.0);
  const Vector mid = svm_predict(m, Matrix{{0.5, 0.5}});
  EXPECT_LT(std::abs(mid(0)), std::abs(f(0)));
  EXPECT_LT(std::abs(mid(0)), std::abs(f(1)));
}

TEST(Svm, Xor) {
  const Matrix x{{0.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}, {1.0, 0.0}};
  const std::vector<int> y{1, 1, -1, -1};
  SvmOptions opt;
  opt.C = 10.0;
  EXPECT_EQ(training_accuracy(svm_train(x, y, opt), x, y), 1.0);
  EXPECT_EQ(training_accuracy(svm_train(x, y), x, y), 1.0);
}

TEST(Svm, ConflictingDuplicateGoesToHeavierClass) {
  // One positive at the origin, a negative on top of it and another far away:
  // balanced weights give the lone positive 1.5 against 0.75 per negative.
  const Matrix x{{0.0, 0.0}, {0.0, 0.0}, {5.0, 5.0}};
  const std::vector<int> y{1, -1, -1};
  const auto m = svm_train(x, y);
  EXPECT_TRUE(m.converged);
  EXPECT_GT(svm_predict(m, Matrix{{0.0, 0.0}})(0), 0.0);
}

TEST(Svm, DualFeasibility) {
  ts::Rng rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = ts::uniform_int(rng, 10, 60);
    const Matrix x = ts::gaussian_matrix(rng, n, 3);
    std::vector<int> y;
    for (Index i = 0; i < n; ++i) y.push_back(x(i, 0) + 0.5 * x(i, 1) + 0.3 * ts::uniform(rng, -1, 1) > 0 ? 1 : -1);
    y[0] = 1;
    y[1] = -1;
    const auto m = svm_train(x, y);
    EXPECT_TRUE(m.converged);
    EXPECT_LE(std::abs(m.dual_coefficients.sum()), 1e-3);
    for (Index k = 0; k < m.dual_coefficients.size(); ++k) {
      const double a = std::abs(m.dual_coefficients(k));
      const int label = m.dual_coefficients(k) > 0 ? 1 : -1;
      EXPECT_GT(a, 0.0);
      EXPECT_LE(a, m.upper_bound(label) + 1e-12);
    }
  }
}

TEST(Svm, BalancedWeightsHelpMinority) {
  ts::Rng rng(14);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix x(100, 2);
    std::vector<int> y;
    for (Index i = 0; i < 100; ++i) {
      const bool minority = i < 10;
      x(i, 0) = (minority ? 1.0 : -1.0) + 0.6 * ts::uniform(rng, -1, 1);
      x(i, 1) = ts::uniform(rng, -1, 1);
      y.push_back(minority ? 1 : -1);
    }
    SvmOptions balanced;
    SvmOptions uniform;
    uniform.class_weight = ClassWeight::uniform;
    balanced.C = uniform.C = 0.05;
    EXPECT_GE(minority_recall(svm_train(x, y, balanced), x, y), minority_recall(svm_train(x, y, uniform), x, y));
  }
}

TEST(Svm, PredictionRowOrderInvariant) {
  ts::Rng rng(15);
  const Matrix x = ts::gaussian_matrix(rng, 30, 4);
  std::vector<int> y;
  for (Index i = 0; i < 30; ++i) y.push_back(x(i, 0) > 0 ? 1 : -1);
  y[0] = 1;
  y[1] = -1;
  const auto m = svm_train(x, y);
  const Vector f = svm_predict(m, x);
  const Matrix reversed = x.colwise().reverse();
  const Vector g = svm_predict(m, reversed);
  for (Index i = 0; i < 30; ++i) EXPECT_EQ(f(i), g(29 - i));
}

TEST(Svm, InputErrors) {
  const Matrix x{{0.0}, {1.0}};
  EXPECT_THROW(svm_train(x, std::vector<int>{1, 1}), InvalidArgument);
  EXPECT_THROW(svm_train(Matrix{{0.0}, {std::nan("")}}, std::vector<int>{1, -1}), InvalidArgument);
  const auto m = svm_train(x, std::vector<int>{1, -1});
  EXPECT_THROW(svm_predict(m, Matrix::Zero(1, 2)), InvalidArgument);
}

TEST(Cirusim, AllZeroTestRasterGivesZeroScores) {
  BenchmarkSpec spec;
  spec.neuron_count = 8;
  spec.duration_s = 60.0;
  spec.density = 0.2;
  const auto net = sample_network(spec);
  const auto rec = synthesize_recording(net, spec);
  const std::vector<LabeledRaster> training{{&rec.spikes, &net.truth}};
  const auto empty = SpikeRaster::from_events(BinaryMatrix::Zero(100, 8), 50.0);
  const auto s = cirusim_scores(training, empty);
  EXPECT_EQ(s.scores, Matrix::Zero(8, 8));
}

TEST(Cirusim, BeatsRandomOnTrainingNetwork) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    BenchmarkSpec spec;
    spec.neuron_count = 12;
    spec.duration_s = 200.0;
    spec.density = 0.15;
    spec.seed = seed;
    const auto net = sample_network(spec);
    const auto rec = synthesize_recording(net, spec);
    const std::vector<LabeledRaster> training{{&rec.spikes, &net.truth}};
    const auto s = cirusim_scores(training, rec.spikes);
    EXPECT_TRUE(ts::score_matrix_ok(s));
    EXPECT_GE(roc_auc(flatten_pairs(s, net.truth)), 0.5) << "seed " << seed;
  }
}
