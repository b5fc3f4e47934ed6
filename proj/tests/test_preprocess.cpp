#include <gtest/gtest.h>

#include "netinfer/preprocess.hpp"
#include "support.hpp"

using namespace netinfer;
namespace ts = testing_support;

namespace {

NeuronLayout pair_at_distance(double d) { return NeuronLayout{{{0.0, 0.0}, {d, 0.0}}}; }

FluorescencePanel panel_of(Matrix values) { return FluorescencePanel{std::move(values), 50.0}; }

}  // namespace

TEST(Scatter, CoincidentPairGivesAmplitude) {
  const auto d = build_scatter_matrix(pair_at_distance(0.0));
  EXPECT_DOUBLE_EQ(d.weights(0, 1), 0.15);
  EXPECT_DOUBLE_EQ(d.weights(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(d.weights(1, 1), 1.0);
}

TEST(Scatter, FarPairApproachesIdentity) {
  const auto d = build_scatter_matrix(pair_at_distance(100.0));
  EXPECT_LT(d.weights(0, 1), 1e-300);
}

TEST(Scatter, UnitDistanceKernelValue) {
  const auto d = build_scatter_matrix(pair_at_distance(1.0));
  EXPECT_NEAR(d.weights(0, 1), 0.15 * std::exp(-0.5), 1e-15);
  EXPECT_NEAR(d.weights(0, 1), 0.0910, 5e-5);
  EXPECT_DOUBLE_EQ(d.weights(0, 1), d.weights(1, 0));
}

TEST(Scatter, GrowingKernelSelectable) {
  ScatterOptions opt;
  opt.kernel = ScatterKernel::growing;
  const auto d = build_scatter_matrix(pair_at_distance(1.0), opt);
  EXPECT_NEAR(d.weights(0, 1), 0.15 * std::exp(0.5), 1e-15);
}

TEST(Scatter, SingularMatrixSuggestsRidge) {
  ScatterOptions opt;
  opt.amplitude = 1.0;
  NeuronLayout layout{{{0.0, 0.0}, {0.0, 0.0}}};
  try {
    build_scatter_matrix(layout, opt);
    FAIL() << "expected a numeric error";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("ridge"), std::string::npos);
  }
  opt.ridge = 1e-3;
  EXPECT_NO_THROW(build_scatter_matrix(layout, opt));
}

TEST(Scatter, IdentityCorrectionIsNoOp) {
  ScatterOptions opt;
  opt.amplitude = 0.0;
  const auto d = build_scatter_matrix(pair_at_distance(0.3), opt);
  const auto panel = panel_of(Matrix{{1.0, 2.0}, {3.0, -4.0}});
  EXPECT_EQ(correct_scatter(panel, d).values, panel.values);
}

TEST(Scatter, TwoByTwoAnalyticSolve) {
  const auto d = build_scatter_matrix(pair_at_distance(0.0));
  const auto out = correct_scatter(panel_of(Matrix{{1.0, 1.0}}), d);
  const double expected = 0.85 / 0.9775;
  EXPECT_NEAR(out.values(0, 0), expected, 1e-12);
  EXPECT_NEAR(out.values(0, 1), expected, 1e-12);
  EXPECT_NEAR(expected, 0.8695, 1e-4);
}

TEST(Scatter, DimensionMismatchRejected) {
  const auto d = build_scatter_matrix(pair_at_distance(0.5));
  EXPECT_THROW(correct_scatter(panel_of(Matrix::Zero(3, 3)), d), InvalidArgument);
}

TEST(Scatter, RoundTripProperty) {
  ts::Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = ts::uniform_int(rng, 2, 20);
    const auto layout = ts::random_layout(rng, n);
    const auto d = build_scatter_matrix(layout);
    const auto panel = panel_of(ts::gaussian_matrix(rng, 30, n));
    const auto back = correct_scatter(forward_scatter(panel, d), d);
    EXPECT_LE((back.values - panel.values).norm() / panel.values.norm(), 1e-8);
  }
}

TEST(Discretize, ConstantTraceIsSilent) {
  const auto r = discretize(panel_of(Matrix::Constant(6, 3, 0.7)));
  EXPECT_EQ(r.total_spikes(), 0u);
}

TEST(Discretize, ThresholdOnIncrements) {
  const auto r = discretize(panel_of(Matrix{{0.0}, {0.2}, {0.25}}), 0.12);
  EXPECT_EQ(r.events(0, 0), 0);
  EXPECT_EQ(r.events(1, 0), 1);
  EXPECT_EQ(r.events(2, 0), 0);
}

TEST(Discretize, RampSpikeTimes) {
  Matrix v(5, 1);
  for (Index t = 0; t < 5; ++t) v(t, 0) = 0.13 * static_cast<double>(t);
  const auto r = discretize(panel_of(v));
  ASSERT_EQ(r.spike_times[0].size(), 4u);
  const double expected[] = {0.02, 0.04, 0.06, 0.08};
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(r.spike_times[0][static_cast<std::size_t>(k)], expected[k], 1e-12);
}

TEST(Discretize, BinaryAndMonotoneInThreshold) {
  ts::Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto panel = panel_of(0.1 * ts::gaussian_matrix(rng, 50, 4));
    std::size_t previous = std::numeric_limits<std::size_t>::max();
    for (double thr : {-0.1, 0.0, 0.05, 0.12, 0.2, 0.4}) {
      const auto r = discretize(panel, thr);
      EXPECT_TRUE(((r.events.array() == 0) || (r.events.array() == 1)).all());
      EXPECT_LE(r.total_spikes(), previous);
      previous = r.total_spikes();
    }
  }
}

TEST(ActivityFilter, FullFrameZeroed) {
  BinaryMatrix e = BinaryMatrix::Zero(3, 4);
  e.row(1).setOnes();
  e(2, 0) = 1;
  const auto r = remove_high_activity_frames(SpikeRaster::from_events(e, 50.0));
  EXPECT_EQ(r.events.row(1).cast<int>().sum(), 0);
  EXPECT_EQ(r.events(2, 0), 1);
  EXPECT_EQ(r.frames(), 3);
}

TEST(ActivityFilter, StrictSeventyPercent) {
  BinaryMatrix e = BinaryMatrix::Zero(2, 10);
  for (Index i = 0; i < 8; ++i) e(0, i) = 1;
  for (Index i = 0; i < 7; ++i) e(1, i) = 1;
  const auto r = remove_high_activity_frames(SpikeRaster::from_events(e, 50.0), 0.7);
  EXPECT_EQ(r.events.row(0).cast<int>().sum(), 0);
  EXPECT_EQ(r.events.row(1).cast<int>().sum(), 7);
  EXPECT_EQ(r.spike_times[0].size(), 1u);
}

TEST(ActivityFilter, NeverIncreasesCounts) {
  ts::Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto raw = ts::random_raster(rng, 60, 5, ts::uniform(rng, 0.1, 0.9));
    const auto r = remove_high_activity_frames(raw, 0.5);
    for (Index i = 0; i < 5; ++i) EXPECT_LE(r.spike_count(i), raw.spike_count(i));
  }
}

TEST(ActivityFilter, FractionMustBeOpenUnitInterval) {
  const auto r = SpikeRaster::from_events(BinaryMatrix::Zero(2, 2), 50.0);
  EXPECT_THROW(remove_high_activity_frames(r, 0.0), InvalidArgument);
  EXPECT_THROW(remove_high_activity_frames(r, 1.0), InvalidArgument);
}

TEST(Summation, TrailingWindow) {
  const Matrix s = summation_filter(Matrix{{1.0}, {0.0}, {1.0}, {1.0}}, 3);
  EXPECT_DOUBLE_EQ(s(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(s(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(s(2, 0), 2.0);
  EXPECT_DOUBLE_EQ(s(3, 0), 2.0);
}
