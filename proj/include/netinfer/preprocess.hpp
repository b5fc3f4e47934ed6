#pragma once

// Light-scatter correction, spike discretization and frame filtering.

#include <functional>

#include "netinfer/types.hpp"

namespace netinfer {

enum class ScatterKernel {
  decaying,  // amplitude·exp(−d²/length_scale), the physical reading
  growing,   // amplitude·exp(+d²/length_scale), the literal printed form
};

struct ScatterOptions {
  double amplitude = 0.15;
  double length_scale = 2.0;
  ScatterKernel kernel = ScatterKernel::decaying;
  /// Added to the diagonal; 0 disables. Use ~1e-8 when the layout produces a near-singular matrix.
  double ridge = 0.0;
};

/// Symmetric neuron-to-neuron scatter weights with unit diagonal.
struct ScatterMatrix {
  Matrix weights;
  double amplitude = 0.15;
  double length_scale = 2.0;

  Index neuron_count() const { return weights.rows(); }
};

inline constexpr double kMaxScatterCondition = 1e12;

namespace detail {

inline double symmetric_condition(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  const Vector abs_values = eig.eigenvalues().cwiseAbs();
  const double lo = abs_values.minCoeff();
  const double hi = abs_values.maxCoeff();
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

}  // namespace detail

inline ScatterMatrix build_scatter_matrix(const NeuronLayout& layout, const ScatterOptions& options = {}) {
  const Index n = layout.neuron_count();
  if (n < 2) throw InvalidArgument("scatter matrix needs at least 2 neurons");
  if (!(options.length_scale > 0.0)) throw InvalidArgument("scatter length scale must be positive");
  for (const auto& p : layout.positions)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InvalidArgument("neuron positions must be finite");

  const double sign = options.kernel == ScatterKernel::decaying ? -1.0 : 1.0;
  ScatterMatrix d;
  d.amplitude = options.amplitude;
  d.length_scale = options.length_scale;
  d.weights.resize(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (i == j) {
        d.weights(i, j) = 1.0 + options.ridge;
      } else {
        const double d2 = squared_distance(layout.positions[static_cast<std::size_t>(i)],
                                           layout.positions[static_cast<std::size_t>(j)]);
        d.weights(i, j) = options.amplitude * std::exp(sign * d2 / options.length_scale);
      }
    }
  }
  if (detail::symmetric_condition(d.weights) > kMaxScatterCondition)
    throw NumericError("scatter matrix is singular or ill-conditioned; rebuild with a diagonal ridge (e.g. 1e-8)");
  return d;
}

/// Applies scatter to every time step: observed row = D · true row.
inline FluorescencePanel forward_scatter(const FluorescencePanel& panel, const ScatterMatrix& scatter) {
  if (scatter.neuron_count() != panel.neuron_count())
    throw InvalidArgument("scatter matrix and panel disagree on neuron count");
  FluorescencePanel out;
  out.sample_rate_hz = panel.sample_rate_hz;
  out.values = panel.values * scatter.weights.transpose();
  return out;
}

/// Replaces every time-step row y by the solution x of D·x = y.
inline FluorescencePanel correct_scatter(const FluorescencePanel& panel, const ScatterMatrix& scatter) {
  if (scatter.neuron_count() != panel.neuron_count())
    throw InvalidArgument("scatter matrix and panel disagree on neuron count");
  const double cond = detail::symmetric_condition(scatter.weights);
  if (cond > kMaxScatterCondition)
    throw NumericError("scatter matrix condition estimate " + std::to_string(cond) + " exceeds 1e12");
  const Eigen::PartialPivLU<Matrix> lu(scatter.weights);
  FluorescencePanel out;
  out.sample_rate_hz = panel.sample_rate_hz;
  out.values = lu.solve(panel.values.transpose()).transpose();
  return out;
}

using Discretizer = std::function<SpikeRaster(const FluorescencePanel&)>;

inline constexpr double kDefaultSpikeThreshold = 0.12;

/// events(t, i) = 1 iff the frame-to-frame increase exceeds `threshold`; frame 0 never spikes.
inline SpikeRaster discretize(const FluorescencePanel& panel, double threshold = kDefaultSpikeThreshold) {
  if (panel.frames() < 2) throw InvalidArgument("discretize needs at least 2 time steps");
  BinaryMatrix events = BinaryMatrix::Zero(panel.frames(), panel.neuron_count());
  for (Index i = 0; i < panel.neuron_count(); ++i)
    for (Index t = 1; t < panel.frames(); ++t)
      events(t, i) = panel.values(t, i) - panel.values(t - 1, i) > threshold ? 1 : 0;
  return SpikeRaster::from_events(std::move(events), panel.sample_rate_hz);
}

inline Discretizer first_difference_discretizer(double threshold = kDefaultSpikeThreshold) {
  return [threshold](const FluorescencePanel& panel) { return discretize(panel, threshold); };
}

/// Zeroes (does not delete) frames in which more than `fraction` of the neurons spike.
inline SpikeRaster remove_high_activity_frames(const SpikeRaster& raster, double fraction = 0.7) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("activity fraction must lie in (0,1)");
  BinaryMatrix events = raster.events;
  const double n = static_cast<double>(raster.neuron_count());
  for (Index t = 0; t < events.rows(); ++t) {
    const double active = events.row(t).cast<double>().sum();
    if (active / n > fraction) events.row(t).setZero();
  }
  return SpikeRaster::from_events(std::move(events), raster.sample_rate_hz);
}

/// Trailing moving sum: out(t) = Σ_{k<length, k<=t} in(t−k).
inline Matrix summation_filter(const Matrix& series, Index length = 3) {
  if (length < 1) throw InvalidArgument("summation filter length must be >= 1");
  Matrix out = series;
  for (Index k = 1; k < length; ++k)
    if (series.rows() > k) out.bottomRows(series.rows() - k) += series.topRows(series.rows() - k);
  return out;
}

struct PreprocessOptions {
  ScatterOptions scatter;
  bool correct = true;
  double threshold = kDefaultSpikeThreshold;
};

/// Scatter correction followed by first-difference discretization.
inline SpikeRaster preprocess(const FluorescencePanel& panel, const NeuronLayout& layout,
                              const PreprocessOptions& options = {}) {
  panel.validate();
  if (!options.correct) return discretize(panel, options.threshold);
  if (layout.neuron_count() != panel.neuron_count())
    throw ConsistencyError("layout and panel disagree on neuron count");
  return discretize(correct_scatter(panel, build_scatter_matrix(layout, options.scatter)), options.threshold);
}

}  // namespace netinfer
