#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "netinfer/errors.hpp"

namespace netinfer {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kDefaultSampleRateHz = 50.0;

/// Raw activation traces, one row per time step and one column per neuron.
struct FluorescencePanel {
  Matrix values;
  double sample_rate_hz = kDefaultSampleRateHz;

  Index frames() const { return values.rows(); }
  Index neuron_count() const { return values.cols(); }

  void validate() const {
    if (values.rows() < 2) throw InvalidArgument("fluorescence panel needs at least 2 time steps");
    if (values.cols() < 2) throw InvalidArgument("fluorescence panel needs at least 2 neurons");
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
      throw InvalidArgument("sample rate must be positive");
    if (!values.allFinite()) throw InvalidArgument("fluorescence panel contains non-finite values");
  }
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline double squared_distance(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

struct NeuronLayout {
  std::vector<Point2> positions;

  Index neuron_count() const { return static_cast<Index>(positions.size()); }
};

/// Directed binary connectivity: edges(i, j) == 1 iff neuron i synapses onto j.
struct GroundTruthNetwork {
  BinaryMatrix edges;

  Index neuron_count() const { return edges.rows(); }

  std::size_t edge_count() const {
    std::size_t n = 0;
    for (Index j = 0; j < edges.cols(); ++j)
      for (Index i = 0; i < edges.rows(); ++i) n += edges(i, j) != 0;
    return n;
  }

  /// Fraction of the N·(N−1) possible directed edges that are present.
  double density() const {
    const auto n = static_cast<double>(neuron_count());
    return n < 2 ? 0.0 : static_cast<double>(edge_count()) / (n * (n - 1.0));
  }
};

/// Binary event raster plus per-neuron sorted spike times in seconds.
struct SpikeRaster {
  BinaryMatrix events;  // frames × neurons
  std::vector<std::vector<double>> spike_times;
  double sample_rate_hz = kDefaultSampleRateHz;

  Index frames() const { return events.rows(); }
  Index neuron_count() const { return events.cols(); }
  double duration_s() const { return static_cast<double>(events.rows()) / sample_rate_hz; }

  std::size_t spike_count(Index neuron) const { return spike_times[static_cast<std::size_t>(neuron)].size(); }

  std::size_t total_spikes() const {
    std::size_t n = 0;
    for (const auto& times : spike_times) n += times.size();
    return n;
  }

  Matrix as_real() const { return events.cast<double>(); }

  /// Rebuilds spike_times from events.
  void rebuild_times() {
    spike_times.assign(static_cast<std::size_t>(events.cols()), {});
    for (Index i = 0; i < events.cols(); ++i) {
      auto& times = spike_times[static_cast<std::size_t>(i)];
      for (Index t = 0; t < events.rows(); ++t)
        if (events(t, i) != 0) times.push_back(static_cast<double>(t) / sample_rate_hz);
    }
  }

  static SpikeRaster from_events(BinaryMatrix events, double sample_rate_hz) {
    SpikeRaster raster;
    raster.events = std::move(events);
    raster.sample_rate_hz = sample_rate_hz;
    raster.rebuild_times();
    return raster;
  }
};

/// Directed connection scores in [0,1] with an exactly zero diagonal.
struct ScoreMatrix {
  Matrix scores;
  std::string method_tag;

  Index neuron_count() const { return scores.rows(); }

  void validate() const {
    if (scores.rows() != scores.cols()) throw InvalidArgument("score matrix must be square");
    for (Index j = 0; j < scores.cols(); ++j) {
      for (Index i = 0; i < scores.rows(); ++i) {
        const double v = scores(i, j);
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
          throw InvalidArgument("score (" + std::to_string(i) + "," + std::to_string(j) +
                                ") = " + std::to_string(v) + " outside [0,1]");
        if (i == j && v != 0.0) throw InvalidArgument("score matrix diagonal must be 0");
      }
    }
  }
};

/// Min-max normalization over the off-diagonal entries; diagonal forced to 0.
/// When every off-diagonal entry is equal the whole matrix maps to 0.
inline Matrix normalize_off_diagonal(const Matrix& raw) {
  const Index n = raw.rows();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (i != j) {
        lo = std::min(lo, raw(i, j));
        hi = std::max(hi, raw(i, j));
      }
  Matrix out = Matrix::Zero(n, n);
  if (!(hi > lo)) return out;
  const double span = hi - lo;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (i != j) out(i, j) = std::clamp((raw(i, j) - lo) / span, 0.0, 1.0);
  return out;
}

struct FoldResult {
  std::string network_id;
  double auc = 0.0;
  double prc = 0.0;
  double seconds = 0.0;
};

/// One method's evaluation; aggregates are means over the folds.
struct EvalReport {
  std::string method_tag;
  double auc = 0.0;
  double prc = 0.0;
  std::vector<FoldResult> per_fold;
  double wall_clock_seconds = 0.0;

  static EvalReport from_folds(std::string method_tag, std::vector<FoldResult> folds) {
    if (folds.empty()) throw InvalidArgument("evaluation report needs at least one fold");
    EvalReport report;
    report.method_tag = std::move(method_tag);
    const double k = static_cast<double>(folds.size());
    for (const auto& f : folds) {
      report.auc += f.auc;
      report.prc += f.prc;
      report.wall_clock_seconds += f.seconds;
    }
    report.auc /= k;
    report.prc /= k;
    report.wall_clock_seconds /= k;
    report.per_fold = std::move(folds);
    return report;
  }

  void validate() const {
    if (per_fold.empty()) throw InvalidArgument("evaluation report needs at least one fold");
    auto in_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
    if (!in_unit(auc) || !in_unit(prc)) throw InvalidArgument("AUC/PRC must lie in [0,1]");
    if (!(wall_clock_seconds >= 0.0)) throw InvalidArgument("wall clock seconds must be >= 0");
  }
};

}  // namespace netinfer
