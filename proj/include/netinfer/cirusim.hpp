#pragma once

// Influence-cascade classifier: for every directed pair (i → j) the delays between
// spikes of i and the next spike of j are turned into scores, summarized into four
// features and classified by a class-weighted RBF support vector machine.

#include <span>

#include "netinfer/preprocess.hpp"
#include "netinfer/svm.hpp"
#include "netinfer/types.hpp"

namespace netinfer {

enum class RefractoryScope {
  source_neuron,  // discard candidates within the window after an earlier spike of the source
  any_neuron,     // ... after an earlier spike of any neuron
};

struct CirusimOptions {
  double activity_fraction = 0.7;
  double refractory_s = 1.0;
  RefractoryScope scope = RefractoryScope::source_neuron;
  double clamp_floor_s = 0.1;
  SvmOptions svm;
};

/// Candidate impulse-response delays for every ordered pair, indexed source-major.
struct SpanTable {
  Index neuron_count = 0;
  std::vector<std::vector<double>> spans;

  const std::vector<double>& at(Index source, Index target) const {
    return spans[static_cast<std::size_t>(source * neuron_count + target)];
  }
};

/// For each spike s of neuron i at time t and every other neuron j, the earliest spike of j
/// strictly after t is a candidate; it is dropped when it falls less than `refractory_s`
/// after a spike preceding s (of i, or of any neuron, depending on `scope`).
inline SpanTable extract_span_series(const SpikeRaster& raster, double refractory_s = 1.0,
                                     RefractoryScope scope = RefractoryScope::source_neuron) {
  const Index n = raster.neuron_count();
  SpanTable table;
  table.neuron_count = n;
  table.spans.assign(static_cast<std::size_t>(n * n), {});

  std::vector<double> all_times;
  if (scope == RefractoryScope::any_neuron) {
    for (const auto& times : raster.spike_times) all_times.insert(all_times.end(), times.begin(), times.end());
    std::sort(all_times.begin(), all_times.end());
  }

  for (Index i = 0; i < n; ++i) {
    const auto& source = raster.spike_times[static_cast<std::size_t>(i)];
    for (std::size_t m = 0; m < source.size(); ++m) {
      const double t = source[m];
      double preceding = -std::numeric_limits<double>::infinity();
      if (scope == RefractoryScope::source_neuron) {
        if (m > 0) preceding = source[m - 1];
      } else {
        const auto it = std::lower_bound(all_times.begin(), all_times.end(), t);
        if (it != all_times.begin()) preceding = *std::prev(it);
      }
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const auto& target = raster.spike_times[static_cast<std::size_t>(j)];
        const auto next = std::upper_bound(target.begin(), target.end(), t);
        if (next == target.end()) continue;
        if (*next - preceding < refractory_s) continue;
        table.spans[static_cast<std::size_t>(i * n + j)].push_back(*next - t);
      }
    }
  }
  return table;
}

/// exp(1/x) − 1 with x clamped below at `clamp_floor_s`.
inline double span_score(double span_s, double clamp_floor_s = 0.1) {
  return std::expm1(1.0 / std::max(span_s, clamp_floor_s));
}

struct PairFeatureVector {
  double impulse_count = 0.0;
  double mean_score = 0.0;
  double var_score = 0.0;
  double p95_score = 0.0;

  static constexpr Index kSize = 4;
};

/// Count, mean, population variance and nearest-rank 95th percentile of the scores.
inline PairFeatureVector summarize_scores(std::vector<double> scores) {
  PairFeatureVector f;
  if (scores.empty()) return f;
  const double n = static_cast<double>(scores.size());
  f.impulse_count = n;
  for (const double s : scores) f.mean_score += s;
  f.mean_score /= n;
  for (const double s : scores) f.var_score += (s - f.mean_score) * (s - f.mean_score);
  f.var_score /= n;
  std::sort(scores.begin(), scores.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * n));
  f.p95_score = scores[std::max<std::size_t>(rank, 1) - 1];
  return f;
}

inline PairFeatureVector transform_and_featurize(std::span<const double> spans, double clamp_floor_s = 0.1) {
  std::vector<double> scores;
  scores.reserve(spans.size());
  for (const double x : spans) {
    if (!(x > 0.0)) throw InvalidArgument("spans must be positive");
    scores.push_back(span_score(x, clamp_floor_s));
  }
  return summarize_scores(std::move(scores));
}

/// Row r = i·(N−1) + (j < i ? j : j−1) holds the features of pair i → j.
inline Index pair_row(Index source, Index target, Index n) {
  return source * (n - 1) + (target < source ? target : target - 1);
}

/// One feature row per ordered pair (i ≠ j), in pair_row order. The raster is filtered
/// for high-activity frames first.
inline Matrix pair_features(const SpikeRaster& raster, const CirusimOptions& options = {}) {
  const SpikeRaster filtered = remove_high_activity_frames(raster, options.activity_fraction);
  const SpanTable table = extract_span_series(filtered, options.refractory_s, options.scope);
  const Index n = raster.neuron_count();
  Matrix rows(n * (n - 1), PairFeatureVector::kSize);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto f = transform_and_featurize(table.at(i, j), options.clamp_floor_s);
      rows.row(pair_row(i, j, n)) << f.impulse_count, f.mean_score, f.var_score, f.p95_score;
    }
  }
  return rows;
}

inline std::vector<int> pair_labels(const GroundTruthNetwork& truth) {
  const Index n = truth.neuron_count();
  std::vector<int> labels(static_cast<std::size_t>(n * (n - 1)));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j) labels[static_cast<std::size_t>(pair_row(i, j, n))] = truth.edges(i, j) != 0 ? 1 : -1;
  return labels;
}

struct LabeledRaster {
  const SpikeRaster* raster = nullptr;
  const GroundTruthNetwork* truth = nullptr;
};

inline SvmModel cirusim_train(std::span<const LabeledRaster> training, const CirusimOptions& options = {}) {
  if (training.empty()) throw InvalidArgument("CIRUSIM needs at least one training network");
  std::vector<Matrix> blocks;
  std::vector<int> labels;
  Index rows = 0;
  for (const auto& net : training) {
    if (net.raster->neuron_count() != net.truth->neuron_count())
      throw ConsistencyError("training raster and ground truth disagree on neuron count");
    blocks.push_back(pair_features(*net.raster, options));
    rows += blocks.back().rows();
    const auto l = pair_labels(*net.truth);
    labels.insert(labels.end(), l.begin(), l.end());
  }
  Matrix features(rows, PairFeatureVector::kSize);
  Index offset = 0;
  for (const auto& b : blocks) {
    features.middleRows(offset, b.rows()) = b;
    offset += b.rows();
  }
  return svm_train(features, labels, options.svm);
}

/// Decision values of every ordered pair, min-max normalized to [0,1].
inline ScoreMatrix cirusim_score(const SvmModel& model, const SpikeRaster& test, const CirusimOptions& options = {}) {
  const Index n = test.neuron_count();
  const Vector decision = svm_predict(model, pair_features(test, options));
  Matrix raw = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j) raw(i, j) = decision(pair_row(i, j, n));
  return {normalize_off_diagonal(raw), "cirusim"};
}

inline ScoreMatrix cirusim_scores(std::span<const LabeledRaster> training, const SpikeRaster& test,
                                  const CirusimOptions& options = {}) {
  return cirusim_score(cirusim_train(training, options), test, options);
}

}  // namespace netinfer
