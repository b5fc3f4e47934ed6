#pragma once

// ROC-AUC, average precision and the leave-one-network-out driver.

#include <atomic>
#include <chrono>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <thread>

#include "netinfer/types.hpp"

namespace netinfer {

struct LabeledScore {
  double score = 0.0;
  int label = 0;  // 0 or 1
};

using LabeledScores = std::vector<LabeledScore>;

/// Every off-diagonal ordered pair (i, j), in row-major order.
inline LabeledScores flatten_pairs(const ScoreMatrix& scores, const GroundTruthNetwork& truth) {
  if (scores.neuron_count() != truth.neuron_count())
    throw ConsistencyError("score matrix and ground truth disagree on neuron count");
  const Index n = scores.neuron_count();
  LabeledScores out;
  out.reserve(static_cast<std::size_t>(n * (n - 1)));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j) out.push_back({scores.scores(i, j), truth.edges(i, j) != 0 ? 1 : 0});
  return out;
}

/// Mann–Whitney statistic: P(score_pos > score_neg) + ½·P(tie), via midrank sums.
inline double roc_auc(const LabeledScores& data) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return data[a].score < data[b].score; });
  double positives = 0.0;
  double rank_sum = 0.0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    while (end < order.size() && data[order[end]].score == data[order[start]].score) ++end;
    // 1-based ranks start+1 .. end share the midrank
    const double midrank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k) {
      if (data[order[k]].label != 0) {
        positives += 1.0;
        rank_sum += midrank;
      }
    }
    start = end;
  }
  const double negatives = static_cast<double>(data.size()) - positives;
  if (positives == 0.0 || negatives == 0.0) throw InvalidArgument("AUC undefined: both classes are required");
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

/// Average precision with tied scores processed as one block.
inline double pr_auc(const LabeledScores& data) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return data[a].score > data[b].score; });
  double total_pos = 0.0;
  for (const auto& d : data) total_pos += d.label != 0;
  if (total_pos == 0.0) throw InvalidArgument("average precision undefined: no positive labels");
  double seen = 0.0;
  double true_pos = 0.0;
  double ap = 0.0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    double block_pos = 0.0;
    while (end < order.size() && data[order[end]].score == data[order[start]].score) {
      block_pos += data[order[end]].label != 0;
      ++end;
    }
    seen += static_cast<double>(end - start);
    true_pos += block_pos;
    if (block_pos > 0.0) ap += (true_pos / seen) * (block_pos / total_pos);
    start = end;
  }
  return ap;
}

/// Everything the cross-validation driver knows about one recorded network.
struct NetworkRecord {
  std::string id;
  FluorescencePanel panel;
  NeuronLayout layout;
  GroundTruthNetwork truth;
  SpikeRaster raster;  // preprocessed
};

struct Method {
  std::string tag;
  bool supervised = false;
  /// Scores `test`; `training` is empty for unsupervised methods.
  std::function<ScoreMatrix(const NetworkRecord& test, std::span<const NetworkRecord* const> training)> score;
};

/// Holds out each network once. Supervised methods train on the others; unsupervised
/// methods score the held-out network on its own. Folds may run on `parallelism` threads;
/// results do not depend on it.
inline EvalReport leave_one_network_out(std::span<const NetworkRecord> networks, const Method& method,
                                        unsigned parallelism = 1) {
  if (networks.empty()) throw InvalidArgument("cross-validation needs at least one network");
  if (method.supervised && networks.size() < 2)
    throw InvalidArgument("supervised method '" + method.tag + "' needs at least 2 networks");

  std::vector<FoldResult> folds(networks.size());
  auto run_fold = [&](std::size_t k) {
    std::vector<const NetworkRecord*> training;
    if (method.supervised)
      for (std::size_t o = 0; o < networks.size(); ++o)
        if (o != k) training.push_back(&networks[o]);
    const auto start = std::chrono::steady_clock::now();
    ScoreMatrix scores = method.score(networks[k], training);
    const auto stop = std::chrono::steady_clock::now();
    scores.validate();
    const LabeledScores pairs = flatten_pairs(scores, networks[k].truth);
    folds[k] = {networks[k].id, roc_auc(pairs), pr_auc(pairs), std::chrono::duration<double>(stop - start).count()};
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(parallelism, static_cast<unsigned>(networks.size())));
  if (workers == 1) {
    for (std::size_t k = 0; k < networks.size(); ++k) run_fold(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < networks.size(); k = next++) {
          try {
            run_fold(k);
          } catch (...) {
            const std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }
  return EvalReport::from_folds(method.tag, std::move(folds));
}

}  // namespace netinfer
