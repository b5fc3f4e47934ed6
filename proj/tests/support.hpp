#pragma once

// Hand-rolled generators and brute-force oracles shared by the unit and
// acceptance suites. Oracles deliberately avoid the library's own helpers.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "netinfer/types.hpp"

namespace testing_support {

using netinfer::BinaryMatrix;
using netinfer::Index;
using netinfer::Matrix;
using netinfer::Vector;

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline Matrix gaussian_matrix(Rng& rng, Index rows, Index cols) {
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

// B·Bᵀ/m + shift·I: positive definite with condition number controlled by shift.
inline Matrix random_pd(Rng& rng, Index n, double shift = 0.5) {
  const Index m = n + 3;
  const Matrix b = gaussian_matrix(rng, n, m);
  Matrix s = b * b.transpose() / static_cast<double>(m);
  s.diagonal().array() += shift;
  return 0.5 * (s + s.transpose());
}

// Independent spike sources; the raster is rebuilt by hand, not via from_events.
inline netinfer::SpikeRaster random_raster(Rng& rng, Index frames, Index neurons, double p, double rate = 50.0) {
  netinfer::SpikeRaster r;
  r.sample_rate_hz = rate;
  r.events = BinaryMatrix::Zero(frames, neurons);
  r.spike_times.assign(static_cast<std::size_t>(neurons), {});
  std::bernoulli_distribution spike(p);
  for (Index t = 0; t < frames; ++t)
    for (Index i = 0; i < neurons; ++i)
      if (spike(rng)) r.events(t, i) = 1;
  for (Index i = 0; i < neurons; ++i)
    for (Index t = 0; t < frames; ++t)
      if (r.events(t, i)) r.spike_times[static_cast<std::size_t>(i)].push_back(static_cast<double>(t) / rate);
  return r;
}

inline netinfer::GroundTruthNetwork random_truth(Rng& rng, Index n, double density) {
  netinfer::GroundTruthNetwork g;
  g.edges = BinaryMatrix::Zero(n, n);
  std::bernoulli_distribution edge(density);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j && edge(rng)) g.edges(i, j) = 1;
  // Both classes must be present for AUC.
  if (g.edges.cast<int>().sum() == 0) g.edges(0, 1) = 1;
  if (g.edges.cast<int>().sum() == n * (n - 1)) g.edges(1, 0) = 0;
  return g;
}

inline netinfer::NeuronLayout random_layout(Rng& rng, Index n, double extent = 1.0) {
  netinfer::NeuronLayout layout;
  for (Index i = 0; i < n; ++i) layout.positions.push_back({uniform(rng, 0.0, extent), uniform(rng, 0.0, extent)});
  return layout;
}

struct Instance {
  std::vector<double> scores;
  std::vector<int> labels;
};

// Random scored instance with coarse values so ties are common; both classes present.
inline Instance random_instance(Rng& rng, int max_size = 50) {
  Instance inst;
  const int n = uniform_int(rng, 2, max_size);
  const int levels = uniform_int(rng, 2, 12);
  for (int k = 0; k < n; ++k) {
    inst.scores.push_back(static_cast<double>(uniform_int(rng, 0, levels)) / levels);
    inst.labels.push_back(uniform_int(rng, 0, 1));
  }
  inst.labels[0] = 1;
  inst.labels[1] = 0;
  return inst;
}

// P(score_pos > score_neg) + ½·P(tie) by direct enumeration of all pairs.
inline double brute_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t a = 0; a < s.size(); ++a) {
    if (y[a] != 1) continue;
    for (std::size_t b = 0; b < s.size(); ++b) {
      if (y[b] != 0) continue;
      pairs += 1.0;
      if (s[a] > s[b]) wins += 1.0;
      else if (s[a] == s[b]) wins += 0.5;
    }
  }
  return wins / pairs;
}

// Average precision by walking descending distinct thresholds:
// Σ (recall_k − recall_{k−1})·precision_k with all tied items admitted together.
inline double brute_ap(const std::vector<double>& s, const std::vector<int>& y) {
  std::set<double, std::greater<>> thresholds(s.begin(), s.end());
  double positives = 0.0;
  for (int v : y) positives += v;
  double prev_recall = 0.0;
  double ap = 0.0;
  for (double thr : thresholds) {
    double admitted = 0.0;
    double hits = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (s[k] >= thr) {
        admitted += 1.0;
        hits += y[k];
      }
    }
    const double recall = hits / positives;
    ap += (recall - prev_recall) * (hits / admitted);
    prev_recall = recall;
  }
  return ap;
}

// Eq.-style objective logdet Θ − tr(SΘ) − λ Σ_{i≠j}|Θ_ij| with logdet from eigenvalues.
inline double objective_oracle(const Matrix& theta, const Matrix& s, double lambda) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (theta + theta.transpose()), Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0) return -std::numeric_limits<double>::infinity();
  double logdet = 0.0;
  for (Index k = 0; k < eig.eigenvalues().size(); ++k) logdet += std::log(eig.eigenvalues()(k));
  double trace = 0.0;
  double l1 = 0.0;
  for (Index i = 0; i < s.rows(); ++i)
    for (Index j = 0; j < s.cols(); ++j) {
      trace += s(i, j) * theta(j, i);
      if (i != j) l1 += std::abs(theta(i, j));
    }
  return logdet - trace - lambda * l1;
}

inline double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

// Direct Hawkes log-likelihood over all earlier-frame spike pairs, complete compensator.
inline double hawkes_ll_oracle(const netinfer::SpikeRaster& r, const Vector& mu, const Matrix& w, double theta) {
  struct Ev {
    double t;
    Index k;
    Index frame;
  };
  std::vector<Ev> ev;
  for (Index t = 0; t < r.frames(); ++t)
    for (Index k = 0; k < r.neuron_count(); ++k)
      if (r.events(t, k)) ev.push_back({static_cast<double>(t) / r.sample_rate_hz, k, t});
  const double duration = static_cast<double>(r.frames()) / r.sample_rate_hz;
  double ll = -mu.sum() * duration;
  for (const auto& e : ev) ll -= w.row(e.k).sum();
  for (const auto& e : ev) {
    double lambda = mu(e.k);
    for (const auto& p : ev)
      if (p.frame < e.frame) lambda += w(p.k, e.k) * theta * std::exp(-theta * (e.t - p.t));
    ll += std::log(lambda);
  }
  return ll;
}

// Pearson correlation between x[0..L) and y[lag..lag+L) by explicit sums.
inline double lagged_pearson_oracle(const std::vector<double>& x, const std::vector<double>& y, std::size_t lag) {
  const std::size_t len = x.size() - lag;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t t = 0; t < len; ++t) {
    mx += x[t];
    my += y[t + lag];
  }
  mx /= static_cast<double>(len);
  my /= static_cast<double>(len);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t t = 0; t < len; ++t) {
    sxy += (x[t] - mx) * (y[t + lag] - my);
    sxx += (x[t] - mx) * (x[t] - mx);
    syy += (y[t + lag] - my) * (y[t + lag] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

inline bool score_matrix_ok(const netinfer::ScoreMatrix& m) {
  const Index n = m.scores.rows();
  if (m.scores.cols() != n) return false;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const double v = m.scores(i, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) return false;
      if (i == j && v != 0.0) return false;
    }
  return true;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    Rng rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("netinfer_" + tag + "_" + std::to_string(rng() % 1000000000));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
