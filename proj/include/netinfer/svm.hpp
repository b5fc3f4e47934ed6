#pragma once

// Soft-margin RBF support vector classifier trained by sequential minimal optimization
// with second-order working-set selection and per-class box constraints.

#include <list>
#include <optional>
#include <span>
#include <unordered_map>

#include "netinfer/types.hpp"

namespace netinfer {

enum class ClassWeight {
  balanced,  // w_c = n / (2·n_c)
  uniform,
};

struct SvmOptions {
  double C = 1.0;
  /// RBF width; unset selects 1 / (d · variance of the standardized features).
  std::optional<double> gamma;
  ClassWeight class_weight = ClassWeight::balanced;
  double tol = 1e-3;
  long max_iterations = 10'000'000;
  /// Upper bound on kernel-cache memory in bytes.
  std::size_t cache_bytes = std::size_t{128} << 20;
};

struct SvmModel {
  Matrix support_vectors;  // standardized rows
  Vector dual_coefficients;  // α_i·y_i
  double bias = 0.0;
  double gamma = 1.0;
  double C = 1.0;
  double weight_positive = 1.0;
  double weight_negative = 1.0;
  Vector feature_mean;
  Vector feature_scale;
  long iterations = 0;
  bool converged = false;
  double final_violation = 0.0;

  Index dimension() const { return feature_mean.size(); }

  /// Box bound for a training example of the given label.
  double upper_bound(int label) const { return C * (label > 0 ? weight_positive : weight_negative); }
};

namespace detail {

inline double rbf(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b,
                  double gamma) {
  return std::exp(-gamma * (a - b).squaredNorm());
}

/// LRU cache of kernel matrix columns.
class KernelColumns {
 public:
  KernelColumns(const Matrix& x, double gamma, std::size_t budget_bytes)
      : x_(x), gamma_(gamma) {
    const std::size_t per_column = static_cast<std::size_t>(x.rows()) * sizeof(double);
    capacity_ = std::max<std::size_t>(2, budget_bytes / std::max<std::size_t>(per_column, 1));
  }

  const Vector& column(Index i) {
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    if (lru_.size() >= capacity_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    Vector col(x_.rows());
    for (Index t = 0; t < x_.rows(); ++t) col(t) = rbf(x_.row(t), x_.row(i), gamma_);
    lru_.emplace_front(i, std::move(col));
    index_[i] = lru_.begin();
    return lru_.front().second;
  }

 private:
  const Matrix& x_;
  double gamma_;
  std::size_t capacity_;
  std::list<std::pair<Index, Vector>> lru_;
  std::unordered_map<Index, std::list<std::pair<Index, Vector>>::iterator> index_;
};

}  // namespace detail

inline SvmModel svm_train(const Matrix& features, std::span<const int> labels, const SvmOptions& options = {}) {
  const Index n = features.rows();
  const Index d = features.cols();
  if (static_cast<Index>(labels.size()) != n) throw InvalidArgument("one label per feature row is required");
  if (!features.allFinite()) throw InvalidArgument("features must be finite");
  if (!(options.C > 0.0)) throw InvalidArgument("C must be positive");
  Index positives = 0;
  for (const int y : labels) {
    if (y != 1 && y != -1) throw InvalidArgument("labels must be +1 or -1");
    positives += y == 1;
  }
  const Index negatives = n - positives;
  if (positives == 0 || negatives == 0) throw InvalidArgument("SVM training needs both classes");

  SvmModel model;
  model.C = options.C;
  model.feature_mean = features.colwise().mean().transpose();
  model.feature_scale.resize(d);
  for (Index c = 0; c < d; ++c) {
    const double var = (features.col(c).array() - model.feature_mean(c)).square().mean();
    model.feature_scale(c) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  Matrix x = (features.rowwise() - model.feature_mean.transpose()).array().rowwise() /
             model.feature_scale.transpose().array();

  if (options.gamma) {
    if (!(*options.gamma > 0.0)) throw InvalidArgument("gamma must be positive");
    model.gamma = *options.gamma;
  } else {
    const double var = (x.array() - x.mean()).square().mean();
    model.gamma = var > 0.0 ? 1.0 / (static_cast<double>(d) * var) : 1.0;
  }
  if (options.class_weight == ClassWeight::balanced) {
    model.weight_positive = static_cast<double>(n) / (2.0 * static_cast<double>(positives));
    model.weight_negative = static_cast<double>(n) / (2.0 * static_cast<double>(negatives));
  }

  std::vector<double> y(static_cast<std::size_t>(n));
  std::vector<double> bound(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    y[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(i)];
    bound[static_cast<std::size_t>(i)] = model.upper_bound(labels[static_cast<std::size_t>(i)]);
  }
  Vector alpha = Vector::Zero(n);
  Vector grad = Vector::Constant(n, -1.0);  // gradient of ½αᵀQα − eᵀα
  detail::KernelColumns kernel(x, model.gamma, options.cache_bytes);
  constexpr double kTau = 1e-12;

  auto at_upper = [&](Index t) { return alpha(t) >= bound[static_cast<std::size_t>(t)]; };
  auto at_lower = [&](Index t) { return alpha(t) <= 0.0; };
  auto in_up = [&](Index t) { return y[static_cast<std::size_t>(t)] > 0 ? !at_upper(t) : !at_lower(t); };
  auto in_low = [&](Index t) { return y[static_cast<std::size_t>(t)] > 0 ? !at_lower(t) : !at_upper(t); };

  long iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    Index i = -1;
    double g_max = -std::numeric_limits<double>::infinity();
    for (Index t = 0; t < n; ++t) {
      if (!in_up(t)) continue;
      const double v = -y[static_cast<std::size_t>(t)] * grad(t);
      if (v > g_max) {
        g_max = v;
        i = t;
      }
    }
    double g_min = std::numeric_limits<double>::infinity();
    for (Index t = 0; t < n; ++t)
      if (in_low(t)) g_min = std::min(g_min, -y[static_cast<std::size_t>(t)] * grad(t));
    model.final_violation = g_max - g_min;
    if (i < 0 || g_max - g_min < options.tol) {
      model.converged = true;
      break;
    }

    const Vector& k_i = kernel.column(i);
    Index j = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Index t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double b = g_max + y[static_cast<std::size_t>(t)] * grad(t);
      if (b <= 0.0) continue;
      double a = 2.0 - 2.0 * k_i(t);  // K_ii = K_tt = 1 for RBF
      if (a <= 0.0) a = kTau;
      const double score = -(b * b) / a;
      if (score <= best) {
        best = score;
        j = t;
      }
    }
    if (j < 0) {
      model.converged = true;
      break;
    }
    // Column i sits at the front of the cache, so fetching j cannot evict it.
    const Vector& k_j = kernel.column(j);

    const double yi = y[static_cast<std::size_t>(i)];
    const double yj = y[static_cast<std::size_t>(j)];
    const double ci = bound[static_cast<std::size_t>(i)];
    const double cj = bound[static_cast<std::size_t>(j)];
    const double old_i = alpha(i);
    const double old_j = alpha(j);
    double quad = 2.0 - 2.0 * k_i(j);
    if (quad <= 0.0) quad = kTau;

    if (yi != yj) {
      const double delta = (-grad(i) - grad(j)) / quad;
      const double diff = alpha(i) - alpha(j);
      alpha(i) += delta;
      alpha(j) += delta;
      if (diff > 0.0) {
        if (alpha(j) < 0.0) { alpha(j) = 0.0; alpha(i) = diff; }
      } else {
        if (alpha(i) < 0.0) { alpha(i) = 0.0; alpha(j) = -diff; }
      }
      if (diff > ci - cj) {
        if (alpha(i) > ci) { alpha(i) = ci; alpha(j) = ci - diff; }
      } else {
        if (alpha(j) > cj) { alpha(j) = cj; alpha(i) = cj + diff; }
      }
    } else {
      const double delta = (grad(i) - grad(j)) / quad;
      const double sum = alpha(i) + alpha(j);
      alpha(i) -= delta;
      alpha(j) += delta;
      if (sum > ci) {
        if (alpha(i) > ci) { alpha(i) = ci; alpha(j) = sum - ci; }
      } else {
        if (alpha(j) < 0.0) { alpha(j) = 0.0; alpha(i) = sum; }
      }
      if (sum > cj) {
        if (alpha(j) > cj) { alpha(j) = cj; alpha(i) = sum - cj; }
      } else {
        if (alpha(i) < 0.0) { alpha(i) = 0.0; alpha(j) = sum; }
      }
    }

    const double di = alpha(i) - old_i;
    const double dj = alpha(j) - old_j;
    for (Index t = 0; t < n; ++t) {
      const double yt = y[static_cast<std::size_t>(t)];
      grad(t) += yt * (yi * k_i(t) * di + yj * k_j(t) * dj);
    }
  }
  model.iterations = iter;

  // Offset from free vectors, or the midpoint of the feasible interval when none are free.
  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  Index free_count = 0;
  for (Index t = 0; t < n; ++t) {
    const double yt = y[static_cast<std::size_t>(t)];
    const double yg = yt * grad(t);
    if (at_upper(t)) {
      if (yt < 0) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else if (at_lower(t)) {
      if (yt > 0) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (upper + lower);
  model.bias = -rho;

  std::vector<Index> support;
  for (Index t = 0; t < n; ++t)
    if (alpha(t) > 0.0) support.push_back(t);
  model.support_vectors.resize(static_cast<Index>(support.size()), d);
  model.dual_coefficients.resize(static_cast<Index>(support.size()));
  for (std::size_t s = 0; s < support.size(); ++s) {
    model.support_vectors.row(static_cast<Index>(s)) = x.row(support[s]);
    model.dual_coefficients(static_cast<Index>(s)) = alpha(support[s]) * y[static_cast<std::size_t>(support[s])];
  }
  return model;
}

/// Decision values f(x) = Σ α_i·y_i·K(x_i, x) + b for every row.
inline Vector svm_predict(const SvmModel& model, const Matrix& features) {
  if (features.cols() != model.dimension()) throw InvalidArgument("feature dimension does not match the model");
  Vector out(features.rows());
  Eigen::RowVectorXd row(features.cols());
  for (Index r = 0; r < features.rows(); ++r) {
    row = (features.row(r) - model.feature_mean.transpose()).array() / model.feature_scale.transpose().array();
    double f = model.bias;
    for (Index s = 0; s < model.support_vectors.rows(); ++s)
      f += model.dual_coefficients(s) * detail::rbf(model.support_vectors.row(s), row, model.gamma);
    out(r) = f;
  }
  return out;
}

}  // namespace netinfer
