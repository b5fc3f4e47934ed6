#pragma once

// Model-free scorers: lagged cross-correlation and partial correlation through
// PCA-truncated or l1-penalized (graphical lasso) precision matrices.

#include <functional>
#include <span>

#include "netinfer/types.hpp"

namespace netinfer {

// ---------------------------------------------------------------------------
// Cross-correlation

namespace detail {

inline bool is_constant(const Eigen::Ref<const Vector>& v) { return v.size() == 0 || v.maxCoeff() == v.minCoeff(); }

}  // namespace detail

/// Pearson correlation between series i over [0, T−lag) and series j over [lag, T),
/// returned as an N×N matrix with entry (i, j) for the direction i → j. Series with
/// zero variance on their window correlate as 0.
inline Matrix lagged_correlation(const Matrix& series, Index lag) {
  if (lag < 0) throw InvalidArgument("lag must be >= 0");
  if (lag >= series.rows()) throw InvalidArgument("lag must be smaller than the series length");
  const Index len = series.rows() - lag;
  const Index n = series.cols();
  Matrix lead = series.topRows(len);
  Matrix follow = series.bottomRows(len);
  lead.rowwise() -= lead.colwise().mean();
  follow.rowwise() -= follow.colwise().mean();
  const Vector lead_norm = lead.colwise().norm().transpose();
  const Vector follow_norm = follow.colwise().norm().transpose();
  std::vector<bool> lead_flat(static_cast<std::size_t>(n));
  std::vector<bool> follow_flat(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    lead_flat[static_cast<std::size_t>(i)] = detail::is_constant(series.col(i).head(len));
    follow_flat[static_cast<std::size_t>(i)] = detail::is_constant(series.col(i).tail(len));
  }
  Matrix raw = lead.transpose() * follow;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (lead_flat[static_cast<std::size_t>(i)] || follow_flat[static_cast<std::size_t>(j)]) {
        raw(i, j) = 0.0;
      } else {
        raw(i, j) = std::clamp(raw(i, j) / (lead_norm(i) * follow_norm(j)), -1.0, 1.0);
      }
    }
  }
  return raw;
}

/// Directed scores from lagged correlation averaged over `lags`, min-max normalized.
inline ScoreMatrix cross_correlation_scores(const Matrix& series, std::span<const Index> lags) {
  if (lags.empty()) throw InvalidArgument("at least one lag is required");
  Matrix mean = Matrix::Zero(series.cols(), series.cols());
  for (const Index lag : lags) mean += lagged_correlation(series, lag);
  mean /= static_cast<double>(lags.size());
  return {normalize_off_diagonal(mean), "xcorr"};
}

inline ScoreMatrix cross_correlation_scores(const Matrix& series, Index lag = 1) {
  const Index lags[] = {lag};
  return cross_correlation_scores(series, lags);
}

inline ScoreMatrix cross_correlation_scores(const SpikeRaster& raster, Index lag = 1) {
  return cross_correlation_scores(raster.as_real(), lag);
}

// ---------------------------------------------------------------------------
// Covariance and precision

struct CovarianceEstimate {
  Matrix cov;  // population-normalized, symmetric
  Vector mean;

  Index dimension() const { return cov.rows(); }
};

inline CovarianceEstimate empirical_covariance(const Matrix& samples) {
  if (samples.rows() < 2) throw InvalidArgument("covariance needs at least 2 samples");
  CovarianceEstimate est;
  est.mean = samples.colwise().mean().transpose();
  const Matrix centered = samples.rowwise() - est.mean.transpose();
  est.cov = (centered.transpose() * centered) / static_cast<double>(samples.rows());
  est.cov = 0.5 * (est.cov + est.cov.transpose()).eval();
  return est;
}

inline CovarianceEstimate empirical_covariance(const SpikeRaster& raster) {
  return empirical_covariance(raster.as_real());
}

inline CovarianceEstimate empirical_covariance(const FluorescencePanel& panel) {
  return empirical_covariance(panel.values);
}

enum class PrecisionMethod { pca, glasso };

struct PrecisionEstimate {
  Matrix theta;
  double regularization = 0.0;
  PrecisionMethod method = PrecisionMethod::glasso;
  int sweeps = 0;
  bool converged = true;
};

inline constexpr double kEigenFloor = 1e-10;

enum class PcaResidual {
  truncate,   // discarded components contribute nothing
  isotropic,  // discarded subspace modeled as isotropic noise at its mean eigenvalue (probabilistic PCA)
};

/// Precision from the leading principal components that together explain at least
/// `variance_kept` of the total variance. With `truncate`, Θ = Σ_{kept} v·vᵀ/λ.
inline PrecisionEstimate pca_precision(const CovarianceEstimate& cov, double variance_kept = 0.80,
                                       PcaResidual residual = PcaResidual::truncate) {
  if (!(variance_kept > 0.0 && variance_kept <= 1.0)) throw InvalidArgument("variance_kept must lie in (0,1]");
  const Index n = cov.dimension();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov.cov);
  if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  // Eigen returns ascending order; walk from the top.
  const Vector& values = eig.eigenvalues();
  const Matrix& vectors = eig.eigenvectors();
  double total = 0.0;
  for (Index i = 0; i < n; ++i) total += std::max(values(i), 0.0);
  if (!(values.maxCoeff() >= kEigenFloor)) throw NumericError("degenerate covariance: no eigenvalue above 1e-10");

  Index first_kept = n - 1;
  double cumulative = 0.0;
  for (Index r = n - 1; r >= 0; --r) {
    first_kept = r;
    cumulative += std::max(values(r), 0.0);
    if (cumulative / total >= variance_kept - 1e-12) break;
  }

  PrecisionEstimate est;
  est.method = PrecisionMethod::pca;
  est.regularization = variance_kept;
  est.theta = Matrix::Zero(n, n);
  double noise_precision = 0.0;
  if (residual == PcaResidual::isotropic && first_kept > 0) {
    const double noise = values.head(first_kept).cwiseMax(0.0).mean();
    if (noise >= kEigenFloor) {
      noise_precision = 1.0 / noise;
      est.theta.diagonal().setConstant(noise_precision);
    }
  }
  for (Index r = n - 1; r >= first_kept; --r) {
    const double lambda = values(r);
    if (lambda >= kEigenFloor)
      est.theta.noalias() += (1.0 / lambda - noise_precision) * vectors.col(r) * vectors.col(r).transpose();
  }
  return est;
}

/// Penalized log-likelihood logdet(Θ) − tr(SΘ) − λ·Σ_{i≠j}|Θ_ij|; −∞ when Θ is not PD.
inline double glasso_objective(const Matrix& theta, const Matrix& cov, double lambda) {
  const Eigen::LLT<Matrix> llt(theta);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double trace = (cov.cwiseProduct(theta)).sum();
  const double l1 = theta.cwiseAbs().sum() - theta.diagonal().cwiseAbs().sum();
  return logdet - trace - lambda * l1;
}

/// 5% of the largest absolute off-diagonal covariance.
inline double default_glasso_lambda(const CovarianceEstimate& cov, double fraction = 0.05) {
  double max_off = 0.0;
  for (Index j = 0; j < cov.dimension(); ++j)
    for (Index i = 0; i < cov.dimension(); ++i)
      if (i != j) max_off = std::max(max_off, std::abs(cov.cov(i, j)));
  return fraction * max_off;
}

struct GlassoOptions {
  int max_sweeps = 100;
  double tol = 1e-4;
  int max_inner_passes = 1000;
  double inner_tol = 1e-12;
  /// Invoked with Θ after every sweep.
  std::function<void(int sweep, const Matrix& theta)> on_sweep;
};

namespace detail {

inline Matrix drop_index(const Matrix& m, Index j) {
  const Index n = m.rows();
  Matrix out(n - 1, n - 1);
  for (Index c = 0, oc = 0; c < n; ++c) {
    if (c == j) continue;
    for (Index r = 0, orow = 0; r < n; ++r) {
      if (r == j) continue;
      out(orow++, oc) = m(r, c);
    }
    ++oc;
  }
  return out;
}

inline Vector column_without(const Matrix& m, Index j) {
  Vector out(m.rows() - 1);
  for (Index r = 0, o = 0; r < m.rows(); ++r)
    if (r != j) out(o++) = m(r, j);
  return out;
}

// Block coordinate ascent directly on the primal: for column j, Θ11 is held fixed and
// (θ12, θ22) is set to the exact block maximizer. With Q = Θ11⁻¹ the block problem is
//   min_β  s22·βᵀQβ + 2·s12ᵀβ + 2λ‖β‖₁,   θ22 = 1/s22 + βᵀQβ,
// solved by cyclic coordinate descent warm-started at the current column. Every step
// keeps Θ positive definite and never lowers the objective.
inline PrecisionEstimate glasso_primal(const Matrix& cov, double lambda, const GlassoOptions& opt) {
  const Index p = cov.rows();
  double off_scale = 0.0;
  double off_max = 0.0;
  double diag_scale = 0.0;
  for (Index j = 0; j < p; ++j) {
    diag_scale += cov(j, j);
    for (Index i = 0; i < p; ++i)
      if (i != j) {
        off_scale += std::abs(cov(i, j));
        off_max = std::max(off_max, std::abs(cov(i, j)));
      }
  }

  // The diagonal start is already optimal once λ ≥ max|S_offdiag|; otherwise start
  // from W = S + λI, which is exact at λ = 0.
  Matrix theta = Matrix::Zero(p, p);
  Matrix w = Matrix::Zero(p, p);
  for (Index i = 0; i < p; ++i) {
    theta(i, i) = 1.0 / cov(i, i);
    w(i, i) = cov(i, i);
  }
  if (lambda < off_max) {
    Matrix start = cov;
    start.diagonal().array() += lambda;
    const Eigen::LLT<Matrix> llt(start);
    if (llt.info() == Eigen::Success) {
      Matrix inverse = llt.solve(Matrix::Identity(p, p));
      if (inverse.allFinite()) {
        theta = 0.5 * (inverse + inverse.transpose());
        w = start;
      }
    }
  }

  off_scale = p > 1 ? off_scale / static_cast<double>(p * (p - 1)) : 0.0;
  diag_scale /= static_cast<double>(p);
  const double threshold = opt.tol * std::max(off_scale, 1e-12 * diag_scale);

  PrecisionEstimate est;
  est.method = PrecisionMethod::glasso;
  est.regularization = lambda;
  est.converged = false;

  for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    const Matrix w_prev = w;
    for (Index j = 0; j < p; ++j) {
      const double s22 = cov(j, j);
      const Vector s12 = column_without(cov, j);
      const Vector w12 = column_without(w, j);
      const Matrix q = drop_index(w, j) - w12 * w12.transpose() / w(j, j);
      Vector beta = column_without(theta, j);
      Vector q_beta = q * beta;

      for (int pass = 0; pass < opt.max_inner_passes; ++pass) {
        double max_step = 0.0;
        double max_beta = 0.0;
        for (Index k = 0; k < p - 1; ++k) {
          const double a = s22 * q(k, k);
          const double c = s22 * (q_beta(k) - q(k, k) * beta(k)) + s12(k);
          const double shrunk = std::max(std::abs(c) - lambda, 0.0);
          const double updated = c > 0.0 ? -shrunk / a : shrunk / a;
          const double delta = updated - beta(k);
          if (delta != 0.0) {
            q_beta += delta * q.col(k);
            beta(k) = updated;
          }
          max_step = std::max(max_step, std::abs(delta));
          max_beta = std::max(max_beta, std::abs(updated));
        }
        if (max_step <= opt.inner_tol * std::max(max_beta, 1e-300) || max_step == 0.0) break;
      }

      const double gamma = 1.0 / s22;
      const double theta22 = gamma + beta.dot(q_beta);
      for (Index r = 0, o = 0; r < p; ++r) {
        if (r == j) continue;
        theta(r, j) = beta(o);
        theta(j, r) = beta(o);
        ++o;
      }
      theta(j, j) = theta22;

      // W = Θ⁻¹ by block inversion: W11 = Q + s22·uuᵀ, w12 = −s22·u, w22 = s22 with u = Qβ.
      const Matrix w11 = q + s22 * q_beta * q_beta.transpose();
      for (Index c = 0, oc = 0; c < p; ++c) {
        if (c == j) continue;
        for (Index r = 0, orow = 0; r < p; ++r) {
          if (r == j) continue;
          w(r, c) = w11(orow++, oc);
        }
        w(j, c) = -s22 * q_beta(oc);
        w(c, j) = w(j, c);
        ++oc;
      }
      w(j, j) = s22;
    }

    // Refresh W from Θ to stop round-off from accumulating across sweeps.
    const Eigen::LLT<Matrix> llt(theta);
    if (llt.info() != Eigen::Success) break;
    w = llt.solve(Matrix::Identity(p, p));
    w = 0.5 * (w + w.transpose()).eval();

    est.sweeps = sweep;
    if (opt.on_sweep) opt.on_sweep(sweep, theta);
    const double mean_change = (w - w_prev).cwiseAbs().mean();
    if (mean_change < threshold) {
      est.converged = true;
      break;
    }
  }
  est.theta = std::move(theta);
  return est;
}

}  // namespace detail

/// Sparse precision maximizing logdet(Θ) − tr(SΘ) − λ·Σ_{i≠j}|Θ_ij| (diagonal unpenalized).
/// Stops when the mean absolute change of W = Θ⁻¹ over a sweep falls below tol·mean|S_offdiag|.
inline PrecisionEstimate graphical_lasso(const CovarianceEstimate& cov, double lambda, const GlassoOptions& options = {}) {
  if (!(lambda >= 0.0)) throw InvalidArgument("graphical lasso penalty must be >= 0");
  const Index p = cov.dimension();
  if (p < 1) throw InvalidArgument("empty covariance");
  if (options.max_sweeps < 1) throw InvalidArgument("max_sweeps must be >= 1");

  Matrix s = 0.5 * (cov.cov + cov.cov.transpose());
  const double scale = std::max(s.diagonal().cwiseAbs().mean(), 1e-300);
  double ridge = 0.0;
  if (s.diagonal().minCoeff() <= 1e-12 * scale) ridge = 1e-8 * scale;

  for (int attempt = 0; attempt < 8; ++attempt) {
    Matrix shifted = s;
    shifted.diagonal().array() += ridge;
    if (shifted.diagonal().minCoeff() > 0.0) {
      PrecisionEstimate est = detail::glasso_primal(shifted, lambda, options);
      const Eigen::LLT<Matrix> llt(est.theta);
      if (est.theta.allFinite() && llt.info() == Eigen::Success) return est;
    }
    ridge = ridge == 0.0 ? 1e-8 * scale : ridge * 10.0;
  }
  throw NumericError("graphical lasso could not reach a positive definite estimate");
}

/// Negated precision, zero diagonal, min-max normalized over off-diagonal entries.
inline ScoreMatrix precision_to_scores(const PrecisionEstimate& precision) {
  if (!precision.theta.allFinite()) throw NumericError("precision matrix has non-finite entries");
  return {normalize_off_diagonal(-precision.theta),
          precision.method == PrecisionMethod::pca ? "pca" : "glasso"};
}

}  // namespace netinfer
