#pragma once

// Registry tying every scorer to the cross-validation driver.

#include <array>
#include <string_view>

#include "netinfer/cirusim.hpp"
#include "netinfer/dataset.hpp"
#include "netinfer/eval.hpp"
#include "netinfer/hawkes.hpp"
#include "netinfer/model_free.hpp"
#include "netinfer/preprocess.hpp"

namespace netinfer {

enum class PrecisionInput {
  smoothed_raster,  // discretized raster through a length-3 summation filter
  fluorescence,     // scatter-corrected fluorescence
};

struct MethodConfig {
  std::vector<Index> lags{1};
  /// Absolute glasso penalty; unset selects lambda_fraction · max|S_offdiag|.
  std::optional<double> lambda;
  double lambda_fraction = 0.05;
  GlassoOptions glasso;
  double variance_kept = 0.80;
  PcaResidual pca_residual = PcaResidual::isotropic;
  PrecisionInput precision_input = PrecisionInput::smoothed_raster;
  Index smoothing_length = 3;
  EmOptions em;
  CirusimOptions cirusim;
  ScatterOptions scatter;
};

inline constexpr std::array<std::string_view, 5> kMethodNames = {"xcorr", "pca", "glasso", "hawkes", "cirusim"};

inline bool is_known_method(std::string_view name) {
  return std::find(kMethodNames.begin(), kMethodNames.end(), name) != kMethodNames.end();
}

inline std::string known_methods_list() {
  std::string out;
  for (const auto name : kMethodNames) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

inline Matrix precision_samples(const NetworkRecord& net, const MethodConfig& config) {
  if (config.precision_input == PrecisionInput::fluorescence)
    return correct_scatter(net.panel, build_scatter_matrix(net.layout, config.scatter)).values;
  return summation_filter(net.raster.as_real(), config.smoothing_length);
}

inline ScoreMatrix glasso_scores(const NetworkRecord& net, const MethodConfig& config) {
  const CovarianceEstimate cov = empirical_covariance(precision_samples(net, config));
  const double lambda = config.lambda ? *config.lambda : default_glasso_lambda(cov, config.lambda_fraction);
  return precision_to_scores(graphical_lasso(cov, lambda, config.glasso));
}

inline ScoreMatrix pca_scores(const NetworkRecord& net, const MethodConfig& config) {
  return precision_to_scores(pca_precision(empirical_covariance(precision_samples(net, config)), config.variance_kept,
                                           config.pca_residual));
}

inline Method make_method(std::string_view name, const MethodConfig& config = {}) {
  Method m;
  m.tag = std::string(name);
  if (name == "xcorr") {
    m.score = [config](const NetworkRecord& net, std::span<const NetworkRecord* const>) {
      return cross_correlation_scores(net.raster.as_real(), config.lags);
    };
  } else if (name == "pca") {
    m.score = [config](const NetworkRecord& net, std::span<const NetworkRecord* const>) {
      return pca_scores(net, config);
    };
  } else if (name == "glasso") {
    m.score = [config](const NetworkRecord& net, std::span<const NetworkRecord* const>) {
      return glasso_scores(net, config);
    };
  } else if (name == "hawkes") {
    m.score = [config](const NetworkRecord& net, std::span<const NetworkRecord* const>) {
      return hawkes_scores(em_fit(net.raster, config.em).model);
    };
  } else if (name == "cirusim") {
    m.supervised = true;
    m.score = [config](const NetworkRecord& net, std::span<const NetworkRecord* const> training) {
      std::vector<LabeledRaster> labeled;
      for (const auto* t : training) labeled.push_back({&t->raster, &t->truth});
      return cirusim_scores(labeled, net.raster, config.cirusim);
    };
  } else {
    throw InvalidArgument("unknown method '" + std::string(name) + "'; valid methods: " + known_methods_list());
  }
  return m;
}

/// Preprocesses a loaded dataset into a cross-validation record; ground truth is required.
inline NetworkRecord make_network_record(std::string id, Dataset data, const PreprocessOptions& options = {}) {
  if (!data.truth) throw ConsistencyError("network '" + id + "' has no ground truth");
  NetworkRecord rec;
  rec.id = std::move(id);
  rec.raster = preprocess(data.panel, data.layout, options);
  rec.panel = std::move(data.panel);
  rec.layout = std::move(data.layout);
  rec.truth = std::move(*data.truth);
  return rec;
}

}  // namespace netinfer
