#pragma once

// Multivariate Hawkes process with constant background rates and an exponential
// excitation kernel shared by all pairs:
//
//   λ_k(t) = μ_k + Σ_{spikes n' before t} W(c_n', k) · θ·exp(−θ·(t − t_n'))
//
// Parameters are fitted by expectation–maximization over the latent parent of each
// spike (background or one earlier spike).

#include <random>

#include "netinfer/types.hpp"

namespace netinfer {

struct HawkesModel {
  Vector mu;       // background rates, events/second
  Matrix weights;  // weights(k', k): expected children on k per spike of k'
  double theta = 10.0;  // kernel decay, 1/seconds; g(Δt) = θ·exp(−θΔt) integrates to 1

  Index dimension() const { return mu.size(); }

  /// Binary adjacency folded into the weights: 1 wherever the weight is positive.
  BinaryMatrix adjacency() const { return (weights.array() > 0.0).cast<std::uint8_t>(); }

  double kernel(double dt) const { return theta * std::exp(-theta * dt); }

  double spectral_radius() const {
    if (weights.size() == 0) return 0.0;
    Eigen::EigenSolver<Matrix> eig(weights, false);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
  }

  void validate() const {
    if (weights.rows() != mu.size() || weights.cols() != mu.size())
      throw InvalidArgument("Hawkes weights must be K×K with K = size of mu");
    if (!mu.allFinite() || (mu.array() < 0.0).any()) throw InvalidArgument("background rates must be >= 0");
    if (!weights.allFinite() || (weights.array() < 0.0).any()) throw InvalidArgument("weights must be >= 0");
    if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidArgument("kernel decay must be positive");
  }
};

struct Spike {
  double time = 0.0;
  Index neuron = 0;
  Index frame = 0;
};

/// All spikes ordered by frame, then neuron.
inline std::vector<Spike> collect_spikes(const SpikeRaster& raster) {
  std::vector<Spike> spikes;
  spikes.reserve(raster.total_spikes());
  for (Index t = 0; t < raster.frames(); ++t)
    for (Index k = 0; k < raster.neuron_count(); ++k)
      if (raster.events(t, k) != 0) spikes.push_back({static_cast<double>(t) / raster.sample_rate_hz, k, t});
  return spikes;
}

namespace detail {

/// For every spike, the half-open range of admissible parents: strictly earlier frames,
/// no further back than `window_s`.
inline std::vector<std::pair<std::size_t, std::size_t>> parent_ranges(const std::vector<Spike>& spikes,
                                                                      double window_s) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges(spikes.size());
  std::size_t lo = 0;
  std::size_t frame_start = 0;
  for (std::size_t n = 0; n < spikes.size(); ++n) {
    if (n > 0 && spikes[n].frame != spikes[n - 1].frame) frame_start = n;
    while (lo < frame_start && spikes[n].time - spikes[lo].time > window_s) ++lo;
    ranges[n] = {lo, frame_start};
  }
  return ranges;
}

}  // namespace detail

enum class Compensator {
  complete,   // every spike contributes its full unit kernel mass
  boundary,   // kernel mass truncated at the end of the recording
};

struct LikelihoodOptions {
  double window_s = std::numeric_limits<double>::infinity();
  Compensator compensator = Compensator::complete;
};

struct LikelihoodResult {
  double value = 0.0;
  bool zero_intensity = false;  // some observed spike had intensity 0; value is −∞
};

inline LikelihoodResult log_likelihood(const SpikeRaster& raster, const HawkesModel& model,
                                       const LikelihoodOptions& options = {}) {
  model.validate();
  if (model.dimension() != raster.neuron_count())
    throw InvalidArgument("model dimension does not match raster");
  const double duration = raster.duration_s();
  const auto spikes = collect_spikes(raster);
  const auto ranges = detail::parent_ranges(spikes, options.window_s);

  double compensator = model.mu.sum() * duration;
  const Vector out_mass = model.weights.rowwise().sum();
  for (const auto& s : spikes) {
    const double mass = options.compensator == Compensator::complete
                            ? 1.0
                            : 1.0 - std::exp(-model.theta * (duration - s.time));
    compensator += out_mass(s.neuron) * mass;
  }

  LikelihoodResult result;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < spikes.size(); ++n) {
    const Index k = spikes[n].neuron;
    double intensity = model.mu(k);
    for (std::size_t p = ranges[n].first; p < ranges[n].second; ++p)
      intensity += model.weights(spikes[p].neuron, k) * model.kernel(spikes[n].time - spikes[p].time);
    if (!(intensity > 0.0)) {
      result.zero_intensity = true;
      result.value = -std::numeric_limits<double>::infinity();
      return result;
    }
    log_sum += std::log(intensity);
  }
  result.value = log_sum - compensator;
  return result;
}

struct EmOptions {
  int iterations = 100;
  double theta_init = 10.0;
  /// Parent look-back in seconds; 0 selects 10/theta_init.
  double window_s = 0.0;
  bool learn_weights = true;
  bool learn_theta = true;
  double mu_floor = 1e-8;
  /// Initial weight on every pair, as a fraction of 1/K.
  double weight_init = 0.5;
};

struct EmResult {
  HawkesModel model;
  double log_likelihood = 0.0;
  /// Log-likelihood before the first iteration and after each iteration (size iterations + 1).
  std::vector<double> trace;
  double window_s = 0.0;
};

/// Expectation–maximization with the complete compensator. The parent window is fixed for
/// the whole fit, so the trace is the exact objective that every iteration cannot decrease.
inline EmResult em_fit(const SpikeRaster& raster, const EmOptions& options = {}) {
  if (options.iterations < 1) throw InvalidArgument("EM needs at least one iteration");
  if (!(options.theta_init > 0.0)) throw InvalidArgument("theta_init must be positive");
  const Index dim = raster.neuron_count();
  const double duration = raster.duration_s();
  const auto spikes = collect_spikes(raster);
  const double window = options.window_s > 0.0 ? options.window_s : 10.0 / options.theta_init;
  const auto ranges = detail::parent_ranges(spikes, window);

  Vector counts = Vector::Zero(dim);
  for (const auto& s : spikes) counts(s.neuron) += 1.0;

  EmResult result;
  result.window_s = window;
  HawkesModel& model = result.model;
  model.theta = options.theta_init;
  model.mu = (0.5 * counts / duration).cwiseMax(options.mu_floor);
  model.weights = Matrix::Zero(dim, dim);
  if (options.learn_weights) {
    for (Index src = 0; src < dim; ++src)
      if (counts(src) > 0) model.weights.row(src).setConstant(options.weight_init / static_cast<double>(dim));
  } else {
    model.mu = (counts / duration).cwiseMax(options.mu_floor);
  }

  auto objective_and_step = [&](bool update) {
    Vector background = Vector::Zero(dim);
    Matrix triggered = Matrix::Zero(dim, dim);
    double triggered_mass = 0.0;
    double triggered_delay = 0.0;
    double log_sum = 0.0;
    std::vector<double> terms;
    for (std::size_t n = 0; n < spikes.size(); ++n) {
      const Index k = spikes[n].neuron;
      const auto [lo, hi] = ranges[n];
      terms.resize(hi - lo);
      double intensity = model.mu(k);
      if (options.learn_weights) {
        for (std::size_t p = lo; p < hi; ++p) {
          const double term = model.weights(spikes[p].neuron, k) * model.kernel(spikes[n].time - spikes[p].time);
          terms[p - lo] = term;
          intensity += term;
        }
      }
      log_sum += std::log(intensity);
      if (!update) continue;
      background(k) += model.mu(k) / intensity;
      if (!options.learn_weights) continue;
      for (std::size_t p = lo; p < hi; ++p) {
        const double r = terms[p - lo] / intensity;
        triggered(spikes[p].neuron, k) += r;
        triggered_mass += r;
        triggered_delay += r * (spikes[n].time - spikes[p].time);
      }
    }
    const double value = log_sum - model.mu.sum() * duration - model.weights.rowwise().sum().dot(counts);
    if (update) {
      model.mu = (background / duration).cwiseMax(options.mu_floor);
      if (options.learn_weights) {
        for (Index src = 0; src < dim; ++src)
          model.weights.row(src) = counts(src) > 0 ? (triggered.row(src) / counts(src)).eval()
                                                   : Eigen::RowVectorXd::Zero(dim).eval();
        if (options.learn_theta && triggered_delay > 0.0) model.theta = triggered_mass / triggered_delay;
      }
    }
    return value;
  };

  result.trace.reserve(static_cast<std::size_t>(options.iterations) + 1);
  for (int it = 0; it < options.iterations; ++it) result.trace.push_back(objective_and_step(true));
  result.log_likelihood = objective_and_step(false);
  result.trace.push_back(result.log_likelihood);
  return result;
}

/// Fitted weights with zero diagonal, min-max normalized.
inline ScoreMatrix hawkes_scores(const HawkesModel& model) {
  return {normalize_off_diagonal(model.weights), "hawkes"};
}

/// Discrete-time forward simulation: in frame t neuron k spikes with probability
/// 1 − exp(−λ_k(t)·dt), where λ_k(t) sums the kernels of spikes in frames before t.
/// Frame 0 is the quiescent initial sample.
inline SpikeRaster simulate(const HawkesModel& model, double duration_s, double sample_rate_hz,
                            std::uint64_t seed) {
  model.validate();
  if (!(duration_s > 0.0)) throw InvalidArgument("simulation duration must be positive");
  if (!(sample_rate_hz > 0.0)) throw InvalidArgument("sample rate must be positive");
  if (model.spectral_radius() >= 1.0) throw NumericError("supercritical process: spectral radius of W >= 1");

  const Index dim = model.dimension();
  const auto frames = static_cast<Index>(std::llround(duration_s * sample_rate_hz));
  const double dt = 1.0 / sample_rate_hz;
  const double decay = std::exp(-model.theta * dt);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  BinaryMatrix events = BinaryMatrix::Zero(frames, dim);
  Vector excitation = Vector::Zero(dim);  // Σ θ·exp(−θ·age) over each neuron's past spikes
  for (Index t = 1; t < frames; ++t) {
    const Vector intensity = model.mu + model.weights.transpose() * excitation;
    for (Index k = 0; k < dim; ++k) {
      const double p = -std::expm1(-intensity(k) * dt);
      if (uniform(rng) < p) events(t, k) = 1;
    }
    for (Index k = 0; k < dim; ++k) excitation(k) = (excitation(k) + model.theta * events(t, k)) * decay;
  }
  return SpikeRaster::from_events(std::move(events), sample_rate_hz);
}

}  // namespace netinfer
