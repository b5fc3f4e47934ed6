#pragma once

// Synthetic ground-truth benchmarks: a sparse directed network drives a Hawkes
// simulation; spikes pass through AR(1) calcium dynamics, additive noise and
// light scatter to give an observed fluorescence panel.

#include <filesystem>
#include <random>

#include "netinfer/dataset.hpp"
#include "netinfer/hawkes.hpp"
#include "netinfer/preprocess.hpp"

namespace netinfer {

struct BenchmarkSpec {
  Index neuron_count = 25;
  double density = 0.10;
  double duration_s = 400.0;
  double sample_rate_hz = 50.0;
  double mu_hz = 0.5;
  double weight_scale = 0.3;
  double kernel_decay_hz = 25.0;
  double calcium_decay = 0.9;
  double noise_std = 0.04;
  double scatter_amplitude = 0.15;
  double max_spectral_radius = 0.8;
  std::uint64_t seed = 1;

  void validate() const {
    if (neuron_count < 2) throw InvalidArgument("benchmark needs at least 2 neurons");
    if (!(density > 0.0 && density < 1.0)) throw InvalidArgument("density must lie in (0,1)");
    if (!(duration_s > 0.0) || !(sample_rate_hz > 0.0)) throw InvalidArgument("duration and sample rate must be positive");
    if (!(mu_hz > 0.0) || !(weight_scale > 0.0) || !(kernel_decay_hz > 0.0))
      throw InvalidArgument("rates, weights and kernel decay must be positive");
    if (!(calcium_decay >= 0.0 && calcium_decay < 1.0)) throw InvalidArgument("calcium decay must lie in [0,1)");
    if (!(noise_std >= 0.0) || !(scatter_amplitude >= 0.0)) throw InvalidArgument("noise and scatter must be >= 0");
    if (!(max_spectral_radius > 0.0 && max_spectral_radius < 1.0))
      throw InvalidArgument("spectral radius cap must lie in (0,1)");
  }
};

struct BenchmarkNetwork {
  GroundTruthNetwork truth;
  HawkesModel model;
  NeuronLayout layout;
};

namespace detail {

// Independent generator streams derived from one seed.
enum class Stream : std::uint64_t { network = 1, spikes = 2, noise = 3 };

inline std::uint64_t stream_seed(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace detail

inline BenchmarkNetwork sample_network(const BenchmarkSpec& spec) {
  spec.validate();
  const Index n = spec.neuron_count;
  std::mt19937_64 rng(detail::stream_seed(spec.seed, detail::Stream::network));
  std::bernoulli_distribution edge(spec.density);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  BenchmarkNetwork net;
  net.truth.edges = BinaryMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j && edge(rng)) net.truth.edges(i, j) = 1;
  net.layout.positions.resize(static_cast<std::size_t>(n));
  for (auto& p : net.layout.positions) {
    p.x = unit(rng);
    p.y = unit(rng);
  }

  net.model.mu = Vector::Constant(n, spec.mu_hz);
  net.model.weights = spec.weight_scale * net.truth.edges.cast<double>();
  net.model.theta = spec.kernel_decay_hz;
  const double radius = net.model.spectral_radius();
  if (radius > spec.max_spectral_radius) net.model.weights *= spec.max_spectral_radius / radius;
  return net;
}

struct Recording {
  FluorescencePanel observed;  // noisy and scattered
  FluorescencePanel calcium;   // noise-free, unscattered
  SpikeRaster spikes;          // true events
};

inline Recording synthesize_recording(const BenchmarkNetwork& net, const BenchmarkSpec& spec) {
  spec.validate();
  Recording rec;
  rec.spikes = simulate(net.model, spec.duration_s, spec.sample_rate_hz,
                        detail::stream_seed(spec.seed, detail::Stream::spikes));
  const Index frames = rec.spikes.frames();
  const Index n = rec.spikes.neuron_count();

  rec.calcium.sample_rate_hz = spec.sample_rate_hz;
  rec.calcium.values = Matrix::Zero(frames, n);
  for (Index i = 0; i < n; ++i) {
    double level = 0.0;
    for (Index t = 0; t < frames; ++t) {
      level = spec.calcium_decay * level + rec.spikes.events(t, i);
      rec.calcium.values(t, i) = level;
    }
  }

  FluorescencePanel noisy = rec.calcium;
  if (spec.noise_std > 0.0) {
    std::mt19937_64 rng(detail::stream_seed(spec.seed, detail::Stream::noise));
    std::normal_distribution<double> noise(0.0, spec.noise_std);
    for (Index t = 0; t < frames; ++t)
      for (Index i = 0; i < n; ++i) noisy.values(t, i) += noise(rng);
  }
  ScatterOptions scatter;
  scatter.amplitude = spec.scatter_amplitude;
  rec.observed = forward_scatter(noisy, build_scatter_matrix(net.layout, scatter));
  return rec;
}

/// Writes fluorescence.csv, positions.csv and network.csv into `dir` (created if needed).
inline void write_benchmark_directory(const std::filesystem::path& dir, const BenchmarkNetwork& net,
                                      const Recording& rec) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "fluorescence.csv", format_fluorescence(rec.observed));
  write_file_atomic(dir / "positions.csv", format_positions(net.layout));
  write_file_atomic(dir / "network.csv", format_network(net.truth));
}

}  // namespace netinfer
