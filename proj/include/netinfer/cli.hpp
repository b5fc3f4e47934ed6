#pragma once

// Command-line front end: simulate, preprocess, infer, evaluate, crossval, heatmap.
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdlib>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>

#include "netinfer/dataset.hpp"
#include "netinfer/eval.hpp"
#include "netinfer/methods.hpp"
#include "netinfer/simgen.hpp"

namespace netinfer::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Usage problems detected after parsing (unknown method, flag/method mismatch, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

inline unsigned default_parallelism() {
  if (const char* env = std::getenv("NETINFER_JOBS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

namespace detail {

struct Hyper {
  std::vector<Index> lags{1};
  double lambda_fraction = 0.05;
  double lambda_abs = -1.0;
  int glasso_sweeps = 100;
  double variance_kept = 0.80;
  std::string pca_residual = "isotropic";
  std::string precision_input = "raster";
  int iterations = 100;
  double theta_init = 10.0;
  double refractory = 1.0;
  double activity_fraction = 0.7;
  double svm_c = 1.0;
  double svm_gamma = 0.0;
  std::string class_weight = "balanced";
  double threshold = kDefaultSpikeThreshold;
  std::string scatter_kernel = "decaying";
  bool no_scatter_correction = false;
  double sample_rate = kDefaultSampleRateHz;
};

// Options that only make sense for particular methods.
inline const std::map<std::string, std::set<std::string>>& method_specific_flags() {
  static const std::map<std::string, std::set<std::string>> flags = {
      {"--lag", {"xcorr"}},
      {"--lambda", {"glasso"}},
      {"--lambda-abs", {"glasso"}},
      {"--glasso-sweeps", {"glasso"}},
      {"--variance-kept", {"pca"}},
      {"--pca-residual", {"pca"}},
      {"--precision-input", {"pca", "glasso"}},
      {"--iterations", {"hawkes"}},
      {"--theta-init", {"hawkes"}},
      {"--refractory", {"cirusim"}},
      {"--activity-fraction", {"cirusim"}},
      {"--C", {"cirusim"}},
      {"--gamma", {"cirusim"}},
      {"--class-weight", {"cirusim"}},
  };
  return flags;
}

inline void add_preprocess_flags(CLI::App& app, Hyper& h) {
  app.add_option("--threshold", h.threshold, "Spike threshold on frame-to-frame increases")
      ->capture_default_str();
  app.add_option("--scatter-kernel", h.scatter_kernel, "Scatter kernel sign: decaying or growing")
      ->check(CLI::IsMember({"decaying", "growing"}))
      ->capture_default_str();
  app.add_flag("--no-scatter-correction", h.no_scatter_correction, "Skip the light-scatter correction");
  app.add_option("--sample-rate", h.sample_rate, "Sampling rate of the recordings in Hz")->capture_default_str();
}

inline void add_method_flags(CLI::App& app, Hyper& h) {
  app.add_option("--lag", h.lags, "Cross-correlation lags in frames, averaged")->capture_default_str();
  app.add_option("--lambda", h.lambda_fraction, "Glasso penalty as a fraction of max|S_offdiag|")
      ->capture_default_str();
  app.add_option("--lambda-abs", h.lambda_abs, "Absolute glasso penalty (overrides --lambda)");
  app.add_option("--glasso-sweeps", h.glasso_sweeps, "Maximum glasso sweeps")->capture_default_str();
  app.add_option("--variance-kept", h.variance_kept, "Fraction of variance kept by PCA (roughly 80%)")
      ->capture_default_str();
  app.add_option("--pca-residual", h.pca_residual, "Discarded PCA subspace: isotropic or truncate")
      ->check(CLI::IsMember({"isotropic", "truncate"}))
      ->capture_default_str();
  app.add_option("--precision-input", h.precision_input,
                 "PCA/glasso input: raster (length-3 summed spikes) or fluorescence")
      ->check(CLI::IsMember({"raster", "fluorescence"}))
      ->capture_default_str();
  app.add_option("--iterations", h.iterations, "Hawkes EM iterations")->capture_default_str();
  app.add_option("--theta-init", h.theta_init, "Initial Hawkes kernel decay, 1/s (100 ms transients)")
      ->capture_default_str();
  app.add_option("--refractory", h.refractory, "CIRUSIM refractory window in seconds")->capture_default_str();
  app.add_option("--activity-fraction", h.activity_fraction,
                 "CIRUSIM zeroes frames where more than this fraction of neurons spike")
      ->capture_default_str();
  app.add_option("--C", h.svm_c, "SVM penalty")->capture_default_str();
  app.add_option("--gamma", h.svm_gamma, "RBF width; 0 selects 1/(d*feature variance)")->capture_default_str();
  app.add_option("--class-weight", h.class_weight, "SVM class weights: balanced or uniform")
      ->check(CLI::IsMember({"balanced", "uniform"}))
      ->capture_default_str();
}

inline void check_method_flags(const CLI::App& app, const std::vector<std::string>& methods) {
  for (const auto& [flag, owners] : method_specific_flags()) {
    const CLI::Option* opt = app.get_option_no_throw(flag);
    if (opt == nullptr || opt->count() == 0) continue;
    const bool used = std::any_of(methods.begin(), methods.end(), [&](const auto& m) { return owners.count(m) > 0; });
    if (!used) {
      std::string list;
      for (const auto& o : owners) list += (list.empty() ? "" : ", ") + o;
      throw UsageError(flag + " applies only to: " + list);
    }
  }
}

inline void check_methods(const std::vector<std::string>& methods) {
  if (methods.empty()) throw UsageError("no method given; valid methods: " + known_methods_list());
  for (const auto& m : methods)
    if (!is_known_method(m)) throw UsageError("unknown method '" + m + "'; valid methods: " + known_methods_list());
}

inline void check_hyper(const Hyper& h) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw UsageError(what);
  };
  require(!h.lags.empty(), "--lag needs at least one value");
  for (const Index lag : h.lags) require(lag >= 0, "--lag must be >= 0");
  require(h.lambda_fraction >= 0.0, "--lambda must be >= 0");
  require(h.glasso_sweeps >= 1, "--glasso-sweeps must be >= 1");
  require(h.variance_kept > 0.0 && h.variance_kept <= 1.0, "--variance-kept must lie in (0,1]");
  require(h.iterations >= 1, "--iterations must be >= 1");
  require(h.theta_init > 0.0, "--theta-init must be > 0");
  require(h.refractory >= 0.0, "--refractory must be >= 0");
  require(h.activity_fraction > 0.0 && h.activity_fraction < 1.0, "--activity-fraction must lie in (0,1)");
  require(h.svm_c > 0.0, "--C must be > 0");
  require(h.svm_gamma >= 0.0, "--gamma must be >= 0");
  require(std::isfinite(h.threshold), "--threshold must be finite");
  require(h.sample_rate > 0.0, "--sample-rate must be > 0");
}

inline PreprocessOptions preprocess_options(const Hyper& h) {
  PreprocessOptions p;
  p.threshold = h.threshold;
  p.correct = !h.no_scatter_correction;
  p.scatter.kernel = h.scatter_kernel == "growing" ? ScatterKernel::growing : ScatterKernel::decaying;
  return p;
}

inline MethodConfig method_config(const Hyper& h) {
  MethodConfig c;
  c.lags = h.lags;
  c.lambda_fraction = h.lambda_fraction;
  if (h.lambda_abs >= 0.0) c.lambda = h.lambda_abs;
  c.glasso.max_sweeps = h.glasso_sweeps;
  c.variance_kept = h.variance_kept;
  c.pca_residual = h.pca_residual == "truncate" ? PcaResidual::truncate : PcaResidual::isotropic;
  c.precision_input = h.precision_input == "fluorescence" ? PrecisionInput::fluorescence : PrecisionInput::smoothed_raster;
  c.em.iterations = h.iterations;
  c.em.theta_init = h.theta_init;
  c.cirusim.refractory_s = h.refractory;
  c.cirusim.activity_fraction = h.activity_fraction;
  c.cirusim.svm.C = h.svm_c;
  if (h.svm_gamma > 0.0) c.cirusim.svm.gamma = h.svm_gamma;
  c.cirusim.svm.class_weight = h.class_weight == "uniform" ? ClassWeight::uniform : ClassWeight::balanced;
  c.scatter = preprocess_options(h).scatter;
  return c;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (const char ch : s) {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline NetworkRecord load_record(const std::filesystem::path& dir, const Hyper& h) {
  Dataset data = load_network_directory(dir, h.sample_rate);
  if (!data.truth) throw ConsistencyError("no ground-truth network file in " + dir.string());
  return make_network_record(dir.filename().string(), std::move(data), preprocess_options(h));
}

inline std::string summary_table(const std::vector<EvalReport>& reports) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-16s %8s %8s %10s\n", "method", "AUC %", "PRC %", "Time (s)");
  out += buf;
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%-16s %8.1f %8.1f %10.1f\n", r.method_tag.c_str(), 100.0 * r.auc, 100.0 * r.prc,
                  r.wall_clock_seconds);
    out += buf;
  }
  return out;
}

}  // namespace detail

/// Runs one command line. Output files are written only after every input has been
/// validated and every result computed.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"netinfer: connectivity inference from neural activation recordings"};
  app.require_subcommand(1);
  detail::Hyper h;

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic benchmark with a planted network");
  BenchmarkSpec spec;
  int sim_networks = 1;
  std::filesystem::path sim_out;
  sim->add_option("--neurons", spec.neuron_count, "Neurons per network")->capture_default_str();
  sim->add_option("--density", spec.density, "Edge probability (about 10% of directed pairs)")->capture_default_str();
  sim->add_option("--duration", spec.duration_s, "Recording length in seconds")->capture_default_str();
  sim->add_option("--sample-rate", spec.sample_rate_hz, "Sampling rate in Hz")->capture_default_str();
  sim->add_option("--mu", spec.mu_hz, "Background firing rate in Hz")->capture_default_str();
  sim->add_option("--weight", spec.weight_scale, "Expected children per spike along an edge")->capture_default_str();
  sim->add_option("--kernel-decay", spec.kernel_decay_hz, "Excitation kernel decay in 1/s")->capture_default_str();
  sim->add_option("--calcium-decay", spec.calcium_decay, "Per-frame calcium decay")->capture_default_str();
  sim->add_option("--noise", spec.noise_std, "Fluorescence noise standard deviation")->capture_default_str();
  sim->add_option("--scatter", spec.scatter_amplitude, "Light-scatter amplitude")->capture_default_str();
  sim->add_option("--seed", spec.seed, "Random seed")->capture_default_str();
  sim->add_option("--networks", sim_networks, "Number of networks; >1 writes net_01, net_02, ... under --out")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sim->add_option("--out", sim_out, "Output directory")->required();

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Scatter-correct and discretize a recording into a spike raster");
  std::filesystem::path pre_in;
  std::filesystem::path pre_out;
  pre->add_option("--in", pre_in, "Network directory")->required();
  pre->add_option("--out", pre_out, "Output raster CSV (0/1)")->required();
  detail::add_preprocess_flags(*pre, h);

  // infer
  auto* inf = app.add_subcommand("infer", "Score every directed pair with one method");
  std::string infer_method;
  std::filesystem::path infer_in;
  std::filesystem::path infer_out;
  std::string infer_train;
  bool infer_heatmap = false;
  inf->add_option("--method", infer_method, "One of: " + known_methods_list())->required();
  inf->add_option("--in", infer_in, "Network directory")->required();
  inf->add_option("--out", infer_out, "Output score matrix CSV")->required();
  inf->add_option("--train", infer_train, "Comma-separated training network directories (cirusim)");
  inf->add_flag("--heatmap", infer_heatmap, "Also write a PGM heatmap next to --out");
  detail::add_preprocess_flags(*inf, h);
  detail::add_method_flags(*inf, h);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "AUC and PRC of a score matrix against a network's ground truth");
  std::filesystem::path ev_scores;
  std::filesystem::path ev_in;
  std::filesystem::path ev_out;
  std::string ev_tag = "scores";
  ev->add_option("--scores", ev_scores, "Score matrix CSV")->required();
  ev->add_option("--in", ev_in, "Network directory with ground truth")->required();
  ev->add_option("--out", ev_out, "Report file");
  ev->add_option("--tag", ev_tag, "Method tag for the report")->capture_default_str();

  // crossval
  auto* cv = app.add_subcommand("crossval", "Leave-one-network-out evaluation of several methods");
  std::string cv_methods = "xcorr,pca,glasso,hawkes,cirusim";
  std::filesystem::path cv_in;
  std::filesystem::path cv_out;
  unsigned cv_jobs = default_parallelism();
  cv->add_option("--methods", cv_methods, "Comma-separated methods")->capture_default_str();
  cv->add_option("--in", cv_in, "Directory of network directories")->required();
  cv->add_option("--out", cv_out, "Output directory for summary and per-method reports");
  cv->add_option("--jobs", cv_jobs, "Folds run in parallel (env NETINFER_JOBS)")->capture_default_str();
  detail::add_preprocess_flags(*cv, h);
  detail::add_method_flags(*cv, h);

  // heatmap
  auto* hm = app.add_subcommand("heatmap", "Render a score matrix as a PGM image");
  std::filesystem::path hm_scores;
  std::filesystem::path hm_out;
  hm->add_option("--scores", hm_scores, "Score matrix CSV")->required();
  hm->add_option("--out", hm_out, "Output PGM")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    detail::check_hyper(h);
    if (sim->parsed()) {
      try {
        spec.validate();
      } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
      }
      std::vector<std::pair<BenchmarkNetwork, Recording>> generated;
      for (int k = 0; k < sim_networks; ++k) {
        BenchmarkSpec s = spec;
        s.seed = spec.seed + static_cast<std::uint64_t>(k);
        BenchmarkNetwork net = sample_network(s);
        Recording rec = synthesize_recording(net, s);
        generated.emplace_back(std::move(net), std::move(rec));
      }
      for (int k = 0; k < sim_networks; ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "net_%02d", k + 1);
        const auto dir = sim_networks == 1 ? sim_out : sim_out / name;
        write_benchmark_directory(dir, generated[static_cast<std::size_t>(k)].first,
                                  generated[static_cast<std::size_t>(k)].second);
      }
      out << "wrote " << sim_networks << " network(s) to " << sim_out.string() << "\n";
    } else if (pre->parsed()) {
      const Dataset data = load_network_directory(pre_in, h.sample_rate);
      const SpikeRaster raster = preprocess(data.panel, data.layout, detail::preprocess_options(h));
      write_file_atomic(pre_out, format_raster(raster));
      out << "wrote raster with " << raster.total_spikes() << " spikes to " << pre_out.string() << "\n";
    } else if (inf->parsed()) {
      detail::check_methods({infer_method});
      detail::check_method_flags(*inf, {infer_method});
      const Method method = make_method(infer_method, detail::method_config(h));
      const auto train_dirs = detail::split_list(infer_train);
      if (method.supervised && train_dirs.empty())
        throw UsageError("method '" + infer_method + "' is supervised and needs --train");
      if (!method.supervised && !train_dirs.empty())
        throw UsageError("--train applies only to supervised methods (cirusim)");
      std::vector<NetworkRecord> training;
      for (const auto& d : train_dirs) training.push_back(detail::load_record(d, h));
      Dataset data = load_network_directory(infer_in, h.sample_rate);
      NetworkRecord target;
      target.id = infer_in.filename().string();
      target.raster = preprocess(data.panel, data.layout, detail::preprocess_options(h));
      target.panel = std::move(data.panel);
      target.layout = std::move(data.layout);
      std::vector<const NetworkRecord*> train_ptrs;
      for (const auto& t : training) train_ptrs.push_back(&t);
      const ScoreMatrix scores = method.score(target, train_ptrs);
      write_score_matrix(scores, infer_out, infer_heatmap);
      out << "wrote " << infer_method << " scores to " << infer_out.string() << "\n";
    } else if (ev->parsed()) {
      const Dataset data = load_network_directory(ev_in, h.sample_rate);
      if (!data.truth) throw ConsistencyError("no ground-truth network file in " + ev_in.string());
      const ScoreMatrix scores = load_score_matrix(ev_scores, ev_tag);
      const LabeledScores pairs = flatten_pairs(scores, *data.truth);
      const EvalReport report =
          EvalReport::from_folds(ev_tag, {{ev_in.filename().string(), roc_auc(pairs), pr_auc(pairs), 0.0}});
      const std::string text = format_report(report);
      if (!ev_out.empty()) write_file_atomic(ev_out, text);
      out << text;
    } else if (cv->parsed()) {
      const auto methods = detail::split_list(cv_methods);
      detail::check_methods(methods);
      detail::check_method_flags(*cv, methods);
      if (cv_jobs < 1) throw UsageError("--jobs must be >= 1");
      const MethodConfig config = detail::method_config(h);
      std::vector<Method> registered;
      for (const auto& m : methods) registered.push_back(make_method(m, config));
      const auto dirs = list_network_directories(cv_in);
      if (dirs.empty()) throw IoError("no network directories under " + cv_in.string());
      std::vector<NetworkRecord> networks;
      for (const auto& d : dirs) networks.push_back(detail::load_record(d, h));
      for (const auto& m : registered)
        if (m.supervised && networks.size() < 2)
          throw ConsistencyError("supervised method '" + m.tag + "' needs at least 2 networks");
      std::vector<EvalReport> reports;
      for (const auto& m : registered) reports.push_back(leave_one_network_out(networks, m, cv_jobs));
      std::string summary = "method,auc,prc,seconds\n";
      for (const auto& r : reports) summary += format_report_row(r) + "\n";
      if (!cv_out.empty()) {
        std::filesystem::create_directories(cv_out);
        for (const auto& r : reports) write_report(r, cv_out / ("report_" + r.method_tag + ".txt"));
        write_file_atomic(cv_out / "summary.csv", summary);
        write_file_atomic(cv_out / "summary.txt", detail::summary_table(reports));
      }
      out << detail::summary_table(reports) << summary;
    } else if (hm->parsed()) {
      const ScoreMatrix scores = load_score_matrix(hm_scores);
      write_file_atomic(hm_out, format_heatmap_pgm(scores));
      out << "wrote heatmap to " << hm_out.string() << "\n";
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace netinfer::cli
