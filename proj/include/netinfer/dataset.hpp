#pragma once

// Text formats for recordings, layouts, networks, scores and reports.
//
// fluorescence: comma-separated, one row per time step, one column per neuron
// positions:    one "x,y" row per neuron
// network:      "i,j,w" rows, 1-based indices; an edge exists iff some row has w > 0
// scores:       N rows of N comma-separated values printed with 9 decimals
// heatmap:      PGM P2, maxval 255, pixel = round(255·score)

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "netinfer/types.hpp"

namespace netinfer {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_number(std::string_view token, std::size_t line) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (token.empty() || ec != std::errc() || ptr != end)
    throw ParseError("non-numeric token '" + std::string(token) + "'", line);
  return value;
}

/// Parses every non-blank line into a row of numbers; returns rows with their line numbers.
inline std::vector<std::pair<std::size_t, std::vector<double>>> parse_rows(std::istream& in) {
  std::vector<std::pair<std::size_t, std::vector<double>>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = view.find(',', start);
      row.push_back(parse_number(view.substr(start, comma == std::string_view::npos ? view.npos : comma - start),
                                 line_no));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    rows.emplace_back(line_no, std::move(row));
  }
  return rows;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

inline std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

}  // namespace detail

inline FluorescencePanel parse_fluorescence(std::istream& in, double sample_rate_hz = kDefaultSampleRateHz) {
  const auto rows = detail::parse_rows(in);
  if (rows.empty()) throw ParseError("empty fluorescence input", 0);
  const std::size_t width = rows.front().second.size();
  FluorescencePanel panel;
  panel.sample_rate_hz = sample_rate_hz;
  panel.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const auto& [line_no, row] = rows[t];
    if (row.size() != width)
      throw ParseError("expected " + std::to_string(width) + " columns, found " + std::to_string(row.size()),
                       line_no);
    for (std::size_t i = 0; i < width; ++i) panel.values(static_cast<Index>(t), static_cast<Index>(i)) = row[i];
  }
  panel.validate();
  return panel;
}

inline NeuronLayout parse_positions(std::istream& in) {
  NeuronLayout layout;
  for (const auto& [line_no, row] : detail::parse_rows(in)) {
    if (row.size() != 2) throw ParseError("position rows must be 'x,y'", line_no);
    if (!std::isfinite(row[0]) || !std::isfinite(row[1])) throw ParseError("non-finite coordinate", line_no);
    layout.positions.push_back({row[0], row[1]});
  }
  return layout;
}

/// Rows "i,j,w" with 1-based indices. Rows with w <= 0 (inhibitory or absent) never create an edge,
/// and self-connections are dropped.
inline GroundTruthNetwork parse_network(std::istream& in, Index neuron_count) {
  GroundTruthNetwork net;
  net.edges = BinaryMatrix::Zero(neuron_count, neuron_count);
  for (const auto& [line_no, row] : detail::parse_rows(in)) {
    if (row.size() != 3) throw ParseError("network rows must be 'i,j,w'", line_no);
    const double fi = row[0];
    const double fj = row[1];
    if (fi != std::floor(fi) || fj != std::floor(fj)) throw ParseError("neuron indices must be integers", line_no);
    if (fi < 1 || fj < 1 || fi > static_cast<double>(neuron_count) || fj > static_cast<double>(neuron_count))
      throw ConsistencyError("line " + std::to_string(line_no) + ": neuron index outside 1.." +
                             std::to_string(neuron_count));
    const auto i = static_cast<Index>(fi) - 1;
    const auto j = static_cast<Index>(fj) - 1;
    if (i != j && row[2] > 0.0) net.edges(i, j) = 1;
  }
  return net;
}

struct Dataset {
  FluorescencePanel panel;
  NeuronLayout layout;
  std::optional<GroundTruthNetwork> truth;
};

inline Dataset load_dataset(const std::filesystem::path& fluorescence_path,
                            const std::filesystem::path& positions_path,
                            const std::optional<std::filesystem::path>& network_path = std::nullopt,
                            double sample_rate_hz = kDefaultSampleRateHz) {
  Dataset data;
  {
    auto in = detail::open_input(fluorescence_path);
    data.panel = parse_fluorescence(in, sample_rate_hz);
  }
  {
    auto in = detail::open_input(positions_path);
    data.layout = parse_positions(in);
  }
  if (data.layout.neuron_count() != data.panel.neuron_count())
    throw ConsistencyError(positions_path.string() + " has " + std::to_string(data.layout.neuron_count()) +
                           " neurons, fluorescence has " + std::to_string(data.panel.neuron_count()));
  if (network_path) {
    auto in = detail::open_input(*network_path);
    data.truth = parse_network(in, data.panel.neuron_count());
  }
  return data;
}

/// Writes `content` to a sibling temporary file and renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

inline std::string format_score_matrix(const ScoreMatrix& m) {
  m.validate();
  std::string out;
  out.reserve(static_cast<std::size_t>(m.scores.size()) * 12);
  for (Index i = 0; i < m.scores.rows(); ++i) {
    for (Index j = 0; j < m.scores.cols(); ++j) {
      if (j > 0) out += ',';
      out += detail::format_fixed(m.scores(i, j), 9);
    }
    out += '\n';
  }
  return out;
}

inline std::string format_heatmap_pgm(const ScoreMatrix& m) {
  m.validate();
  std::ostringstream out;
  out << "P2\n" << m.scores.cols() << ' ' << m.scores.rows() << "\n255\n";
  for (Index i = 0; i < m.scores.rows(); ++i) {
    for (Index j = 0; j < m.scores.cols(); ++j) {
      if (j > 0) out << ' ';
      out << static_cast<int>(std::lround(m.scores(i, j) * 255.0));
    }
    out << '\n';
  }
  return out.str();
}

inline std::filesystem::path heatmap_path_for(const std::filesystem::path& scores_path) {
  auto p = scores_path;
  p.replace_extension(".pgm");
  return p;
}

/// Writes the score text and, when `heatmap` is set, a sibling .pgm image.
/// The matrix is validated before anything touches the disk.
inline void write_score_matrix(const ScoreMatrix& m, const std::filesystem::path& path, bool heatmap = false) {
  const std::string text = format_score_matrix(m);
  const std::string image = heatmap ? format_heatmap_pgm(m) : std::string();
  write_file_atomic(path, text);
  if (heatmap) write_file_atomic(heatmap_path_for(path), image);
}

inline ScoreMatrix parse_score_matrix(std::istream& in, std::string method_tag = {}) {
  const auto rows = detail::parse_rows(in);
  ScoreMatrix m;
  m.method_tag = std::move(method_tag);
  const auto n = static_cast<Index>(rows.size());
  m.scores.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    const auto& [line_no, row] = rows[static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != n)
      throw ParseError("score matrix must be square (" + std::to_string(n) + " columns)", line_no);
    for (Index j = 0; j < n; ++j) m.scores(i, j) = row[static_cast<std::size_t>(j)];
  }
  m.validate();
  return m;
}

inline ScoreMatrix load_score_matrix(const std::filesystem::path& path, std::string method_tag = {}) {
  auto in = detail::open_input(path);
  return parse_score_matrix(in, std::move(method_tag));
}

/// Summary row "method,auc,prc,seconds" as used in the comparison table.
inline std::string format_report_row(const EvalReport& r) {
  return r.method_tag + ',' + detail::format_fixed(r.auc, 3) + ',' + detail::format_fixed(r.prc, 3) + ',' +
         detail::format_fixed(r.wall_clock_seconds, 1);
}

inline std::string format_report(const EvalReport& r) {
  r.validate();
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "# %-16s %8s %8s %10s\n", "method", "AUC %", "PRC %", "Time (s)");
  out << buf;
  std::snprintf(buf, sizeof buf, "# %-16s %8.1f %8.1f %10.1f\n", r.method_tag.c_str(), 100.0 * r.auc,
                100.0 * r.prc, r.wall_clock_seconds);
  out << buf;
  for (const auto& f : r.per_fold) {
    std::snprintf(buf, sizeof buf, "#   fold %-11s %8.1f %8.1f %10.1f\n", f.network_id.c_str(), 100.0 * f.auc,
                  100.0 * f.prc, f.seconds);
    out << buf;
  }
  out << "method,auc,prc,seconds\n" << format_report_row(r) << '\n';
  out << "method=" << r.method_tag << '\n';
  out << "auc=" << detail::format_fixed(r.auc, 9) << '\n';
  out << "prc=" << detail::format_fixed(r.prc, 9) << '\n';
  out << "seconds=" << detail::format_fixed(r.wall_clock_seconds, 3) << '\n';
  out << "folds=" << r.per_fold.size() << '\n';
  for (const auto& f : r.per_fold) {
    out << "fold." << f.network_id << ".auc=" << detail::format_fixed(f.auc, 9) << '\n';
    out << "fold." << f.network_id << ".prc=" << detail::format_fixed(f.prc, 9) << '\n';
    out << "fold." << f.network_id << ".seconds=" << detail::format_fixed(f.seconds, 3) << '\n';
  }
  return out.str();
}

inline void write_report(const EvalReport& r, const std::filesystem::path& path) {
  write_file_atomic(path, format_report(r));
}

inline std::string format_fluorescence(const FluorescencePanel& panel) {
  std::string out;
  out.reserve(static_cast<std::size_t>(panel.values.size()) * 12);
  for (Index t = 0; t < panel.values.rows(); ++t) {
    for (Index i = 0; i < panel.values.cols(); ++i) {
      if (i > 0) out += ',';
      out += detail::format_fixed(panel.values(t, i), 9);
    }
    out += '\n';
  }
  return out;
}

inline std::string format_positions(const NeuronLayout& layout) {
  std::string out;
  for (const auto& p : layout.positions)
    out += detail::format_fixed(p.x, 9) + ',' + detail::format_fixed(p.y, 9) + '\n';
  return out;
}

/// Emits "i,j,1" (1-based) for every edge, row-major order.
inline std::string format_network(const GroundTruthNetwork& net) {
  std::string out;
  for (Index i = 0; i < net.edges.rows(); ++i)
    for (Index j = 0; j < net.edges.cols(); ++j)
      if (net.edges(i, j) != 0) out += std::to_string(i + 1) + ',' + std::to_string(j + 1) + ",1\n";
  return out;
}

inline std::string format_raster(const SpikeRaster& raster) {
  std::string out;
  out.reserve(static_cast<std::size_t>(raster.events.size()) * 2);
  for (Index t = 0; t < raster.events.rows(); ++t) {
    for (Index i = 0; i < raster.events.cols(); ++i) {
      if (i > 0) out += ',';
      out += raster.events(t, i) != 0 ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

/// Files making up one network directory. Two layouts are recognized:
/// fluorescence.csv / positions.csv / network.csv, or the challenge naming
/// fluorescence_<tag>.txt / networkPositions_<tag>.txt / network_<tag>.txt.
struct NetworkFiles {
  std::filesystem::path fluorescence;
  std::filesystem::path positions;
  std::optional<std::filesystem::path> network;
};

inline std::optional<NetworkFiles> find_network_files(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (fs::exists(dir / "fluorescence.csv") && fs::exists(dir / "positions.csv")) {
    NetworkFiles files{dir / "fluorescence.csv", dir / "positions.csv", std::nullopt};
    if (fs::exists(dir / "network.csv")) files.network = dir / "network.csv";
    return files;
  }
  if (!fs::is_directory(dir)) return std::nullopt;
  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(dir)) entries.push_back(e.path());
  std::sort(entries.begin(), entries.end());
  for (const auto& p : entries) {
    const std::string name = p.filename().string();
    const std::string prefix = "fluorescence_";
    if (name.rfind(prefix, 0) != 0 || p.extension() != ".txt") continue;
    const std::string tag = name.substr(prefix.size(), name.size() - prefix.size() - 4);
    const fs::path positions = dir / ("networkPositions_" + tag + ".txt");
    if (!fs::exists(positions)) continue;
    NetworkFiles files{p, positions, std::nullopt};
    if (fs::exists(dir / ("network_" + tag + ".txt"))) files.network = dir / ("network_" + tag + ".txt");
    return files;
  }
  return std::nullopt;
}

inline Dataset load_network_directory(const std::filesystem::path& dir, double sample_rate_hz = kDefaultSampleRateHz) {
  const auto files = find_network_files(dir);
  if (!files) throw IoError("no fluorescence/positions files found in " + dir.string());
  return load_dataset(files->fluorescence, files->positions, files->network, sample_rate_hz);
}

/// Network directories under `root`: `root` itself when it holds one network, otherwise
/// every immediate subdirectory that does, sorted by name.
inline std::vector<std::filesystem::path> list_network_directories(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (fs::exists(root / "fluorescence.csv")) return {root};
  std::vector<fs::path> dirs;
  if (!fs::is_directory(root)) throw IoError(root.string() + " is not a directory");
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory() && find_network_files(e.path())) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty() && find_network_files(root)) dirs.push_back(root);
  return dirs;
}

}  // namespace netinfer
