#pragma once

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "efgraph/dynamics.hpp"
#include "efgraph/eeg_power.hpp"
#include "efgraph/error.hpp"
#include "efgraph/graph.hpp"
#include "efgraph/io.hpp"
#include "efgraph/states.hpp"
#include "efgraph/timeseries.hpp"

namespace efgraph {

inline constexpr int kSummarySchemaVersion = 1;

/// Every field maps to a CLI flag / config key of the same name with
/// underscores turned into dashes (see config_entries).
struct PipelineConfig {
  std::string input;       // assembled [EEG | FMRI] matrix
  std::string eeg;         // EEG band power already on the TR grid
  std::string raw_eeg;     // continuous EEG, time column at 1/fs
  std::string fmri;        // fMRI component time courses
  std::string regressors;  // nuisance regressors, one column each
  std::string labels;      // node label overrides, one per line
  std::string output_dir = "efgraph_out";

  double tr = 2.0;
  std::vector<std::string> bands = {"delta", "theta", "alpha", "beta", "low_gamma"};
  bool hrf = true;
  double hrf_duration = 32.0;

  int detrend_order = 3;  // 0 disables
  bool regress_derivatives = true;
  bool despike = true;
  double outlier_z = 4.0;
  bool bandpass = true;
  double bandpass_lo = 0.01;
  double bandpass_hi = 0.10;

  int window_length = 20;
  int window_step = 1;
  std::string clustering_denominator = "strength";
  double lf_lo = 0.0;
  double lf_hi = 0.025;

  std::string state_sign = "positive";
  double resolution = 1.0;
  std::uint64_t seed = 0;

  unsigned threads = 1;
};

namespace detail {

inline std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

inline std::string bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace detail

/// (key, value) pairs for the config echo, in a fixed order. Keys are the
/// long CLI flag names. threads is not echoed.
inline std::vector<std::pair<std::string, std::string>> config_entries(const PipelineConfig& c) {
  using detail::format_double;
  return {
      {"input", c.input},
      {"eeg", c.eeg},
      {"raw-eeg", c.raw_eeg},
      {"fmri", c.fmri},
      {"regressors", c.regressors},
      {"labels", c.labels},
      {"output-dir", c.output_dir},
      {"tr", format_double(c.tr)},
      {"bands", detail::join(c.bands, ',')},
      {"hrf", detail::bool_text(c.hrf)},
      {"hrf-duration", format_double(c.hrf_duration)},
      {"detrend-order", std::to_string(c.detrend_order)},
      {"regress-derivatives", detail::bool_text(c.regress_derivatives)},
      {"despike", detail::bool_text(c.despike)},
      {"outlier-z", format_double(c.outlier_z)},
      {"bandpass", detail::bool_text(c.bandpass)},
      {"bandpass-lo", format_double(c.bandpass_lo)},
      {"bandpass-hi", format_double(c.bandpass_hi)},
      {"window-length", std::to_string(c.window_length)},
      {"window-step", std::to_string(c.window_step)},
      {"clustering-denominator", c.clustering_denominator},
      {"lf-lo", format_double(c.lf_lo)},
      {"lf-hi", format_double(c.lf_hi)},
      {"state-sign", c.state_sign},
      {"resolution", format_double(c.resolution)},
      {"seed", std::to_string(c.seed)},
  };
}

/// Config file text accepted by `efgraph run --config`: a [run] section of
/// key = "value" lines.
inline std::string config_file_text(const PipelineConfig& c) {
  std::ostringstream out;
  out << "[run]\n";
  for (const auto& [key, value] : config_entries(c)) {
    out << key << " = \"" << value << "\"\n";
  }
  return out.str();
}

inline ClusteringDenominator parse_clustering_denominator(std::string_view s) {
  if (s == "strength") return ClusteringDenominator::Strength;
  if (s == "degree") return ClusteringDenominator::Degree;
  throw Error("unknown clustering denominator '" + std::string(s) + "' (expected strength or degree)");
}

/// Band by name, or a custom "name:lo:hi".
inline BandDefinition parse_band(const std::string& spec) {
  const auto first = spec.find(':');
  if (first == std::string::npos) {
    return find_band(spec);
  }
  const auto second = spec.find(':', first + 1);
  BandDefinition b;
  b.name = spec.substr(0, first);
  if (second == std::string::npos ||
      !detail::parse_double(std::string_view(spec).substr(first + 1, second - first - 1), b.lo) ||
      !detail::parse_double(std::string_view(spec).substr(second + 1), b.hi)) {
    throw Error("band '" + spec + "' is not name or name:lo:hi");
  }
  b.validate();
  return b;
}

/// Runs `fn`, prefixing any error with the stage name.
template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error("[" + stage + "] " + e.what());
  }
}

struct PreprocessOptions {
  int detrend_order = 3;
  std::optional<Eigen::MatrixXd> regressors;
  bool regress_derivatives = true;
  bool despike = true;
  double outlier_z = 4.0;
  bool bandpass = true;
  double bandpass_lo = 0.01;
  double bandpass_hi = 0.10;
};

/// detrend -> nuisance regression -> outlier removal -> band-pass, each
/// step optional.
inline TimeSeriesMatrix preprocess(const TimeSeriesMatrix& ts, const PreprocessOptions& opt,
                                   Warnings* warnings = nullptr) {
  TimeSeriesMatrix out = ts;
  if (opt.detrend_order > 0) {
    out = run_stage("detrend", [&] { return detrend_polynomial(out, opt.detrend_order); });
  }
  if (opt.regressors) {
    out = run_stage("nuisance", [&] { return regress_nuisance(out, *opt.regressors, opt.regress_derivatives, warnings); });
  }
  if (opt.despike) {
    out = run_stage("outliers", [&] { return remove_outliers(out, opt.outlier_z); });
  }
  if (opt.bandpass) {
    out = run_stage("bandpass", [&] { return bandpass_filter(out, opt.bandpass_lo, opt.bandpass_hi); });
  }
  return out;
}

struct SignedMetrics {
  GraphMetricSet positive;
  GraphMetricSet negative;

  const GraphMetricSet& get(Sign s) const { return s == Sign::Positive ? positive : negative; }
};

struct StaticResult {
  CorrelationMatrix correlation;
  SignedWeightedGraph graph;
  SignedMetrics metrics;
};

inline StaticResult static_analysis(const TimeSeriesMatrix& ts, ClusteringDenominator denominator) {
  StaticResult r;
  r.correlation = pearson_correlation_matrix(ts);
  r.graph = split_signed(r.correlation);
  r.metrics.positive = graph_metrics(r.graph.w_plus, denominator);
  r.metrics.negative = graph_metrics(r.graph.w_minus, denominator);
  return r;
}

inline constexpr Metric kMetrics[] = {Metric::CS, Metric::CC, Metric::GE};
inline constexpr Sign kSigns[] = {Sign::Positive, Sign::Negative};

/// Variance and low-frequency amplitude of one metric series.
struct TemporalSummary {
  Eigen::VectorXd node_variance;
  Eigen::VectorXd node_lf_amplitude;
  double global_variance = 0.0;
  double global_lf_amplitude = 0.0;
};

struct DynamicResult {
  DynamicGraphSeries series;
  // Indexed [sign][metric] following kSigns / kMetrics.
  MetricSeries metrics[2][3];
  TemporalSummary temporal[2][3];
};

inline DynamicResult dynamic_analysis(const TimeSeriesMatrix& ts, const WindowSpec& spec,
                                      ClusteringDenominator denominator, double lf_lo, double lf_hi,
                                      unsigned threads) {
  DynamicResult r;
  r.series = run_stage("dynamic", [&] { return dynamic_graph_series(ts, spec, threads); });
  for (int s = 0; s < 2; ++s) {
    for (int m = 0; m < 3; ++m) {
      r.metrics[s][m] = metric_series(r.series, kMetrics[m], kSigns[s], denominator, threads);
    }
  }
  run_stage("temporal", [&] {
    for (int s = 0; s < 2; ++s) {
      for (int m = 0; m < 3; ++m) {
        const MetricSeries& ms = r.metrics[s][m];
        TemporalSummary& t = r.temporal[s][m];
        const Eigen::Index n = ms.node.cols();
        t.node_variance.resize(n);
        t.node_lf_amplitude.resize(n);
        for (Eigen::Index c = 0; c < n; ++c) {
          const Eigen::VectorXd column = ms.node.col(c);
          const std::span<const double> view(column.data(), static_cast<std::size_t>(column.size()));
          t.node_variance(c) = temporal_variance(view);
          t.node_lf_amplitude(c) = low_freq_amplitude(view, r.series.dt, lf_lo, lf_hi);
        }
        const std::span<const double> global(ms.global.data(), static_cast<std::size_t>(ms.global.size()));
        t.global_variance = temporal_variance(global);
        t.global_lf_amplitude = low_freq_amplitude(global, r.series.dt, lf_lo, lf_hi);
      }
    }
  });
  return r;
}

struct StateResult {
  WindowSimilarityMatrix similarity;
  StatePartition partition;
};

inline StateResult state_analysis(const DynamicGraphSeries& dyn, Sign sign, double resolution, std::uint64_t seed) {
  StateResult r;
  r.similarity = run_stage("similarity", [&] { return window_similarity(dyn, sign); });
  r.partition = run_stage("states", [&] { return detect_states(r.similarity, resolution, seed); });
  r.partition.state_graphs = run_stage("state-graphs", [&] { return state_average_graphs(dyn, r.partition.assignment); });
  return r;
}

/// Everything computed for one [EEG | FMRI] matrix.
struct AnalysisResult {
  std::string name;
  TimeSeriesMatrix preprocessed;
  StaticResult static_result;
  DynamicResult dynamic_result;
  StateResult state_result;
  Warnings warnings;
};

inline AnalysisResult analyze(std::string name, const TimeSeriesMatrix& assembled, const PipelineConfig& config,
                              const std::optional<Eigen::MatrixXd>& regressors) {
  AnalysisResult r;
  r.name = std::move(name);
  const auto denominator = parse_clustering_denominator(config.clustering_denominator);
  const Sign sign = parse_sign(config.state_sign);

  PreprocessOptions opt;
  opt.detrend_order = config.detrend_order;
  opt.regressors = regressors;
  opt.regress_derivatives = config.regress_derivatives;
  opt.despike = config.despike;
  opt.outlier_z = config.outlier_z;
  opt.bandpass = config.bandpass;
  opt.bandpass_lo = config.bandpass_lo;
  opt.bandpass_hi = config.bandpass_hi;
  r.preprocessed = preprocess(assembled, opt, &r.warnings);

  r.static_result = run_stage("static", [&] { return static_analysis(r.preprocessed, denominator); });
  r.dynamic_result = dynamic_analysis(r.preprocessed, WindowSpec{config.window_length, config.window_step},
                                      denominator, config.lf_lo, config.lf_hi, config.threads);
  r.state_result = state_analysis(r.dynamic_result.series, sign, config.resolution, config.seed);
  return r;
}

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

inline TimeSeriesMatrix square_matrix(const Eigen::MatrixXd& m, const std::vector<std::string>& labels,
                                      const std::vector<Modality>& modalities) {
  // Rows are nodes; the time column carries the row index.
  return TimeSeriesMatrix{m, labels, modalities, 1.0};
}

inline nlohmann::ordered_json net_values(const GraphMetricSet& m) {
  return {{"cs_net", m.cs_net}, {"cc_net", m.cc_net}, {"ge_net", m.ge_net}};
}

}  // namespace detail

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error("cannot create output directory '" + dir.string() + "'");
  }
}

/// Correlation, w+/w- matrices and the per-node static metric table.
inline nlohmann::ordered_json write_static_report(const StaticResult& st, const TimeSeriesMatrix& ts,
                                                  const std::filesystem::path& dir) {
  using detail::format_double;
  ensure_directory(dir);
  write_matrix_file(dir / "static_correlation.csv", detail::square_matrix(st.correlation.r, ts.labels, ts.modalities));
  write_matrix_file(dir / "static_w_plus.csv", detail::square_matrix(st.graph.w_plus, ts.labels, ts.modalities));
  write_matrix_file(dir / "static_w_minus.csv", detail::square_matrix(st.graph.w_minus, ts.labels, ts.modalities));

  std::vector<std::string> header = {"node", "label", "modality"};
  for (Sign s : kSigns) {
    for (Metric m : kMetrics) {
      header.push_back(detail::lower(to_string(m)) + "_" + std::string(to_string(s)));
    }
  }
  std::vector<std::vector<std::string>> rows;
  for (Eigen::Index i = 0; i < ts.nodes(); ++i) {
    std::vector<std::string> row = {std::to_string(i), ts.labels[static_cast<std::size_t>(i)],
                                    std::string(to_string(ts.modalities[static_cast<std::size_t>(i)]))};
    for (Sign s : kSigns) {
      const auto& g = st.metrics.get(s);
      row.push_back(format_double(g.cs_node(i)));
      row.push_back(format_double(g.cc_node(i)));
      row.push_back(format_double(g.ge_node(i)));
    }
    rows.push_back(std::move(row));
  }
  write_table(dir / "static_metrics.csv", header, rows);

  nlohmann::ordered_json summary;
  for (Sign s : kSigns) {
    summary[std::string(to_string(s))] = detail::net_values(st.metrics.get(s));
  }
  return summary;
}

/// Per-window metric matrices, the global metric series and the temporal
/// (variance / low-frequency amplitude) table.
inline nlohmann::ordered_json write_dynamic_report(const DynamicResult& dy, const TimeSeriesMatrix& ts,
                                                   const std::filesystem::path& dir) {
  using detail::format_double;
  ensure_directory(dir);
  const auto windows = static_cast<Eigen::Index>(dy.series.size());
  std::vector<std::string> global_labels;
  Eigen::MatrixXd global(windows, 6);
  for (int s = 0; s < 2; ++s) {
    for (int m = 0; m < 3; ++m) {
      const std::string tag = detail::lower(to_string(kMetrics[m])) + "_" + std::string(to_string(kSigns[s]));
      write_matrix_file(dir / ("dynamic_" + tag + ".csv"),
                        TimeSeriesMatrix{dy.metrics[s][m].node, ts.labels, ts.modalities, dy.series.dt});
      global.col(s * 3 + m) = dy.metrics[s][m].global;
      global_labels.push_back(tag);
    }
  }
  write_matrix_file(dir / "dynamic_global.csv",
                    TimeSeriesMatrix{global, global_labels, std::vector<Modality>(6, Modality::Derived), dy.series.dt});

  std::vector<std::string> header = {"node", "label", "modality"};
  for (int s = 0; s < 2; ++s) {
    for (int m = 0; m < 3; ++m) {
      const std::string tag = detail::lower(to_string(kMetrics[m])) + "_" + std::string(to_string(kSigns[s]));
      header.push_back("variance_" + tag);
      header.push_back("lf_amplitude_" + tag);
    }
  }
  std::vector<std::vector<std::string>> rows;
  for (Eigen::Index i = 0; i < ts.nodes(); ++i) {
    std::vector<std::string> row = {std::to_string(i), ts.labels[static_cast<std::size_t>(i)],
                                    std::string(to_string(ts.modalities[static_cast<std::size_t>(i)]))};
    for (int s = 0; s < 2; ++s) {
      for (int m = 0; m < 3; ++m) {
        row.push_back(format_double(dy.temporal[s][m].node_variance(i)));
        row.push_back(format_double(dy.temporal[s][m].node_lf_amplitude(i)));
      }
    }
    rows.push_back(std::move(row));
  }
  write_table(dir / "temporal_metrics.csv", header, rows);

  nlohmann::ordered_json summary;
  summary["windows"] = windows;
  for (int s = 0; s < 2; ++s) {
    const std::string sign(to_string(kSigns[s]));
    for (int m = 0; m < 3; ++m) {
      const std::string metric = detail::lower(to_string(kMetrics[m]));
      summary["dynamic_mean"][sign][metric + "_net"] = dy.metrics[s][m].global.mean();
      summary["temporal"][sign][metric + "_net"] = {{"variance", dy.temporal[s][m].global_variance},
                                                    {"lf_amplitude", dy.temporal[s][m].global_lf_amplitude}};
    }
  }
  return summary;
}

/// Similarity matrix, state assignment and averaged state graphs.
inline nlohmann::ordered_json write_state_report(const StateResult& sr, const DynamicGraphSeries& series,
                                                 const TimeSeriesMatrix& ts, const std::filesystem::path& dir) {
  ensure_directory(dir);
  const auto windows = static_cast<Eigen::Index>(series.size());
  std::vector<std::string> window_labels;
  for (Eigen::Index k = 0; k < windows; ++k) {
    window_labels.push_back("w" + std::to_string(k));
  }
  write_matrix_file(dir / "similarity.csv",
                    TimeSeriesMatrix{sr.similarity.s, window_labels,
                                     std::vector<Modality>(static_cast<std::size_t>(windows), Modality::Derived),
                                     series.dt});
  write_labels_file(dir / "states.txt", sr.partition.assignment);
  for (std::size_t k = 0; k < sr.partition.state_graphs.size(); ++k) {
    const auto& g = sr.partition.state_graphs[k];
    write_matrix_file(dir / ("state_" + std::to_string(k) + "_w_plus.csv"),
                      detail::square_matrix(g.w_plus, ts.labels, ts.modalities));
    write_matrix_file(dir / ("state_" + std::to_string(k) + "_w_minus.csv"),
                      detail::square_matrix(g.w_minus, ts.labels, ts.modalities));
  }

  nlohmann::ordered_json summary;
  summary["n_states"] = sr.partition.n_states;
  summary["modularity_q"] = sr.partition.modularity_q;
  nlohmann::ordered_json sizes = nlohmann::ordered_json::array();
  for (const auto& g : sr.partition.state_graphs) {
    sizes.push_back(g.members);
  }
  summary["state_sizes"] = sizes;
  return summary;
}

/// Writes the full report set for one analysis into `dir` and returns its
/// summary entry.
inline nlohmann::ordered_json write_report(const AnalysisResult& r, const std::filesystem::path& dir) {
  ensure_directory(dir);
  write_matrix_file(dir / "preprocessed.csv", r.preprocessed);
  const auto st = write_static_report(r.static_result, r.preprocessed, dir);
  const auto dy = write_dynamic_report(r.dynamic_result, r.preprocessed, dir);
  const auto sr = write_state_report(r.state_result, r.dynamic_result.series, r.preprocessed, dir);

  nlohmann::ordered_json summary;
  summary["name"] = r.name;
  summary["samples"] = r.preprocessed.samples();
  summary["nodes"] = r.preprocessed.nodes();
  summary["windows"] = dy["windows"];
  summary["n_states"] = sr["n_states"];
  summary["modularity_q"] = sr["modularity_q"];
  summary["state_sizes"] = sr["state_sizes"];
  summary["static"] = st;
  summary["dynamic_mean"] = dy["dynamic_mean"];
  summary["temporal"] = dy["temporal"];
  summary["warnings"] = r.warnings;
  return summary;
}

/// Combined summary document for a run.
inline nlohmann::ordered_json make_summary(const PipelineConfig& config, const std::vector<nlohmann::ordered_json>& analyses) {
  nlohmann::ordered_json doc;
  doc["schema"] = "efgraph-summary";
  doc["schema_version"] = kSummarySchemaVersion;
  for (const auto& [key, value] : config_entries(config)) {
    doc["config"][key] = value;
  }
  doc["analyses"] = analyses;
  return doc;
}

namespace detail {

inline TimeSeriesMatrix load(const std::string& stage, const std::string& path) {
  return run_stage(stage, [&] { return read_matrix_file(path); });
}

inline TimeSeriesMatrix as_eeg(TimeSeriesMatrix ts) {
  ts.modalities.assign(ts.labels.size(), Modality::Eeg);
  return ts;
}

}  // namespace detail

/// The [EEG | FMRI] matrices to analyse, one per band when raw EEG is given.
inline std::vector<std::pair<std::string, TimeSeriesMatrix>> assemble_inputs(const PipelineConfig& config,
                                                                             Warnings* warnings = nullptr) {
  if (!(config.tr > 0.0)) {
    throw Error("[config] tr must be positive");
  }
  if (!config.input.empty() && (!config.eeg.empty() || !config.raw_eeg.empty() || !config.fmri.empty())) {
    throw Error("[config] input excludes eeg, raw-eeg and fmri");
  }
  if (!config.eeg.empty() && !config.raw_eeg.empty()) {
    throw Error("[config] eeg and raw-eeg are mutually exclusive");
  }
  if (config.input.empty() && config.eeg.empty() && config.raw_eeg.empty() && config.fmri.empty()) {
    throw Error("[config] no input: give input, fmri, eeg or raw-eeg");
  }

  std::optional<TimeSeriesMatrix> fmri;
  if (!config.fmri.empty()) {
    fmri = detail::load("read-fmri", config.fmri);
  }

  auto finish_eeg = [&](TimeSeriesMatrix eeg) {
    if (config.hrf) {
      const auto kernel = run_stage("hrf", [&] { return hrf_kernel(eeg.dt, config.hrf_duration); });
      eeg = run_stage("hrf", [&] { return hrf_convolve(eeg, kernel); });
    }
    return fmri ? run_stage("concatenate", [&] { return concatenate(eeg, *fmri); }) : eeg;
  };

  std::vector<std::pair<std::string, TimeSeriesMatrix>> out;
  if (!config.input.empty()) {
    out.emplace_back("main", detail::load("read-input", config.input));
  } else if (!config.raw_eeg.empty()) {
    const TimeSeriesMatrix file = detail::load("read-raw-eeg", config.raw_eeg);
    RawEegRecord raw{file.values, 1.0 / file.dt, file.labels};
    if (config.bands.empty()) {
      throw Error("[config] raw-eeg needs at least one band");
    }
    for (const auto& spec : config.bands) {
      const BandDefinition band = run_stage("config", [&] { return parse_band(spec); });
      TimeSeriesMatrix power =
          run_stage("bandpower", [&] { return band_power_series(raw, band, config.tr, warnings); });
      if (fmri && power.samples() != fmri->samples()) {
        throw Error("[bandpower] band " + band.name + " yields " + std::to_string(power.samples()) +
                    " power samples but the fMRI matrix has " + std::to_string(fmri->samples()));
      }
      out.emplace_back(band.name, finish_eeg(std::move(power)));
    }
  } else if (!config.eeg.empty()) {
    out.emplace_back("main", finish_eeg(detail::as_eeg(detail::load("read-eeg", config.eeg))));
  } else {
    out.emplace_back("main", *fmri);
  }

  if (!config.labels.empty()) {
    const auto names = run_stage("read-labels", [&] { return read_names_file(config.labels); });
    for (auto& [name, ts] : out) {
      if (names.size() != ts.labels.size()) {
        throw Error("[read-labels] " + std::to_string(names.size()) + " labels for " +
                    std::to_string(ts.labels.size()) + " nodes");
      }
      ts.labels = names;
      run_stage("read-labels", [&] { ts.validate(); });
    }
  }
  return out;
}

/// Full pipeline: assemble inputs, analyse each, write reports and
/// summary.json under config.output_dir (one subdirectory per band when raw
/// EEG drives several bands). Returns the summary document.
inline nlohmann::ordered_json run_pipeline(const PipelineConfig& config) {
  namespace fs = std::filesystem;
  Warnings input_warnings;
  auto inputs = assemble_inputs(config, &input_warnings);

  std::optional<Eigen::MatrixXd> regressors;
  if (!config.regressors.empty()) {
    regressors = detail::load("read-regressors", config.regressors).values;
  }

  const fs::path root(config.output_dir);
  std::vector<nlohmann::ordered_json> summaries;
  for (auto& [name, ts] : inputs) {
    AnalysisResult result = analyze(name, ts, config, regressors);
    result.warnings.insert(result.warnings.begin(), input_warnings.begin(), input_warnings.end());
    const fs::path dir = inputs.size() > 1 ? root / name : root;
    summaries.push_back(run_stage("report", [&] { return write_report(result, dir); }));
  }

  auto doc = make_summary(config, summaries);
  run_stage("report", [&] {
    auto out = detail::open_for_writing(root / "summary.json");
    out << doc.dump(2) << '\n';
    auto cfg = detail::open_for_writing(root / "run_config.toml");
    cfg << config_file_text(config);
  });
  return doc;
}

}  // namespace efgraph
