// efgraph command-line front end. Every subcommand reads and writes the
// shared matrix format, so stages compose through files; `run` chains them.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "efgraph/efgraph.hpp"
#include "efgraph/pipeline.hpp"

namespace fs = std::filesystem;
using namespace efgraph;

namespace {

void add_preprocess_options(CLI::App* sub, PipelineConfig& c) {
  sub->add_option("--regressors", c.regressors, "Nuisance regressor matrix file");
  sub->add_option("--detrend-order", c.detrend_order, "Polynomial detrend order (0 disables)")
      ->check(CLI::Range(0, 3));
  sub->add_flag("--regress-derivatives,!--no-regress-derivatives", c.regress_derivatives,
                "Add first differences of the regressors to the design");
  sub->add_flag("--despike,!--no-despike", c.despike, "Replace robust-z outliers");
  sub->add_option("--outlier-z", c.outlier_z, "Robust z threshold for outliers");
  sub->add_flag("--bandpass,!--no-bandpass", c.bandpass, "Apply the zero-phase band-pass");
  sub->add_option("--bandpass-lo", c.bandpass_lo, "Band-pass lower edge (Hz)");
  sub->add_option("--bandpass-hi", c.bandpass_hi, "Band-pass upper edge (Hz)");
}

void add_window_options(CLI::App* sub, PipelineConfig& c) {
  sub->add_option("--window-length", c.window_length, "Sliding window length (samples)");
  sub->add_option("--window-step", c.window_step, "Sliding window step (samples)");
  sub->add_option("--threads", c.threads, "Worker threads (results do not depend on this)");
}

void add_metric_options(CLI::App* sub, PipelineConfig& c) {
  sub->add_option("--clustering-denominator", c.clustering_denominator, "strength or degree")
      ->check(CLI::IsMember({"strength", "degree"}));
}

void add_state_options(CLI::App* sub, PipelineConfig& c, bool seed_required) {
  sub->add_option("--state-sign", c.state_sign, "Weights used for window similarity")
      ->check(CLI::IsMember({"positive", "negative"}));
  sub->add_option("--resolution", c.resolution, "Modularity resolution");
  auto* seed = sub->add_option("--seed", c.seed, "Seed for the state-detection visiting order");
  if (seed_required) {
    seed->required();
  }
}

AnalysisResult load_for_analysis(const PipelineConfig& c) {
  AnalysisResult r;
  r.preprocessed = run_stage("read-input", [&] { return read_matrix_file(c.input); });
  return r;
}

void write_summary(const PipelineConfig& c, const nlohmann::ordered_json& entry) {
  auto doc = make_summary(c, {entry});
  auto out = detail::open_for_writing(fs::path(c.output_dir) / "summary.json");
  out << doc.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Static and dynamic signed EEG-fMRI graph analysis"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML file; options for a subcommand go under its [section], e.g. [run]");
  app.fallthrough();
  app.option_defaults()->always_capture_default();

  PipelineConfig config;

  // synth -------------------------------------------------------------------
  struct {
    std::uint64_t seed = 0;
    int n_eeg = 10;
    int n_fmri = 10;
    int states = 2;
    double within = 0.7;
    std::vector<std::string> dwell = {"0:500", "1:500"};
    double noise = 0.1;
    double tr = 2.0;
    std::string out;
    std::string labels_out;
  } synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a dataset with planted connectivity states");
  synth_cmd->add_option("--seed", synth.seed, "Generator seed")->required();
  synth_cmd->add_option("--n-eeg", synth.n_eeg, "EEG columns");
  synth_cmd->add_option("--n-fmri", synth.n_fmri, "fMRI columns");
  synth_cmd->add_option("--states", synth.states, "Number of planted templates");
  synth_cmd->add_option("--within", synth.within, "Within-group correlation of each template");
  synth_cmd->add_option("--dwell", synth.dwell, "Dwell segments as template:length")->delimiter(',');
  synth_cmd->add_option("--noise", synth.noise, "Additive noise sigma");
  synth_cmd->add_option("--tr", synth.tr, "Sampling interval (s)");
  synth_cmd->add_option("--out", synth.out, "Output matrix file")->required();
  synth_cmd->add_option("--labels-out", synth.labels_out, "Ground-truth labels file (default <out>.labels)");

  // preprocess --------------------------------------------------------------
  std::string preprocess_out;
  auto* preprocess_cmd = app.add_subcommand("preprocess", "Detrend, regress, despike and band-pass a matrix");
  preprocess_cmd->add_option("--input", config.input, "Input matrix file")->required();
  add_preprocess_options(preprocess_cmd, config);
  preprocess_cmd->add_option("--out", preprocess_out, "Output matrix file")->required();

  // bandpower ---------------------------------------------------------------
  std::string band_spec = "alpha";
  std::string bandpower_out;
  auto* bandpower_cmd = app.add_subcommand("bandpower", "EEG band power on the TR grid, optionally HRF-convolved");
  bandpower_cmd->add_option("--raw-eeg", config.raw_eeg, "Raw EEG matrix file")->required();
  bandpower_cmd->add_option("--band", band_spec, "Band name or name:lo:hi");
  bandpower_cmd->add_option("--tr", config.tr, "Power grid interval (s)");
  bandpower_cmd->add_flag("--hrf,!--no-hrf", config.hrf, "Convolve with the canonical HRF");
  bandpower_cmd->add_option("--hrf-duration", config.hrf_duration, "HRF kernel length (s)");
  bandpower_cmd->add_option("--out", bandpower_out, "Output matrix file")->required();

  // static ------------------------------------------------------------------
  auto* static_cmd = app.add_subcommand("static", "Static signed graph and metrics");
  static_cmd->add_option("--input", config.input, "Preprocessed matrix file")->required();
  add_metric_options(static_cmd, config);
  static_cmd->add_option("--output-dir", config.output_dir, "Report directory");

  // dynamic -----------------------------------------------------------------
  auto* dynamic_cmd = app.add_subcommand("dynamic", "Sliding-window graphs, metric series and temporal summaries");
  dynamic_cmd->add_option("--input", config.input, "Preprocessed matrix file")->required();
  add_window_options(dynamic_cmd, config);
  add_metric_options(dynamic_cmd, config);
  dynamic_cmd->add_option("--lf-lo", config.lf_lo, "Fluctuation band lower edge (Hz, exclusive)");
  dynamic_cmd->add_option("--lf-hi", config.lf_hi, "Fluctuation band upper edge (Hz)");
  dynamic_cmd->add_option("--output-dir", config.output_dir, "Report directory");

  // states ------------------------------------------------------------------
  auto* states_cmd = app.add_subcommand("states", "Connectivity-state detection over sliding windows");
  states_cmd->add_option("--input", config.input, "Preprocessed matrix file")->required();
  add_window_options(states_cmd, config);
  add_state_options(states_cmd, config, true);
  states_cmd->add_option("--output-dir", config.output_dir, "Report directory");

  // ttest -------------------------------------------------------------------
  std::string ttest_a;
  std::string ttest_b;
  std::string ttest_out;
  auto* ttest_cmd = app.add_subcommand("ttest", "Column-wise paired t-tests between two matrix files");
  ttest_cmd->add_option("--a", ttest_a, "Condition A (rows are subjects)")->required();
  ttest_cmd->add_option("--b", ttest_b, "Condition B (same shape and labels)")->required();
  ttest_cmd->add_option("--out", ttest_out, "Output table (default: stdout)");

  // run ---------------------------------------------------------------------
  auto* run_cmd = app.add_subcommand("run", "Full pipeline");
  run_cmd->add_option("--input", config.input, "Assembled [EEG | FMRI] matrix file");
  run_cmd->add_option("--eeg", config.eeg, "EEG band-power matrix on the TR grid");
  run_cmd->add_option("--raw-eeg", config.raw_eeg, "Raw EEG matrix file");
  run_cmd->add_option("--fmri", config.fmri, "fMRI component matrix file");
  run_cmd->add_option("--labels", config.labels, "Node label overrides, one per line");
  run_cmd->add_option("--output-dir", config.output_dir, "Report directory");
  run_cmd->add_option("--tr", config.tr, "Repetition time (s)");
  run_cmd->add_option("--bands", config.bands, "Bands for raw EEG (names or name:lo:hi)")->delimiter(',');
  run_cmd->add_flag("--hrf,!--no-hrf", config.hrf, "Convolve EEG power with the canonical HRF");
  run_cmd->add_option("--hrf-duration", config.hrf_duration, "HRF kernel length (s)");
  add_preprocess_options(run_cmd, config);
  add_window_options(run_cmd, config);
  add_metric_options(run_cmd, config);
  run_cmd->add_option("--lf-lo", config.lf_lo, "Fluctuation band lower edge (Hz, exclusive)");
  run_cmd->add_option("--lf-hi", config.lf_hi, "Fluctuation band upper edge (Hz)");
  add_state_options(run_cmd, config, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) {
      std::vector<DwellSegment> dwells;
      for (const auto& d : synth.dwell) {
        const auto colon = d.find(':');
        if (colon == std::string::npos) {
          throw Error("dwell '" + d + "' is not template:length");
        }
        dwells.push_back({static_cast<std::size_t>(std::stoul(d.substr(0, colon))),
                          static_cast<Eigen::Index>(std::stol(d.substr(colon + 1)))});
      }
      const auto templates = planted_templates(synth.n_eeg + synth.n_fmri, synth.states, synth.within);
      const auto data = generate_dataset(templates, dwells, synth.n_eeg, synth.n_fmri, synth.noise, synth.seed, synth.tr);
      write_matrix_file(synth.out, data.ts);
      write_labels_file(synth.labels_out.empty() ? synth.out + ".labels" : synth.labels_out, data.true_labels);
    } else if (preprocess_cmd->parsed()) {
      Warnings warnings;
      const auto ts = run_stage("read-input", [&] { return read_matrix_file(config.input); });
      PreprocessOptions opt;
      opt.detrend_order = config.detrend_order;
      if (!config.regressors.empty()) {
        opt.regressors = run_stage("read-regressors", [&] { return read_matrix_file(config.regressors); }).values;
      }
      opt.regress_derivatives = config.regress_derivatives;
      opt.despike = config.despike;
      opt.outlier_z = config.outlier_z;
      opt.bandpass = config.bandpass;
      opt.bandpass_lo = config.bandpass_lo;
      opt.bandpass_hi = config.bandpass_hi;
      write_matrix_file(preprocess_out, preprocess(ts, opt, &warnings));
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    } else if (bandpower_cmd->parsed()) {
      Warnings warnings;
      const auto file = run_stage("read-raw-eeg", [&] { return read_matrix_file(config.raw_eeg); });
      const RawEegRecord raw{file.values, 1.0 / file.dt, file.labels};
      const auto band = parse_band(band_spec);
      auto power = run_stage("bandpower", [&] { return band_power_series(raw, band, config.tr, &warnings); });
      if (config.hrf) {
        power = run_stage("hrf", [&] { return hrf_convolve(power, hrf_kernel(power.dt, config.hrf_duration)); });
      }
      write_matrix_file(bandpower_out, power);
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    } else if (static_cmd->parsed()) {
      const auto r = load_for_analysis(config);
      const auto st = run_stage("static", [&] {
        return static_analysis(r.preprocessed, parse_clustering_denominator(config.clustering_denominator));
      });
      nlohmann::ordered_json entry;
      entry["static"] = run_stage("report", [&] { return write_static_report(st, r.preprocessed, config.output_dir); });
      write_summary(config, entry);
    } else if (dynamic_cmd->parsed()) {
      const auto r = load_for_analysis(config);
      const auto dy = dynamic_analysis(r.preprocessed, WindowSpec{config.window_length, config.window_step},
                                       parse_clustering_denominator(config.clustering_denominator), config.lf_lo,
                                       config.lf_hi, config.threads);
      write_summary(config,
                    run_stage("report", [&] { return write_dynamic_report(dy, r.preprocessed, config.output_dir); }));
    } else if (states_cmd->parsed()) {
      const auto r = load_for_analysis(config);
      const auto dyn = run_stage("dynamic", [&] {
        return dynamic_graph_series(r.preprocessed, WindowSpec{config.window_length, config.window_step},
                                    config.threads);
      });
      const auto sr = state_analysis(dyn, parse_sign(config.state_sign), config.resolution, config.seed);
      write_summary(config,
                    run_stage("report", [&] { return write_state_report(sr, dyn, r.preprocessed, config.output_dir); }));
    } else if (ttest_cmd->parsed()) {
      const auto a = run_stage("read-a", [&] { return read_matrix_file(ttest_a); });
      const auto b = run_stage("read-b", [&] { return read_matrix_file(ttest_b); });
      if (a.labels != b.labels || a.samples() != b.samples()) {
        throw Error("[ttest] condition files must have the same labels and row count");
      }
      std::vector<std::vector<std::string>> rows;
      for (Eigen::Index c = 0; c < a.nodes(); ++c) {
        const Eigen::VectorXd ca = a.values.col(c);
        const Eigen::VectorXd cb = b.values.col(c);
        const auto res = run_stage("ttest", [&] {
          return paired_ttest({ca.data(), static_cast<std::size_t>(ca.size())},
                              {cb.data(), static_cast<std::size_t>(cb.size())});
        });
        rows.push_back({a.labels[static_cast<std::size_t>(c)], detail::format_double(res.t), std::to_string(res.df),
                        detail::format_double(res.p_two_sided)});
      }
      const std::vector<std::string> header = {"measure", "t", "df", "p_two_sided"};
      if (ttest_out.empty()) {
        std::cout << "measure,t,df,p_two_sided\n";
        for (const auto& row : rows) {
          std::cout << row[0] << ',' << row[1] << ',' << row[2] << ',' << row[3] << '\n';
        }
      } else {
        write_table(ttest_out, header, rows);
      }
    } else if (run_cmd->parsed()) {
      const auto doc = run_pipeline(config);
      for (const auto& entry : doc["analyses"]) {
        std::cout << entry["name"].get<std::string>() << ": " << entry["windows"] << " windows, "
                  << entry["n_states"] << " states, Q = " << entry["modularity_q"] << '\n';
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
