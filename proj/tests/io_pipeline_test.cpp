#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "efgraph/io.hpp"
#include "efgraph/pipeline.hpp"
#include "efgraph/synth.hpp"

using namespace efgraph;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("efgraph_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

SyntheticDataset two_state_fixture(std::uint64_t seed, Eigen::Index dwell = 128) {
  return generate_dataset(planted_templates(12, 2), {{0, dwell}, {1, dwell}}, 6, 6, 0.1, seed);
}

PipelineConfig quick_config(const fs::path& input, const fs::path& out) {
  PipelineConfig c;
  c.input = input.string();
  c.output_dir = out.string();
  c.bandpass = false;
  c.seed = 3;
  return c;
}

int run_cli(const std::string& args) {
  const std::string command = std::string(EFGRAPH_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(MatrixFile, RoundTripIsExact) {
  const auto dir = scratch("roundtrip");
  const auto data = two_state_fixture(1, 20);
  write_matrix_file(dir / "m.csv", data.ts);
  const auto back = read_matrix_file(dir / "m.csv");
  EXPECT_EQ(back.values, data.ts.values);
  EXPECT_EQ(back.labels, data.ts.labels);
  EXPECT_EQ(back.modalities, data.ts.modalities);
  EXPECT_EQ(back.dt, data.ts.dt);
}

TEST(MatrixFile, HeaderExample) {
  const auto dir = scratch("header");
  write_text(dir / "m.csv", "time,Fz:EEG,IC01:FMRI\n0,1.5,2\n2,3,-4e-1\n4,5,6\n");
  const auto ts = read_matrix_file(dir / "m.csv");
  EXPECT_EQ(ts.labels, (std::vector<std::string>{"Fz", "IC01"}));
  EXPECT_EQ(ts.modalities, (std::vector<Modality>{Modality::Eeg, Modality::Fmri}));
  EXPECT_EQ(ts.dt, 2.0);
  EXPECT_EQ(ts.values(1, 1), -0.4);
  EXPECT_EQ(ts.samples(), 3);
}

TEST(MatrixFile, ErrorsNameFileAndLine) {
  const auto dir = scratch("errors");
  auto expect_error = [&](const std::string& text, const std::string& needle) {
    write_text(dir / "bad.csv", text);
    try {
      read_matrix_file(dir / "bad.csv");
      ADD_FAILURE() << "no error for: " << text;
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_error("time,a:EEG,b:FMRI\n0,1,2\n2,3\n", "bad.csv:3:");
  expect_error("time,a:EEG,a:FMRI\n0,1,2\n2,3,4\n", "duplicate label 'a'");
  expect_error("time,a:XYZ\n0,1\n2,3\n", "bad.csv:1:");
  expect_error("time,a:EEG\n0,1\n2,abc\n", "bad.csv:3:");
  expect_error("time,a:EEG\n0,1\n0,2\n", "strictly increasing");
  expect_error("time,a:EEG\n0,1\n", "2 data rows");
  EXPECT_THROW(read_matrix_file(dir / "missing.csv"), Error);
}

TEST(LabelsFile, RoundTrip) {
  const auto dir = scratch("labels");
  write_labels_file(dir / "l.txt", {0, 0, 1, 2, 1});
  EXPECT_EQ(read_labels_file(dir / "l.txt"), (std::vector<int>{0, 0, 1, 2, 1}));
}

TEST(Config, BandSpecs) {
  const auto alpha = parse_band("alpha");
  EXPECT_EQ(alpha.lo, 8.0);
  EXPECT_EQ(alpha.hi, 12.0);
  const auto custom = parse_band("mu:9:11");
  EXPECT_EQ(custom.name, "mu");
  EXPECT_EQ(custom.lo, 9.0);
  EXPECT_THROW(parse_band("nope"), Error);
  EXPECT_THROW(parse_band("x:5:3"), Error);
}

TEST(Preprocess, StageNameInErrors) {
  TimeSeriesMatrix ts;
  ts.values = Eigen::MatrixXd::Random(4, 2);
  ts.labels = {"a", "b"};
  ts.modalities = {Modality::Eeg, Modality::Fmri};
  ts.dt = 2.0;
  PreprocessOptions opt;
  try {
    preprocess(ts, opt, nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("[detrend] ", 0), 0u) << e.what();
  }
}

TEST(Pipeline, EndToEndReports) {
  const auto dir = scratch("pipeline");
  const auto data = two_state_fixture(7);
  write_matrix_file(dir / "in.csv", data.ts);
  const auto summary = run_pipeline(quick_config(dir / "in.csv", dir / "out"));

  EXPECT_EQ(summary["schema"], "efgraph-summary");
  EXPECT_EQ(summary["schema_version"], kSummarySchemaVersion);
  ASSERT_EQ(summary["analyses"].size(), 1u);
  const auto& a = summary["analyses"][0];
  EXPECT_EQ(a["samples"], 256);
  EXPECT_EQ(a["nodes"], 12);
  EXPECT_EQ(a["windows"], 237);
  EXPECT_EQ(a["n_states"], 2);
  for (const char* key : {"static", "dynamic_mean", "temporal", "state_sizes", "modularity_q", "warnings"}) {
    EXPECT_TRUE(a.contains(key)) << key;
  }
  EXPECT_EQ(summary["config"]["window-length"], "20");

  const fs::path out = dir / "out";
  const auto on_disk = nlohmann::json::parse(read_text(out / "summary.json"));
  EXPECT_EQ(on_disk["analyses"][0]["n_states"], 2);
  for (const char* name : {"preprocessed.csv", "static_correlation.csv", "static_w_plus.csv", "static_w_minus.csv",
                           "dynamic_cs_positive.csv", "dynamic_ge_negative.csv", "dynamic_global.csv",
                           "similarity.csv", "state_0_w_plus.csv", "state_1_w_minus.csv"}) {
    const auto m = read_matrix_file(out / name);
    EXPECT_GT(m.samples(), 1) << name;
  }
  EXPECT_EQ(read_matrix_file(out / "dynamic_cs_positive.csv").samples(), 237);
  EXPECT_EQ(read_labels_file(out / "states.txt").size(), 237u);
  EXPECT_TRUE(fs::exists(out / "static_metrics.csv"));
  EXPECT_TRUE(fs::exists(out / "temporal_metrics.csv"));
  EXPECT_TRUE(fs::exists(out / "run_config.toml"));
}

TEST(Pipeline, DeterministicAcrossRunsAndThreads) {
  const auto dir = scratch("determinism");
  write_matrix_file(dir / "in.csv", two_state_fixture(11).ts);
  auto c1 = quick_config(dir / "in.csv", dir / "a");
  auto c2 = quick_config(dir / "in.csv", dir / "b");
  c2.threads = 3;
  run_pipeline(c1);
  run_pipeline(c2);
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const auto name = entry.path().filename();
    if (name == "summary.json" || name == "run_config.toml") continue;
    EXPECT_EQ(read_text(entry.path()), read_text(dir / "b" / name)) << name;
    ++compared;
  }
  EXPECT_GT(compared, 10u);
}

TEST(Pipeline, SeparateEegAndFmriInputsWithLabels) {
  const auto dir = scratch("split_inputs");
  const auto data = two_state_fixture(5);
  TimeSeriesMatrix eeg = data.ts, fmri = data.ts;
  eeg.values = data.ts.values.leftCols(6);
  eeg.labels.resize(6);
  eeg.modalities.resize(6);
  fmri.values = data.ts.values.rightCols(6);
  fmri.labels.assign(data.ts.labels.begin() + 6, data.ts.labels.end());
  fmri.modalities.assign(data.ts.modalities.begin() + 6, data.ts.modalities.end());
  write_matrix_file(dir / "eeg.csv", eeg);
  write_matrix_file(dir / "fmri.csv", fmri);
  std::string names;
  for (int i = 0; i < 12; ++i) names += "node" + std::to_string(i) + "\n";
  write_text(dir / "names.txt", names);

  PipelineConfig c = quick_config("", dir / "out");
  c.input.clear();
  c.eeg = (dir / "eeg.csv").string();
  c.fmri = (dir / "fmri.csv").string();
  c.labels = (dir / "names.txt").string();
  c.hrf = false;
  Warnings w;
  const auto inputs = assemble_inputs(c, &w);
  ASSERT_EQ(inputs.size(), 1u);
  EXPECT_EQ(inputs[0].second.values, data.ts.values);
  EXPECT_EQ(inputs[0].second.labels[11], "node11");
  EXPECT_EQ(inputs[0].second.modalities[0], Modality::Eeg);
  EXPECT_EQ(inputs[0].second.modalities[11], Modality::Fmri);

  c.input = (dir / "eeg.csv").string();
  EXPECT_THROW(assemble_inputs(c), Error);
}

TEST(Pipeline, RawEegOneAnalysisPerBand) {
  const auto dir = scratch("raw_eeg");
  // 2 channels at 100 Hz over 64 TRs of 2 s.
  TimeSeriesMatrix raw;
  raw.values.resize(100 * 128, 2);
  for (Eigen::Index t = 0; t < raw.values.rows(); ++t) {
    const double s = t / 100.0;
    raw.values(t, 0) = std::sin(2 * M_PI * 10 * s) * (1 + 0.5 * std::sin(2 * M_PI * 0.02 * s)) + 0.1 * std::sin(2 * M_PI * 20 * s + t % 7);
    raw.values(t, 1) = std::sin(2 * M_PI * 6 * s) * (1 + 0.5 * std::cos(2 * M_PI * 0.03 * s)) + 0.1 * std::sin(2 * M_PI * 11 * s + t % 5);
  }
  raw.labels = {"Fz", "Pz"};
  raw.modalities = {Modality::Eeg, Modality::Eeg};
  raw.dt = 0.01;
  write_matrix_file(dir / "raw.csv", raw);
  const auto fmri = generate_dataset(planted_templates(4, 1), {{0, 64}}, 0, 4, 0.1, 2).ts;
  write_matrix_file(dir / "fmri.csv", fmri);

  PipelineConfig c;
  c.raw_eeg = (dir / "raw.csv").string();
  c.fmri = (dir / "fmri.csv").string();
  c.bands = {"theta", "alpha"};
  const auto inputs = assemble_inputs(c);
  ASSERT_EQ(inputs.size(), 2u);
  EXPECT_EQ(inputs[0].first, "theta");
  EXPECT_EQ(inputs[1].first, "alpha");
  EXPECT_EQ(inputs[0].second.samples(), 64);
  EXPECT_EQ(inputs[0].second.nodes(), 6);
}

TEST(Cli, SynthThenRunWithConfigFile) {
  const auto dir = scratch("cli");
  const auto in = dir / "in.csv";
  ASSERT_EQ(run_cli("synth --seed 4 --n-eeg 4 --n-fmri 4 --dwell 0:128,1:128 --out " + in.string()), 0);
  EXPECT_EQ(read_matrix_file(in).samples(), 256);
  EXPECT_EQ(read_labels_file(in.string() + ".labels").size(), 256u);

  write_text(dir / "run.toml", "[run]\ninput = \"" + in.string() + "\"\noutput-dir = \"" + (dir / "out").string() +
                                   "\"\nbandpass = false\nwindow-length = 30\nseed = 2\n");
  ASSERT_EQ(run_cli("run --config " + (dir / "run.toml").string()), 0);
  const auto summary = nlohmann::json::parse(read_text(dir / "out" / "summary.json"));
  EXPECT_EQ(summary["config"]["window-length"], "30");
  EXPECT_EQ(summary["config"]["bandpass"], "false");
  EXPECT_EQ(summary["analyses"][0]["windows"], 227);

  // The echoed config reproduces the run.
  ASSERT_EQ(run_cli("run --config " + (dir / "out" / "run_config.toml").string() + " --output-dir " +
                    (dir / "again").string()),
            0);
  EXPECT_EQ(read_text(dir / "out" / "states.txt"), read_text(dir / "again" / "states.txt"));
  EXPECT_EQ(read_text(dir / "out" / "dynamic_global.csv"), read_text(dir / "again" / "dynamic_global.csv"));
}

TEST(Cli, StagesAndErrors) {
  const auto dir = scratch("cli_stages");
  const auto in = dir / "in.csv";
  ASSERT_EQ(run_cli("synth --seed 1 --n-eeg 3 --n-fmri 3 --dwell 0:60,1:60 --out " + in.string()), 0);
  ASSERT_EQ(run_cli("preprocess --input " + in.string() + " --out " + (dir / "pre.csv").string()), 0);
  ASSERT_EQ(run_cli("static --input " + (dir / "pre.csv").string() + " --output-dir " + (dir / "s").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "s" / "static_metrics.csv"));
  ASSERT_EQ(run_cli("dynamic --input " + (dir / "pre.csv").string() + " --output-dir " + (dir / "d").string()), 0);
  EXPECT_EQ(read_matrix_file(dir / "d" / "dynamic_global.csv").samples(), 101);
  ASSERT_EQ(run_cli("states --seed 0 --input " + (dir / "pre.csv").string() + " --output-dir " + (dir / "st").string()), 0);
  EXPECT_EQ(read_labels_file(dir / "st" / "states.txt").size(), 101u);
  ASSERT_EQ(run_cli("ttest --a " + in.string() + " --b " + (dir / "pre.csv").string() + " --out " +
                    (dir / "t.csv").string()),
            0);
  EXPECT_NE(read_text(dir / "t.csv").find("p_two_sided"), std::string::npos);

  EXPECT_EQ(run_cli("states --input " + in.string()), 106);  // CLI11: required option missing
  EXPECT_EQ(run_cli("static --input " + (dir / "missing.csv").string()), 1);
}
