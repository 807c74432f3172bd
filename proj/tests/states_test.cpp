#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "efgraph/states.hpp"
#include "efgraph/synth.hpp"
#include "oracles.hpp"

using namespace efgraph;

namespace {

DynamicGraphSeries from_graphs(const std::vector<Eigen::MatrixXd>& signed_weights) {
  DynamicGraphSeries dyn;
  for (std::size_t k = 0; k < signed_weights.size(); ++k) {
    CorrelationMatrix c;
    c.r = signed_weights[k];
    for (Eigen::Index i = 0; i < c.r.rows(); ++i) c.labels.push_back("n" + std::to_string(i));
    dyn.graphs.push_back(split_signed(c));
    const auto start = static_cast<Eigen::Index>(k);
    dyn.windows.push_back({start, start + 3});
  }
  return dyn;
}

WindowSimilarityMatrix two_cliques(int size) {
  WindowSimilarityMatrix sim;
  sim.s = Eigen::MatrixXd::Zero(2 * size, 2 * size);
  sim.s.topLeftCorner(size, size).setOnes();
  sim.s.bottomRightCorner(size, size).setOnes();
  return sim;
}

// Direct Newman modularity on A = max(s, 0) with zero diagonal.
double oracle_modularity(const Eigen::MatrixXd& s, const std::vector<int>& c) {
  const auto n = s.rows();
  Eigen::MatrixXd a = s.cwiseMax(0.0);
  a.diagonal().setZero();
  const Eigen::VectorXd k = a.rowwise().sum();
  const double two_m = a.sum();
  double q = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (c[i] == c[j]) q += a(i, j) - k(i) * k(j) / two_m;
  return q / two_m;
}

struct PlantedRun {
  SyntheticDataset data;
  DynamicGraphSeries dyn;
  std::vector<int> truth;
};

PlantedRun planted(std::uint64_t seed, Eigen::Index n, Eigen::Index dwell) {
  PlantedRun run;
  run.data = generate_dataset(planted_templates(n, 2), {{0, dwell}, {1, dwell}}, n / 2, n - n / 2, 0.1, seed);
  run.dyn = dynamic_graph_series(run.data.ts, {20, 1});
  run.truth = oracle::window_majority(run.data.true_labels, 20, 1);
  return run;
}

}  // namespace

TEST(Similarity, IdenticalWindowsGiveOnes) {
  std::mt19937_64 gen(1);
  const auto w = oracle::random_graph(gen, 5, 1.0, 1.0);
  const auto sim = window_similarity(from_graphs({w, w, w, w}), Sign::Positive);
  EXPECT_LT((sim.s - Eigen::MatrixXd::Ones(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Similarity, AntiCorrelatedStrengthVectors) {
  // Strengths (1.0, 0.8, 0.6) and (0.6, 0.8, 1.0) are exact negatives up to a shift.
  Eigen::MatrixXd a(3, 3), b(3, 3);
  a << 0, 0.6, 0.4, 0.6, 0, 0.2, 0.4, 0.2, 0;
  b << 0, 0.2, 0.4, 0.2, 0, 0.6, 0.4, 0.6, 0;
  const auto sim = window_similarity(from_graphs({a, b}), Sign::Positive);
  EXPECT_NEAR(sim.s(0, 1), -1.0, 1e-12);
}

TEST(Similarity, ScaleInvariant) {
  std::mt19937_64 gen(2);
  std::vector<Eigen::MatrixXd> graphs, scaled;
  for (int k = 0; k < 6; ++k) {
    graphs.push_back(oracle::random_graph(gen, 6, 1.0, 0.9));
    scaled.push_back(0.5 * graphs.back());
  }
  const auto a = window_similarity(from_graphs(graphs), Sign::Positive);
  const auto b = window_similarity(from_graphs(scaled), Sign::Positive);
  EXPECT_LT((a.s - b.s).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Similarity, ConstantStrengthVectorNamesWindow) {
  Eigen::MatrixXd flat = Eigen::MatrixXd::Ones(3, 3) - Eigen::MatrixXd::Identity(3, 3);
  Eigen::MatrixXd a(3, 3);
  a << 0, 0.6, 0.4, 0.6, 0, 0.2, 0.4, 0.2, 0;
  try {
    window_similarity(from_graphs({a, flat}), Sign::Positive);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("window 1"), std::string::npos) << e.what();
  }
}

TEST(Modularity, Identities) {
  const auto sim = two_cliques(4);
  EXPECT_NEAR(modularity_score(sim, std::vector<int>(8, 0)), 0.0, 1e-12);
  EXPECT_NEAR(modularity_score(sim, {0, 0, 0, 0, 1, 1, 1, 1}), 0.5, 1e-12);
  EXPECT_THROW(modularity_score(WindowSimilarityMatrix{Eigen::MatrixXd::Identity(3, 3)}, {0, 1, 2}), Error);
}

TEST(Modularity, MatchesOracleAndBoundedByOne) {
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> label(0, 3);
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Random(10, 10);
    s = 0.5 * (s + s.transpose()).eval();
    s.diagonal().setOnes();
    std::vector<int> c(10);
    for (auto& v : c) v = label(gen);
    const double q = modularity_score(WindowSimilarityMatrix{s}, c);
    EXPECT_NEAR(q, oracle_modularity(s, c), 1e-12);
    EXPECT_LE(q, 1.0);
  }
}

TEST(DetectStates, IdenticalWindowsGiveOneState) {
  const auto p = detect_states(WindowSimilarityMatrix{Eigen::MatrixXd::Ones(12, 12)}, 1.0, 5);
  EXPECT_EQ(p.n_states, 1);
  EXPECT_NEAR(p.modularity_q, 0.0, 1e-12);
}

TEST(DetectStates, SplitsDisconnectedCliques) {
  const auto p = detect_states(two_cliques(6), 1.0, 0);
  EXPECT_EQ(p.n_states, 2);
  EXPECT_NEAR(p.modularity_q, 0.5, 1e-12);
  EXPECT_EQ(p.assignment, (std::vector<int>{0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1}));
}

TEST(DetectStates, DeterministicForSeedAndNeverBelowSingleCommunity) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Random(30, 30);
    s = 0.5 * (s + s.transpose()).eval();
    const WindowSimilarityMatrix sim{s};
    const auto a = detect_states(sim, 1.0, 77);
    const auto b = detect_states(sim, 1.0, 77);
    EXPECT_EQ(a.assignment, b.assignment);
    EXPECT_EQ(a.modularity_q, b.modularity_q);
    EXPECT_GE(a.modularity_q, -1e-12);
    EXPECT_NEAR(a.modularity_q, oracle_modularity(s, a.assignment), 1e-12);
    // contiguous labels numbered by first appearance
    int next = 0;
    for (int c : a.assignment) {
      EXPECT_LE(c, next);
      if (c == next) ++next;
    }
    EXPECT_EQ(next, a.n_states);
  }
}

TEST(DetectStates, RecoversPlantedTemplates) {
  int passing = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto run = planted(seed, 20, 500);
    const auto sim = window_similarity(run.dyn, Sign::Positive);
    const auto p = detect_states(sim, 1.0, seed);
    if (p.n_states == 2 && oracle::adjusted_rand_index(p.assignment, run.truth) >= 0.9) ++passing;
  }
  EXPECT_GE(passing, 4);
}

TEST(DetectStates, WithinTemplateSimilarityExceedsBetween) {
  const auto run = planted(9, 12, 300);
  const auto sim = window_similarity(run.dyn, Sign::Positive);
  double within = 0, between = 0;
  int nw = 0, nb = 0;
  for (std::size_t a = 0; a < run.truth.size(); ++a)
    for (std::size_t b = a + 1; b < run.truth.size(); ++b) {
      if (run.truth[a] == run.truth[b]) {
        within += sim.s(a, b);
        ++nw;
      } else {
        between += sim.s(a, b);
        ++nb;
      }
    }
  EXPECT_GT(within / nw, between / nb);
}

TEST(StateGraphs, MeansAndInvariants) {
  std::mt19937_64 gen(6);
  std::vector<Eigen::MatrixXd> graphs;
  for (int k = 0; k < 6; ++k) {
    Eigen::MatrixXd r = oracle::random_graph(gen, 4, 1.0, 1.0) - oracle::random_graph(gen, 4, 0.5, 0.9);
    r = r.cwiseMax(-1.0).cwiseMin(1.0);
    r.diagonal().setOnes();
    graphs.push_back(r);
  }
  const auto dyn = from_graphs(graphs);
  const auto single = state_average_graphs(dyn, std::vector<int>(6, 0));
  ASSERT_EQ(single.size(), 1u);
  Eigen::MatrixXd mean_plus = Eigen::MatrixXd::Zero(4, 4);
  for (const auto& g : dyn.graphs) mean_plus += g.w_plus;
  mean_plus /= 6.0;
  EXPECT_LT((single[0].w_plus - mean_plus).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(single[0].members, 6);

  const std::vector<int> split = {0, 1, 0, 1, 1, 0};
  const std::vector<int> relabelled = {1, 0, 1, 0, 0, 1};
  const auto a = state_average_graphs(dyn, split);
  const auto b = state_average_graphs(dyn, relabelled);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].w_plus, b[1].w_plus);
  EXPECT_EQ(a[1].w_minus, b[0].w_minus);
  for (const auto& s : a) {
    EXPECT_GE(s.w_plus.minCoeff(), 0.0);
    EXPECT_GE(s.w_minus.minCoeff(), 0.0);
    EXPECT_EQ(s.w_plus, s.w_plus.transpose());
    EXPECT_EQ(s.w_minus, s.w_minus.transpose());
  }

  const auto same = state_average_graphs(from_graphs({graphs[0], graphs[0], graphs[0]}), {0, 0, 0});
  EXPECT_LT((same[0].w_plus - dyn.graphs[0].w_plus).cwiseAbs().maxCoeff(), 1e-15);

  EXPECT_THROW(state_average_graphs(dyn, {0, 1}), Error);
  EXPECT_THROW(state_average_graphs(dyn, {0, 2, 0, 2, 0, 0}), Error);
}

TEST(StateGraphs, ApproachTemplatesAtSmallN) {
  // Six nodes, 5000 samples per state.
  const auto templates = planted_templates(6, 2);
  const auto data = generate_dataset(templates, {{0, 5000}, {1, 5000}}, 3, 3, 0.1, 12);
  const auto dyn = dynamic_graph_series(data.ts, {20, 1});
  const auto truth = oracle::window_majority(data.true_labels, 20, 1);
  const auto graphs = state_average_graphs(dyn, truth);
  for (std::size_t s = 0; s < 2; ++s) {
    Eigen::MatrixXd target = templates[s].covariance;
    target.diagonal().setZero();
    const double distance = (graphs[s].w_plus - graphs[s].w_minus - target).norm();
    EXPECT_LE(distance, 0.15) << "state " << s;
  }
}
