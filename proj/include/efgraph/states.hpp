#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "efgraph/dynamics.hpp"
#include "efgraph/error.hpp"
#include "efgraph/graph.hpp"
#include "efgraph/rng.hpp"

namespace efgraph {

/// Pearson correlation between the node-strength vectors of every pair of
/// windows (M x M).
struct WindowSimilarityMatrix {
  Eigen::MatrixXd s;

  Eigen::Index windows() const { return s.rows(); }
};

/// Row k holds the node strengths of window k on the chosen weights.
inline Eigen::MatrixXd strength_vectors(const DynamicGraphSeries& dyn, Sign sign) {
  const auto m = static_cast<Eigen::Index>(dyn.size());
  const Eigen::Index n = m > 0 ? dyn.graphs.front().nodes() : 0;
  Eigen::MatrixXd strengths(m, n);
  for (Eigen::Index k = 0; k < m; ++k) {
    strengths.row(k) = weights(dyn.graphs[static_cast<std::size_t>(k)], sign).rowwise().sum().transpose();
  }
  return strengths;
}

inline WindowSimilarityMatrix window_similarity(const DynamicGraphSeries& dyn, Sign sign) {
  if (dyn.size() < 2) {
    throw Error("window similarity needs at least 2 windows, got " + std::to_string(dyn.size()));
  }
  if (dyn.graphs.front().nodes() < 3) {
    throw Error("window similarity needs at least 3 nodes");
  }
  const Eigen::MatrixXd strengths = strength_vectors(dyn, sign);
  std::vector<std::string> names;
  names.reserve(dyn.size());
  for (std::size_t k = 0; k < dyn.size(); ++k) {
    names.push_back("window " + std::to_string(k));
  }
  try {
    return WindowSimilarityMatrix{pearson_columns(strengths.transpose(), names)};
  } catch (const Error& e) {
    throw Error(std::string("strength vector of ") + e.what());
  }
}

namespace detail {

// Non-negative similarity with zero diagonal, the graph that modularity and
// state detection operate on.
inline Eigen::MatrixXd clipped_adjacency(const Eigen::MatrixXd& s) {
  Eigen::MatrixXd a = s.cwiseMax(0.0);
  a.diagonal().setZero();
  return a;
}

inline double modularity_of(const Eigen::MatrixXd& a, const std::vector<int>& community, double resolution) {
  const double total = a.sum();
  if (!(total > 0.0)) {
    throw Error("modularity undefined: the clipped similarity graph has no positive weight");
  }
  const Eigen::VectorXd degree = a.rowwise().sum();
  const int count = community.empty() ? 0 : *std::max_element(community.begin(), community.end()) + 1;
  std::vector<double> internal(static_cast<std::size_t>(count), 0.0);
  std::vector<double> tot(static_cast<std::size_t>(count), 0.0);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const auto ci = static_cast<std::size_t>(community[static_cast<std::size_t>(i)]);
    tot[ci] += degree(i);
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (community[static_cast<std::size_t>(j)] == community[static_cast<std::size_t>(i)]) {
        internal[ci] += a(i, j);
      }
    }
  }
  double q = 0.0;
  for (std::size_t c = 0; c < internal.size(); ++c) {
    q += internal[c] / total - resolution * (tot[c] / total) * (tot[c] / total);
  }
  return q;
}

// Renumbers labels to 0.. in order of first appearance.
inline int compact_labels(std::vector<int>& labels) {
  std::vector<int> mapping;
  int next = 0;
  for (int& l : labels) {
    if (l >= static_cast<int>(mapping.size())) {
      mapping.resize(static_cast<std::size_t>(l) + 1, -1);
    }
    if (mapping[static_cast<std::size_t>(l)] < 0) {
      mapping[static_cast<std::size_t>(l)] = next++;
    }
    l = mapping[static_cast<std::size_t>(l)];
  }
  return next;
}

inline constexpr double kMinModularityGain = 1e-10;

// Local-moving phase on a weighted graph with self-loops. Returns true if
// any node changed community.
inline bool louvain_local_moves(const Eigen::MatrixXd& a, double resolution, SeededRng& rng,
                                std::vector<int>& community) {
  const Eigen::Index n = a.rows();
  const Eigen::VectorXd degree = a.rowwise().sum();
  const double total = degree.sum();
  std::vector<double> tot(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    tot[static_cast<std::size_t>(community[static_cast<std::size_t>(i)])] += degree(i);
  }

  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> link(static_cast<std::size_t>(n), 0.0);
  std::vector<int> touched;

  bool moved_any = false;
  for (;;) {
    rng.shuffle(order);
    bool moved = false;
    for (std::size_t node : order) {
      const auto i = static_cast<Eigen::Index>(node);
      const int own = community[node];
      const double ki = degree(i);

      touched.clear();
      touched.push_back(own);
      link[static_cast<std::size_t>(own)] = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i || !(a(i, j) > 0.0)) {
          continue;
        }
        const int c = community[static_cast<std::size_t>(j)];
        if (std::find(touched.begin(), touched.end(), c) == touched.end()) {
          touched.push_back(c);
          link[static_cast<std::size_t>(c)] = 0.0;
        }
        link[static_cast<std::size_t>(c)] += a(i, j);
      }

      tot[static_cast<std::size_t>(own)] -= ki;
      auto gain = [&](int c) {
        return link[static_cast<std::size_t>(c)] - resolution * tot[static_cast<std::size_t>(c)] * ki / total;
      };
      std::sort(touched.begin(), touched.end());
      int best = touched.front();
      double best_gain = gain(best);
      for (int c : touched) {
        if (gain(c) > best_gain) {
          best = c;
          best_gain = gain(c);
        }
      }
      // Q changes by 2 (gain(best) - gain(own)) / total.
      if (best != own && 2.0 * (best_gain - gain(own)) / total > kMinModularityGain) {
        community[node] = best;
        moved = true;
      }
      tot[static_cast<std::size_t>(community[node])] += ki;
    }
    if (!moved) {
      break;
    }
    moved_any = true;
  }
  return moved_any;
}

}  // namespace detail

/// Newman modularity of `assignment` on max(s, 0) with zero diagonal.
inline double modularity_score(const WindowSimilarityMatrix& sim, const std::vector<int>& assignment,
                               double resolution = 1.0) {
  if (static_cast<Eigen::Index>(assignment.size()) != sim.windows()) {
    throw Error("assignment has " + std::to_string(assignment.size()) + " entries for " +
                std::to_string(sim.windows()) + " windows");
  }
  for (int c : assignment) {
    if (c < 0) {
      throw Error("state indices must be non-negative");
    }
  }
  return detail::modularity_of(detail::clipped_adjacency(sim.s), assignment, resolution);
}

/// Averaged graph of the windows in one state. Unlike a single-window graph,
/// a pair may carry both positive and negative weight.
struct StateGraph {
  Eigen::MatrixXd w_plus;
  Eigen::MatrixXd w_minus;
  std::vector<std::string> labels;
  std::size_t members = 0;
};

struct StatePartition {
  std::vector<int> assignment;  // per window, 0-based and contiguous
  int n_states = 0;
  double modularity_q = 0.0;
  std::vector<StateGraph> state_graphs;
};

/// Seeded multi-level greedy modularity maximisation (Louvain scheme).
///
/// Nodes are visited in an order drawn from the seed and moved to the
/// neighbouring community with the largest gain when it raises Q by more
/// than 1e-10; equal gains go to the lowest community index. Communities are
/// then collapsed into weighted nodes and the process repeats until a level
/// makes no move. States are numbered by first appearance in window order.
inline StatePartition detect_states(const WindowSimilarityMatrix& sim, double resolution = 1.0,
                                    std::uint64_t seed = 0) {
  const Eigen::MatrixXd base = detail::clipped_adjacency(sim.s);
  if (!(base.sum() > 0.0)) {
    throw Error("modularity undefined: the clipped similarity graph has no positive weight");
  }
  SeededRng rng(seed);

  const Eigen::Index m = base.rows();
  std::vector<int> assignment(static_cast<std::size_t>(m));
  std::iota(assignment.begin(), assignment.end(), 0);

  Eigen::MatrixXd level = base;
  for (;;) {
    std::vector<int> community(static_cast<std::size_t>(level.rows()));
    std::iota(community.begin(), community.end(), 0);
    if (!detail::louvain_local_moves(level, resolution, rng, community)) {
      break;
    }
    const int count = detail::compact_labels(community);
    for (int& a : assignment) {
      a = community[static_cast<std::size_t>(a)];
    }
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(count, count);
    for (Eigen::Index i = 0; i < level.rows(); ++i) {
      for (Eigen::Index j = 0; j < level.cols(); ++j) {
        next(community[static_cast<std::size_t>(i)], community[static_cast<std::size_t>(j)]) += level(i, j);
      }
    }
    level = std::move(next);
    if (count == 1) {
      break;
    }
  }

  StatePartition out;
  out.assignment = std::move(assignment);
  out.n_states = detail::compact_labels(out.assignment);
  out.modularity_q = detail::modularity_of(base, out.assignment, resolution);
  return out;
}

/// Elementwise mean of w+ and, separately, w- over each state's windows.
inline std::vector<StateGraph> state_average_graphs(const DynamicGraphSeries& dyn, const std::vector<int>& assignment) {
  if (assignment.size() != dyn.size()) {
    throw Error("assignment has " + std::to_string(assignment.size()) + " entries for " +
                std::to_string(dyn.size()) + " windows");
  }
  if (dyn.size() == 0) {
    return {};
  }
  int count = 0;
  for (int c : assignment) {
    if (c < 0) {
      throw Error("state indices must be non-negative");
    }
    count = std::max(count, c + 1);
  }
  const Eigen::Index n = dyn.graphs.front().nodes();
  std::vector<StateGraph> states(static_cast<std::size_t>(count));
  for (auto& s : states) {
    s.w_plus = Eigen::MatrixXd::Zero(n, n);
    s.w_minus = Eigen::MatrixXd::Zero(n, n);
    s.labels = dyn.graphs.front().labels;
  }
  for (std::size_t k = 0; k < dyn.size(); ++k) {
    auto& s = states[static_cast<std::size_t>(assignment[k])];
    s.w_plus += dyn.graphs[k].w_plus;
    s.w_minus += dyn.graphs[k].w_minus;
    ++s.members;
  }
  for (std::size_t c = 0; c < states.size(); ++c) {
    if (states[c].members == 0) {
      throw Error("state " + std::to_string(c) + " has no windows");
    }
    states[c].w_plus /= static_cast<double>(states[c].members);
    states[c].w_minus /= static_cast<double>(states[c].members);
  }
  return states;
}

}  // namespace efgraph
