#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "efgraph/error.hpp"
#include "efgraph/timeseries.hpp"

namespace efgraph {

struct CorrelationMatrix {
  Eigen::MatrixXd r;
  std::vector<std::string> labels;
};

/// Positive and negative halves of a correlation matrix. Both hold
/// non-negative weights, a pair lives in at most one of them, and the
/// diagonals are zero.
struct SignedWeightedGraph {
  Eigen::MatrixXd w_plus;
  Eigen::MatrixXd w_minus;
  std::vector<std::string> labels;

  Eigen::Index nodes() const { return w_plus.rows(); }
};

enum class Sign { Positive, Negative };

inline std::string_view to_string(Sign s) { return s == Sign::Positive ? "positive" : "negative"; }

inline Sign parse_sign(std::string_view s) {
  if (s == "positive" || s == "pos" || s == "+") return Sign::Positive;
  if (s == "negative" || s == "neg" || s == "-") return Sign::Negative;
  throw Error("unknown sign '" + std::string(s) + "' (expected positive or negative)");
}

inline const Eigen::MatrixXd& weights(const SignedWeightedGraph& g, Sign s) {
  return s == Sign::Positive ? g.w_plus : g.w_minus;
}

/// Pearson correlation between the columns of `rows` (samples x nodes).
/// Throws on a constant column, naming it through `labels`.
inline Eigen::MatrixXd pearson_columns(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                                       const std::vector<std::string>& labels) {
  const Eigen::Index samples = rows.rows();
  if (samples < 3) {
    throw Error("Pearson correlation needs at least 3 samples, got " + std::to_string(samples));
  }
  Eigen::MatrixXd centered = rows.rowwise() - rows.colwise().mean();
  for (Eigen::Index c = 0; c < centered.cols(); ++c) {
    const double spread = rows.col(c).maxCoeff() - rows.col(c).minCoeff();
    const double norm = centered.col(c).norm();
    if (spread == 0.0 || norm == 0.0) {
      throw Error("column '" + (c < static_cast<Eigen::Index>(labels.size()) ? labels[c] : std::to_string(c)) +
                  "' is constant; correlation undefined");
    }
    centered.col(c) /= norm;
  }
  Eigen::MatrixXd r = centered.transpose() * centered;
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    r(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < r.cols(); ++j) {
      const double v = std::clamp(0.5 * (r(i, j) + r(j, i)), -1.0, 1.0);
      r(i, j) = v;
      r(j, i) = v;
    }
  }
  return r;
}

inline CorrelationMatrix pearson_correlation_matrix(const TimeSeriesMatrix& ts) {
  ts.validate();
  return CorrelationMatrix{pearson_columns(ts.values, ts.labels), ts.labels};
}

/// w+ keeps r > 0, w- keeps |r| for r < 0; self-loops are excluded.
inline SignedWeightedGraph split_signed(const CorrelationMatrix& corr) {
  const Eigen::Index n = corr.r.rows();
  SignedWeightedGraph g;
  g.w_plus = corr.r.cwiseMax(0.0);
  g.w_minus = (-corr.r).cwiseMax(0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    g.w_plus(i, i) = 0.0;
    g.w_minus(i, i) = 0.0;
  }
  g.labels = corr.labels;
  return g;
}

/// Node-level values plus their mean.
struct NodeMetric {
  Eigen::VectorXd node;
  double net = 0.0;
};

inline NodeMetric connectivity_strength(const Eigen::MatrixXd& w) {
  NodeMetric m;
  m.node = w.rowwise().sum();
  m.net = w.rows() > 0 ? m.node.mean() : 0.0;
  return m;
}

enum class ClusteringDenominator {
  Strength,  // CS_i (CS_i - 1), the default
  Degree,    // k_i (k_i - 1) with k_i the neighbour count
};

inline constexpr double kClusteringEpsilon = 1e-12;

/// Weighted clustering coefficient
///   CC_i = sum_{j != k, both != i} (w_ij w_ik w_jk)^(1/3) / (D_i (D_i - 1))
/// where D_i is the node strength by default. Nodes with fewer than two
/// neighbours or D_i (D_i - 1) <= 1e-12 get 0. With the strength
/// denominator values above 1 occur whenever 1 < CS_i < 2.
inline NodeMetric clustering_coefficient(const Eigen::MatrixXd& w,
                                         ClusteringDenominator denominator = ClusteringDenominator::Strength) {
  const Eigen::Index n = w.rows();
  const Eigen::MatrixXd root = w.unaryExpr([](double v) { return std::cbrt(v); });
  NodeMetric m;
  m.node = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<Eigen::Index> neighbours;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i && w(i, j) > 0.0) {
        neighbours.push_back(j);
      }
    }
    if (neighbours.size() < 2) {
      continue;
    }
    const double d = denominator == ClusteringDenominator::Strength ? w.row(i).sum()
                                                                    : static_cast<double>(neighbours.size());
    const double scale = d * (d - 1.0);
    if (scale <= kClusteringEpsilon) {
      continue;
    }
    double numerator = 0.0;
    for (auto j : neighbours) {
      for (auto k : neighbours) {
        if (j != k) {
          numerator += root(i, j) * root(i, k) * root(j, k);
        }
      }
    }
    m.node(i) = numerator / scale;
  }
  m.net = n > 0 ? m.node.mean() : 0.0;
  return m;
}

/// Weighted shortest-path lengths from `source` with edge length 1/w_ij.
/// Unreachable nodes get +inf.
inline std::vector<double> shortest_path_lengths(const Eigen::MatrixXd& w, Eigen::Index source) {
  const auto n = static_cast<std::size_t>(w.rows());
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<bool> done(n, false);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[static_cast<std::size_t>(source)] = 0.0;
  queue.emplace(0.0, static_cast<std::size_t>(source));
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (done[u]) {
      continue;
    }
    done[u] = true;
    for (std::size_t v = 0; v < n; ++v) {
      const double weight = w(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
      if (v == u || !(weight > 0.0) || done[v]) {
        continue;
      }
      const double candidate = d + 1.0 / weight;
      if (candidate < dist[v]) {
        dist[v] = candidate;
        queue.emplace(candidate, v);
      }
    }
  }
  return dist;
}

/// GE_i = mean over j != i of 1/d_ij, with unreachable pairs contributing 0.
inline NodeMetric global_efficiency(const Eigen::MatrixXd& w) {
  const Eigen::Index n = w.rows();
  NodeMetric m;
  m.node = Eigen::VectorXd::Zero(n);
  if (n < 2) {
    m.net = 0.0;
    return m;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto dist = shortest_path_lengths(w, i);
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i && std::isfinite(dist[static_cast<std::size_t>(j)])) {
        sum += 1.0 / dist[static_cast<std::size_t>(j)];
      }
    }
    m.node(i) = sum / static_cast<double>(n - 1);
  }
  m.net = m.node.mean();
  return m;
}

struct GraphMetricSet {
  Eigen::VectorXd cs_node;
  double cs_net = 0.0;
  Eigen::VectorXd cc_node;
  double cc_net = 0.0;
  Eigen::VectorXd ge_node;
  double ge_net = 0.0;
};

inline GraphMetricSet graph_metrics(const Eigen::MatrixXd& w,
                                    ClusteringDenominator denominator = ClusteringDenominator::Strength) {
  GraphMetricSet s;
  auto cs = connectivity_strength(w);
  auto cc = clustering_coefficient(w, denominator);
  auto ge = global_efficiency(w);
  s.cs_node = std::move(cs.node);
  s.cs_net = cs.net;
  s.cc_node = std::move(cc.node);
  s.cc_net = cc.net;
  s.ge_node = std::move(ge.node);
  s.ge_net = ge.net;
  return s;
}

}  // namespace efgraph
