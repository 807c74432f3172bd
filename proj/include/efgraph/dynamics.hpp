#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "efgraph/error.hpp"
#include "efgraph/graph.hpp"
#include "efgraph/parallel.hpp"
#include "efgraph/timeseries.hpp"

namespace efgraph {

struct WindowSpec {
  int length_tr = 20;
  int step_tr = 1;

  void validate() const {
    if (length_tr < 3) {
      throw Error("window length must be at least 3 samples, got " + std::to_string(length_tr));
    }
    if (step_tr < 1) {
      throw Error("window step must be at least 1 sample, got " + std::to_string(step_tr));
    }
  }
};

/// Half-open row range [start, end).
struct Window {
  Eigen::Index start = 0;
  Eigen::Index end = 0;

  Eigen::Index length() const { return end - start; }
  bool operator==(const Window&) const = default;
};

/// [k step, k step + L) for k = 0 .. floor((T - L) / step).
inline std::vector<Window> make_windows(Eigen::Index samples, const WindowSpec& spec) {
  spec.validate();
  if (samples < spec.length_tr) {
    throw Error("series of " + std::to_string(samples) + " samples is shorter than the window length " +
                std::to_string(spec.length_tr));
  }
  const Eigen::Index count = (samples - spec.length_tr) / spec.step_tr + 1;
  std::vector<Window> windows;
  windows.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index k = 0; k < count; ++k) {
    windows.push_back({k * spec.step_tr, k * spec.step_tr + spec.length_tr});
  }
  return windows;
}

struct DynamicGraphSeries {
  std::vector<Window> windows;
  std::vector<SignedWeightedGraph> graphs;
  double dt = 1.0;  // seconds between consecutive window starts

  std::size_t size() const { return graphs.size(); }
};

/// One signed graph per sliding window, in window order.
inline DynamicGraphSeries dynamic_graph_series(const TimeSeriesMatrix& ts, const WindowSpec& spec,
                                               unsigned threads = 1) {
  ts.validate();
  DynamicGraphSeries dyn;
  dyn.windows = make_windows(ts.samples(), spec);
  dyn.dt = ts.dt * spec.step_tr;
  dyn.graphs.resize(dyn.windows.size());
  detail::parallel_for(dyn.windows.size(), threads, [&](std::size_t k) {
    const Window& w = dyn.windows[k];
    try {
      CorrelationMatrix corr{pearson_columns(ts.values.middleRows(w.start, w.length()), ts.labels), ts.labels};
      dyn.graphs[k] = split_signed(corr);
    } catch (const Error& e) {
      throw Error("window " + std::to_string(k) + " [" + std::to_string(w.start) + ", " + std::to_string(w.end) +
                  "): " + e.what());
    }
  });
  return dyn;
}

enum class Metric { CS, CC, GE };

inline std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::CS:
      return "CS";
    case Metric::CC:
      return "CC";
    case Metric::GE:
      return "GE";
  }
  return "?";
}

inline NodeMetric compute_metric(const Eigen::MatrixXd& w, Metric metric,
                                 ClusteringDenominator denominator = ClusteringDenominator::Strength) {
  switch (metric) {
    case Metric::CS:
      return connectivity_strength(w);
    case Metric::CC:
      return clustering_coefficient(w, denominator);
    case Metric::GE:
      return global_efficiency(w);
  }
  throw Error("unknown metric");
}

/// Per-window metric values: `node` is windows x N, `global` the per-window mean.
struct MetricSeries {
  Eigen::MatrixXd node;
  Eigen::VectorXd global;
};

inline MetricSeries metric_series(const DynamicGraphSeries& dyn, Metric metric, Sign sign,
                                  ClusteringDenominator denominator = ClusteringDenominator::Strength,
                                  unsigned threads = 1) {
  const auto windows = static_cast<Eigen::Index>(dyn.size());
  const Eigen::Index n = windows > 0 ? dyn.graphs.front().nodes() : 0;
  MetricSeries out;
  out.node.resize(windows, n);
  out.global.resize(windows);
  detail::parallel_for(dyn.size(), threads, [&](std::size_t k) {
    const auto m = compute_metric(weights(dyn.graphs[k], sign), metric, denominator);
    out.node.row(static_cast<Eigen::Index>(k)) = m.node.transpose();
    out.global(static_cast<Eigen::Index>(k)) = m.net;
  });
  return out;
}

/// Sample variance (divisor n - 1).
inline double temporal_variance(std::span<const double> series) {
  if (series.size() < 2) {
    throw Error("variance needs at least 2 values, got " + std::to_string(series.size()));
  }
  double mean = 0.0;
  for (double v : series) {
    mean += v;
  }
  mean /= static_cast<double>(series.size());
  double ss = 0.0;
  for (double v : series) {
    ss += (v - mean) * (v - mean);
  }
  return ss / static_cast<double>(series.size() - 1);
}

/// Low-frequency fluctuation amplitude of a demeaned series: the sum of
/// single-sided DFT amplitudes 2|X_k|/n over bins with f_lo < f_k <= f_hi.
/// A bin-aligned unit sinusoid inside the band scores 1.
inline double low_freq_amplitude(std::span<const double> series, double dt, double f_lo = 0.0,
                                 double f_hi = 0.025) {
  const std::size_t n = series.size();
  if (n < 8) {
    throw Error("fluctuation amplitude needs at least 8 values, got " + std::to_string(n));
  }
  if (!(dt > 0.0)) {
    throw Error("fluctuation amplitude needs a positive sampling interval");
  }
  if (!(f_hi < 0.5 / dt)) {
    std::ostringstream msg;
    msg << "upper frequency " << f_hi << " Hz is not below the Nyquist frequency " << 0.5 / dt << " Hz";
    throw Error(msg.str());
  }
  const double resolution = 1.0 / (static_cast<double>(n) * dt);
  std::vector<std::size_t> bins;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    const double f = static_cast<double>(k) * resolution;
    if (f > f_lo && f <= f_hi + 1e-12 * resolution) {
      bins.push_back(k);
    }
  }
  if (bins.empty()) {
    std::ostringstream msg;
    msg << "no frequency bins in (" << f_lo << ", " << f_hi << "] Hz at resolution " << resolution << " Hz ("
        << n << " values, dt " << dt << " s)";
    throw Error(msg.str());
  }

  double mean = 0.0;
  for (double v : series) {
    mean += v;
  }
  mean /= static_cast<double>(n);

  double total = 0.0;
  for (std::size_t k : bins) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t t = 0; t < n; ++t) {
      const double phase = -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
      acc += (series[t] - mean) * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    total += 2.0 * std::abs(acc) / static_cast<double>(n);
  }
  return total;
}

}  // namespace efgraph
