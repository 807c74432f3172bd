#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "efgraph/error.hpp"
#include "efgraph/filter.hpp"

namespace efgraph {

// Column tag. Eeg and Fmri mark graph nodes; Derived marks report columns
// that are not nodes (window indices in a similarity matrix, global series).
enum class Modality { Eeg, Fmri, Derived };

inline std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::Eeg:
      return "EEG";
    case Modality::Fmri:
      return "FMRI";
    case Modality::Derived:
      return "DERIVED";
  }
  return "?";
}

inline Modality parse_modality(std::string_view tag) {
  if (tag == "EEG") return Modality::Eeg;
  if (tag == "FMRI") return Modality::Fmri;
  if (tag == "DERIVED") return Modality::Derived;
  throw Error("unknown modality tag '" + std::string(tag) + "' (expected EEG, FMRI or DERIVED)");
}

/// T x N real matrix of node time courses: rows are samples, columns nodes.
struct TimeSeriesMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> labels;
  std::vector<Modality> modalities;
  double dt = 1.0;  // seconds between rows

  Eigen::Index samples() const { return values.rows(); }
  Eigen::Index nodes() const { return values.cols(); }

  void validate() const {
    if (values.rows() < 2) {
      throw Error("time series needs at least 2 samples, got " + std::to_string(values.rows()));
    }
    if (values.cols() < 1) {
      throw Error("time series needs at least 1 column");
    }
    if (static_cast<Eigen::Index>(labels.size()) != values.cols()) {
      throw Error("time series has " + std::to_string(values.cols()) + " columns but " +
                  std::to_string(labels.size()) + " labels");
    }
    if (modalities.size() != labels.size()) {
      throw Error("time series has " + std::to_string(labels.size()) + " labels but " +
                  std::to_string(modalities.size()) + " modality tags");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
      throw Error("sampling interval must be positive");
    }
    std::set<std::string_view> seen;
    for (const auto& l : labels) {
      if (!seen.insert(l).second) {
        throw Error("duplicate column label '" + l + "'");
      }
    }
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (!values.col(c).allFinite()) {
        throw Error("column '" + labels[c] + "' contains non-finite values");
      }
    }
  }

  // Same labels, tags and dt around new values.
  TimeSeriesMatrix with_values(Eigen::MatrixXd v) const {
    return TimeSeriesMatrix{std::move(v), labels, modalities, dt};
  }
};

/// Column-wise concatenation [left | right]; both must share T and dt.
inline TimeSeriesMatrix concatenate(const TimeSeriesMatrix& left, const TimeSeriesMatrix& right) {
  if (left.samples() != right.samples()) {
    throw Error("cannot concatenate series with " + std::to_string(left.samples()) + " and " +
                std::to_string(right.samples()) + " samples");
  }
  if (std::abs(left.dt - right.dt) > 1e-9 * left.dt) {
    throw Error("cannot concatenate series with different sampling intervals");
  }
  TimeSeriesMatrix out;
  out.values.resize(left.samples(), left.nodes() + right.nodes());
  out.values << left.values, right.values;
  out.labels = left.labels;
  out.labels.insert(out.labels.end(), right.labels.begin(), right.labels.end());
  out.modalities = left.modalities;
  out.modalities.insert(out.modalities.end(), right.modalities.begin(), right.modalities.end());
  out.dt = left.dt;
  out.validate();
  return out;
}

// Polynomial basis [1, u, u^2, ...] on u in [-1, 1] spanning the T samples.
// Rescaling time keeps the cubic design well conditioned for long series.
inline Eigen::MatrixXd polynomial_basis(Eigen::Index samples, int order) {
  Eigen::MatrixXd basis(samples, order + 1);
  for (Eigen::Index t = 0; t < samples; ++t) {
    const double u = samples > 1 ? 2.0 * static_cast<double>(t) / static_cast<double>(samples - 1) - 1.0 : 0.0;
    double p = 1.0;
    for (int k = 0; k <= order; ++k) {
      basis(t, k) = p;
      p *= u;
    }
  }
  return basis;
}

/// Removes a least-squares polynomial trend of degree `order` (1..3) from
/// every column. The intercept is always part of the fit.
inline TimeSeriesMatrix detrend_polynomial(const TimeSeriesMatrix& ts, int order) {
  if (order < 1 || order > 3) {
    throw Error("detrend order must be 1, 2 or 3, got " + std::to_string(order));
  }
  ts.validate();
  const Eigen::Index columns = order + 1;
  if (ts.samples() <= columns) {
    throw Error("detrend of order " + std::to_string(order) + " fits " + std::to_string(columns) +
                " columns and needs more than " + std::to_string(columns) + " samples, got " +
                std::to_string(ts.samples()));
  }
  const Eigen::MatrixXd basis = polynomial_basis(ts.samples(), order);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  const Eigen::MatrixXd coefficients = qr.solve(ts.values);
  return ts.with_values(ts.values - basis * coefficients);
}

/// Design matrix for nuisance regression: intercept, the regressors, and
/// optionally their first differences (first row 0). All-zero columns are
/// dropped and reported.
inline Eigen::MatrixXd nuisance_design(const Eigen::MatrixXd& regressors, bool include_derivatives,
                                       Warnings* warnings = nullptr) {
  const Eigen::Index samples = regressors.rows();
  std::vector<Eigen::VectorXd> columns;
  columns.emplace_back(Eigen::VectorXd::Ones(samples));

  auto add = [&](const Eigen::VectorXd& column, const std::string& name) {
    if ((column.array() == 0.0).all()) {
      warn(warnings, "dropped all-zero nuisance column " + name);
      return;
    }
    columns.push_back(column);
  };

  for (Eigen::Index k = 0; k < regressors.cols(); ++k) {
    add(regressors.col(k), "regressor " + std::to_string(k));
  }
  if (include_derivatives) {
    for (Eigen::Index k = 0; k < regressors.cols(); ++k) {
      Eigen::VectorXd diff = Eigen::VectorXd::Zero(samples);
      for (Eigen::Index t = 1; t < samples; ++t) {
        diff(t) = regressors(t, k) - regressors(t - 1, k);
      }
      add(diff, "derivative of regressor " + std::to_string(k));
    }
  }

  Eigen::MatrixXd design(samples, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    design.col(static_cast<Eigen::Index>(c)) = columns[c];
  }
  return design;
}

/// Residuals of an ordinary least-squares fit of every column against the
/// nuisance design. Rank-deficient designs use the minimum-norm solution.
inline TimeSeriesMatrix regress_nuisance(const TimeSeriesMatrix& ts, const Eigen::MatrixXd& regressors,
                                         bool include_derivatives, Warnings* warnings = nullptr) {
  ts.validate();
  if (regressors.rows() != ts.samples()) {
    throw Error("nuisance regressors have " + std::to_string(regressors.rows()) + " rows but the series has " +
                std::to_string(ts.samples()) + " samples");
  }
  if (!regressors.allFinite()) {
    throw Error("nuisance regressors contain non-finite values");
  }
  const Eigen::MatrixXd design = nuisance_design(regressors, include_derivatives, warnings);
  if (ts.samples() <= design.cols()) {
    throw Error("nuisance design has " + std::to_string(design.cols()) + " columns and needs more than " +
                std::to_string(design.cols()) + " samples, got " + std::to_string(ts.samples()));
  }
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
  const Eigen::MatrixXd beta = cod.solve(ts.values);
  return ts.with_values(ts.values - design * beta);
}

namespace detail {

inline double median_of(std::vector<double> v) {
  const auto n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  double upper = *mid;
  if (n % 2 == 1) {
    return upper;
  }
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

// One despiking pass; returns false when the column had no outliers.
inline bool despike_once(Eigen::Ref<Eigen::VectorXd> x, double z_threshold) {
  const auto n = static_cast<std::size_t>(x.size());
  std::vector<double> values(x.data(), x.data() + n);
  const double median = median_of(values);
  std::vector<double> deviations(n);
  for (std::size_t i = 0; i < n; ++i) {
    deviations[i] = std::abs(values[i] - median);
  }
  const double mad = median_of(deviations);

  // With MAD = 0 at least half the samples sit on the median: any sample off
  // it has an unbounded robust z, a sample on it has z = 0.
  std::vector<bool> outlier(n, false);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    const bool flagged = mad > 0.0 ? deviations[i] / (1.4826 * mad) > z_threshold : deviations[i] > 0.0;
    outlier[i] = flagged;
    any = any || flagged;
  }
  if (!any) {
    return false;
  }

  std::ptrdiff_t previous = -1;
  for (std::size_t i = 0; i < n; ++i) {
    if (!outlier[i]) {
      previous = static_cast<std::ptrdiff_t>(i);
      continue;
    }
    std::size_t next = i;
    while (next < n && outlier[next]) {
      ++next;
    }
    for (std::size_t k = i; k < next; ++k) {
      if (previous < 0) {
        x(static_cast<Eigen::Index>(k)) = values[next];
      } else if (next >= n) {
        x(static_cast<Eigen::Index>(k)) = values[static_cast<std::size_t>(previous)];
      } else {
        const double a = values[static_cast<std::size_t>(previous)];
        const double b = values[next];
        const double frac = static_cast<double>(k - static_cast<std::size_t>(previous)) /
                            static_cast<double>(next - static_cast<std::size_t>(previous));
        x(static_cast<Eigen::Index>(k)) = a + frac * (b - a);
      }
    }
    i = next - 1;
  }
  return true;
}

}  // namespace detail

/// Replaces samples whose robust z-score |x - median| / (1.4826 MAD) exceeds
/// `z_threshold` by linear interpolation between the nearest inliers (edge
/// runs take the nearest inlier value). Constant columns pass through.
///
/// Detection is repeated on the cleaned column until nothing is flagged, so
/// the result is a fixed point and a second call is a no-op.
inline TimeSeriesMatrix remove_outliers(const TimeSeriesMatrix& ts, double z_threshold = 4.0) {
  if (!(z_threshold > 0.0)) {
    throw Error("outlier threshold must be positive");
  }
  ts.validate();
  if (ts.samples() < 3) {
    throw Error("outlier removal needs at least 3 samples, got " + std::to_string(ts.samples()));
  }
  Eigen::MatrixXd out = ts.values;
  const Eigen::Index max_passes = ts.samples();
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    for (Eigen::Index pass = 0; pass < max_passes; ++pass) {
      if (!detail::despike_once(out.col(c), z_threshold)) {
        break;
      }
    }
  }
  return ts.with_values(std::move(out));
}

/// Zero-phase band-pass filter of every column (defaults 0.01-0.10 Hz).
inline TimeSeriesMatrix bandpass_filter(const TimeSeriesMatrix& ts, double lo_hz = 0.01, double hi_hz = 0.10) {
  ts.validate();
  const double fs = 1.0 / ts.dt;
  const FirFilter filter = design_bandpass(lo_hz, hi_hz, fs, static_cast<std::size_t>(ts.samples()));
  Eigen::MatrixXd out(ts.samples(), ts.nodes());
  for (Eigen::Index c = 0; c < ts.nodes(); ++c) {
    out.col(c) = filter.apply_zero_phase(ts.values.col(c));
  }
  return ts.with_values(std::move(out));
}

}  // namespace efgraph
