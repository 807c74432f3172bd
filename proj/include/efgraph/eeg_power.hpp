#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "efgraph/error.hpp"
#include "efgraph/filter.hpp"
#include "efgraph/timeseries.hpp"

namespace efgraph {

struct BandDefinition {
  std::string name;
  double lo = 0.0;  // Hz
  double hi = 0.0;  // Hz

  void validate() const {
    if (!(lo > 0.0) || !(lo < hi)) {
      throw Error("band '" + name + "' needs 0 < lo < hi");
    }
  }
};

/// delta 1-4, theta 4-8, alpha 8-12, beta 12-30, low_gamma 30-50 Hz.
inline std::vector<BandDefinition> default_bands() {
  return {
      {"delta", 1.0, 4.0}, {"theta", 4.0, 8.0}, {"alpha", 8.0, 12.0}, {"beta", 12.0, 30.0}, {"low_gamma", 30.0, 50.0},
  };
}

inline BandDefinition find_band(const std::string& name) {
  for (auto& b : default_bands()) {
    if (b.name == name) {
      return b;
    }
  }
  throw Error("unknown band '" + name + "' (expected delta, theta, alpha, beta or low_gamma)");
}

/// Continuous EEG: S samples x C channels at fs Hz.
struct RawEegRecord {
  Eigen::MatrixXd samples;
  double fs = 0.0;
  std::vector<std::string> channel_labels;
};

/// Mean band power per channel over consecutive dt-long segments.
///
/// Each segment is band-passed on its own with the zero-phase windowed-sinc
/// filter (sized to the segment) and reduced to its mean square. A trailing
/// partial segment is dropped with a warning. The result is on the TR grid
/// with every column tagged EEG.
inline TimeSeriesMatrix band_power_series(const RawEegRecord& raw, const BandDefinition& band, double dt,
                                          Warnings* warnings = nullptr) {
  band.validate();
  if (!(raw.fs > 0.0)) {
    throw Error("EEG sampling rate must be positive");
  }
  if (!(dt > 0.0)) {
    throw Error("power grid interval must be positive");
  }
  if (!(raw.fs > 2.0 * band.hi)) {
    throw Error("band '" + band.name + "' upper edge " + std::to_string(band.hi) +
                " Hz is at or above the EEG Nyquist frequency " + std::to_string(raw.fs / 2.0) + " Hz");
  }
  if (static_cast<Eigen::Index>(raw.channel_labels.size()) != raw.samples.cols()) {
    throw Error("EEG record has " + std::to_string(raw.samples.cols()) + " channels but " +
                std::to_string(raw.channel_labels.size()) + " labels");
  }
  if (!raw.samples.allFinite()) {
    throw Error("EEG record contains non-finite samples");
  }

  const double exact = raw.fs * dt;
  const auto segment = static_cast<Eigen::Index>(std::llround(exact));
  if (segment < 2 || std::abs(exact - static_cast<double>(segment)) > 1e-6 * exact) {
    throw Error("power interval " + std::to_string(dt) + " s must span a whole number (>= 2) of EEG samples at " +
                std::to_string(raw.fs) + " Hz");
  }
  const Eigen::Index segments = raw.samples.rows() / segment;
  if (segments < 2) {
    throw Error("EEG record spans fewer than 2 power intervals");
  }
  if (raw.samples.rows() % segment != 0) {
    warn(warnings, "dropped trailing " + std::to_string(raw.samples.rows() % segment) +
                       " EEG samples that do not fill a whole power interval");
  }

  const FirFilter filter = design_bandpass(band.lo, band.hi, raw.fs, static_cast<std::size_t>(segment));
  Eigen::MatrixXd power(segments, raw.samples.cols());
  for (Eigen::Index c = 0; c < raw.samples.cols(); ++c) {
    for (Eigen::Index s = 0; s < segments; ++s) {
      const Eigen::VectorXd piece = raw.samples.col(c).segment(s * segment, segment);
      const Eigen::VectorXd filtered = filter.apply_zero_phase(piece);
      power(s, c) = filtered.squaredNorm() / static_cast<double>(segment);
    }
  }

  TimeSeriesMatrix out;
  out.values = std::move(power);
  out.labels = raw.channel_labels;
  out.modalities.assign(raw.channel_labels.size(), Modality::Eeg);
  out.dt = dt;
  return out;
}

struct HrfKernel {
  std::vector<double> taps;  // h(0), h(dt), h(2 dt), ...
  double dt = 0.0;
};

/// Canonical double-gamma response (peak shape 6, undershoot shape 16,
/// unit scales, undershoot ratio 1/6) at t = 0, dt, ... <= duration,
/// scaled so the largest tap is exactly 1.
inline HrfKernel hrf_kernel(double dt, double duration = 32.0) {
  if (!(dt > 0.0) || !(dt <= duration)) {
    throw Error("HRF needs 0 < dt <= duration");
  }
  auto gamma_pdf = [](double t, double shape) {
    if (t <= 0.0) {
      return 0.0;
    }
    return std::exp((shape - 1.0) * std::log(t) - t - std::lgamma(shape));
  };
  HrfKernel kernel;
  kernel.dt = dt;
  const auto count = static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;
  kernel.taps.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) * dt;
    kernel.taps[k] = gamma_pdf(t, 6.0) - gamma_pdf(t, 16.0) / 6.0;
  }
  double peak = 0.0;
  for (double v : kernel.taps) {
    peak = std::max(peak, v);
  }
  if (!(peak > 0.0)) {
    throw Error("HRF grid misses the response peak; use a longer duration");
  }
  for (auto& v : kernel.taps) {
    v /= peak;
  }
  return kernel;
}

/// Causal convolution of every column with the kernel, truncated to T:
/// out[t] = sum_{k <= t} x[t - k] * taps[k].
inline TimeSeriesMatrix hrf_convolve(const TimeSeriesMatrix& power, const HrfKernel& kernel) {
  power.validate();
  if (std::abs(power.dt - kernel.dt) > 1e-9 * power.dt) {
    throw Error("HRF sampled at " + std::to_string(kernel.dt) + " s but the series is on a " +
                std::to_string(power.dt) + " s grid");
  }
  const Eigen::Index samples = power.samples();
  const auto taps = static_cast<Eigen::Index>(kernel.taps.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(samples, power.nodes());
  for (Eigen::Index c = 0; c < power.nodes(); ++c) {
    for (Eigen::Index t = 0; t < samples; ++t) {
      double acc = 0.0;
      const Eigen::Index kmax = std::min(taps - 1, t);
      for (Eigen::Index k = 0; k <= kmax; ++k) {
        acc += power.values(t - k, c) * kernel.taps[static_cast<std::size_t>(k)];
      }
      out(t, c) = acc;
    }
  }
  return power.with_values(std::move(out));
}

}  // namespace efgraph
