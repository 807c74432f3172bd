#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "efgraph/error.hpp"

namespace efgraph {

/// Linear-phase FIR filter (symmetric taps, even order).
struct FirFilter {
  std::vector<double> taps;

  int order() const { return static_cast<int>(taps.size()) - 1; }

  /// Forward-backward application with odd (point) reflection padding of `order()`
  /// samples at each end. Output has the input length and no phase shift;
  /// the magnitude response is |H|^2.
  Eigen::VectorXd apply_zero_phase(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    const Eigen::Index n = x.size();
    const Eigen::Index m = static_cast<Eigen::Index>(taps.size()) - 1;
    const Eigen::Index pad = std::min<Eigen::Index>(m, n - 1);

    std::vector<double> padded(static_cast<std::size_t>(n + 2 * pad));
    for (Eigen::Index i = 0; i < pad; ++i) {
      padded[static_cast<std::size_t>(i)] = 2.0 * x(0) - x(pad - i);
      padded[static_cast<std::size_t>(n + pad + i)] = 2.0 * x(n - 1) - x(n - 2 - i);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      padded[static_cast<std::size_t>(pad + i)] = x(i);
    }

    std::vector<double> once = causal(padded);
    std::reverse(once.begin(), once.end());
    std::vector<double> twice = causal(once);
    std::reverse(twice.begin(), twice.end());

    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      out(i) = twice[static_cast<std::size_t>(pad + i)];
    }
    return out;
  }

 private:
  std::vector<double> causal(const std::vector<double>& x) const {
    std::vector<double> y(x.size(), 0.0);
    const std::size_t m = taps.size();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const std::size_t kmax = std::min(m, i + 1);
      double acc = 0.0;
      for (std::size_t k = 0; k < kmax; ++k) {
        acc += taps[k] * x[i - k];
      }
      y[i] = acc;
    }
    return y;
  }
};

/// Hamming-windowed sinc low-pass at `cutoff` cycles/sample, scaled to unit
/// DC gain. `order` must be even.
inline std::vector<double> windowed_sinc_lowpass(double cutoff, int order) {
  std::vector<double> h(static_cast<std::size_t>(order + 1));
  const double half = order / 2.0;
  double sum = 0.0;
  for (int k = 0; k <= order; ++k) {
    const double t = k - half;
    const double sinc = t == 0.0 ? 2.0 * cutoff
                                 : std::sin(2.0 * std::numbers::pi * cutoff * t) / (std::numbers::pi * t);
    const double window = order == 0 ? 1.0 : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * k / order);
    h[static_cast<std::size_t>(k)] = sinc * window;
    sum += h[static_cast<std::size_t>(k)];
  }
  for (auto& v : h) {
    v /= sum;
  }
  return h;
}

/// Filter order for a band on a series of `samples` points:
/// min(samples - 1 rounded down to even, 4 / transition rounded up to even),
/// where the transition width is the narrowest of the stop gap below `lo`,
/// half the band, and the gap to Nyquist (all in cycles/sample).
inline int bandpass_order(double lo_norm, double hi_norm, std::size_t samples) {
  double transition = std::min(0.5 * (hi_norm - lo_norm), 0.5 - hi_norm);
  if (lo_norm > 0.0) {
    transition = std::min(transition, lo_norm);
  }
  const double wanted = std::ceil(4.0 / transition);
  int order = wanted > 1e7 ? 10'000'000 : static_cast<int>(wanted);
  order += order % 2;
  int cap = samples > 0 ? static_cast<int>(samples - 1) : 0;
  cap -= cap % 2;
  return std::max(0, std::min(order, cap));
}

/// Band-pass [lo_hz, hi_hz] at sampling rate fs, sized for series of
/// `samples` points. The taps are the difference of two unit-DC low-pass
/// kernels, so the DC gain is zero. lo_hz = 0 gives a plain low-pass.
inline FirFilter design_bandpass(double lo_hz, double hi_hz, double fs, std::size_t samples) {
  const double nyquist = fs / 2.0;
  if (!(hi_hz < nyquist)) {
    std::ostringstream msg;
    msg << "band [" << lo_hz << ", " << hi_hz << "] Hz is infeasible: upper edge must be below the Nyquist frequency "
        << nyquist << " Hz (sampling interval " << 1.0 / fs << " s)";
    throw Error(msg.str());
  }
  if (!(lo_hz >= 0.0) || !(lo_hz < hi_hz)) {
    std::ostringstream msg;
    msg << "band [" << lo_hz << ", " << hi_hz << "] Hz is infeasible: need 0 <= lo < hi";
    throw Error(msg.str());
  }
  const double lo = lo_hz / fs;
  const double hi = hi_hz / fs;
  const int order = bandpass_order(lo, hi, samples);

  FirFilter filter;
  filter.taps = windowed_sinc_lowpass(hi, order);
  if (lo > 0.0) {
    const auto below = windowed_sinc_lowpass(lo, order);
    for (std::size_t k = 0; k < filter.taps.size(); ++k) {
      filter.taps[k] -= below[k];
    }
  }
  return filter;
}

}  // namespace efgraph
