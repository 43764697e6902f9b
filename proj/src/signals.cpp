#include "nefreg/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nefreg/error.hpp"

namespace nefreg {

namespace {

// Knots, heights and widths from Donoho & Johnstone (1994), "Ideal spatial
// adaptation by wavelet shrinkage", Table 1.
constexpr double kKnots[11] = {0.10, 0.13, 0.15, 0.23, 0.25, 0.40,
                               0.44, 0.65, 0.76, 0.78, 0.81};
constexpr double kBlocksHeights[11] = {4.0, -5.0, 3.0, -4.0, 5.0, -4.2,
                                       2.1, 4.3,  -3.1, 2.1, -4.2};
constexpr double kBumpsHeights[11] = {4.0, 5.0, 3.0, 4.0, 5.0, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2};
constexpr double kBumpsWidths[11] = {0.005, 0.005, 0.006, 0.01, 0.01, 0.03,
                                     0.01,  0.01,  0.005, 0.008, 0.005};

double sgn(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

}  // namespace

std::string_view signal_name(Signal s) {
  switch (s) {
    case Signal::Doppler: return "doppler";
    case Signal::Bumps: return "bumps";
    case Signal::Blocks: return "blocks";
    case Signal::HeaviSine: return "heavisine";
  }
  return "unknown";
}

std::optional<Signal> parse_signal(std::string_view name) {
  for (Signal s : kAllSignals) {
    if (signal_name(s) == name) return s;
  }
  return std::nullopt;
}

double signal_eval(Signal s, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorKind::DomainError, "test signals are defined on [0, 1]");
  }
  constexpr double pi = std::numbers::pi;
  switch (s) {
    case Signal::Doppler: {
      constexpr double eps = 0.05;
      return std::sqrt(t * (1.0 - t)) * std::sin(2.0 * pi * (1.0 + eps) / (t + eps));
    }
    case Signal::HeaviSine:
      return 4.0 * std::sin(4.0 * pi * t) - sgn(t - 0.3) - sgn(0.72 - t);
    case Signal::Blocks: {
      double v = 0.0;
      for (int i = 0; i < 11; ++i) v += kBlocksHeights[i] * 0.5 * (1.0 + sgn(t - kKnots[i]));
      return v;
    }
    case Signal::Bumps: {
      double v = 0.0;
      for (int i = 0; i < 11; ++i) {
        const double u = std::abs((t - kKnots[i]) / kBumpsWidths[i]);
        v += kBumpsHeights[i] / std::pow(1.0 + u, 4);
      }
      return v;
    }
  }
  return 0.0;
}

AffineMap affine_normalization(double observed_min, double observed_max, double lo, double hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorKind::BadRange, "normalization needs finite lo < hi");
  }
  if (!(observed_max > observed_min)) {
    throw Error(ErrorKind::BadRange, "constant signal cannot be normalized");
  }
  const double scale = (hi - lo) / (observed_max - observed_min);
  return {scale, lo - scale * observed_min};
}

TestSignal normalize_signal(Signal s, double lo, double hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorKind::BadRange, "normalization needs finite lo < hi");
  }
  double mn = signal_eval(s, 0.0);
  double mx = mn;
  const double step = 1.0 / static_cast<double>(kReferenceGridSize - 1);
  for (std::size_t i = 1; i < kReferenceGridSize; ++i) {
    const double v = signal_eval(s, std::min(1.0, static_cast<double>(i) * step));
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  const AffineMap map = affine_normalization(mn, mx, lo, hi);
  return TestSignal{s, lo, hi, map.scale, map.offset};
}

}  // namespace nefreg
