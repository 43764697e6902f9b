#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace nefreg {

enum class Signal { Doppler, Bumps, Blocks, HeaviSine };

inline constexpr Signal kAllSignals[] = {Signal::Doppler, Signal::Bumps, Signal::Blocks,
                                         Signal::HeaviSine};

std::string_view signal_name(Signal s);
std::optional<Signal> parse_signal(std::string_view name);

// Raw Donoho-Johnstone test function at t in [0, 1]; DomainError otherwise.
double signal_eval(Signal s, double t);

// Points on [0, 1] (both ends included) used to fix the normalization.
inline constexpr std::size_t kReferenceGridSize = std::size_t{1} << 15;

// Affine image of a test signal whose reference-grid min and max land on lo
// and hi.
struct TestSignal {
  Signal name;
  double lo;
  double hi;
  double scale;
  double offset;

  double operator()(double t) const { return offset + scale * signal_eval(name, t); }
};

struct AffineMap {
  double scale;
  double offset;
};

// Map sending observed_min to lo and observed_max to hi. BadRange when the
// target range is empty or the observed range is degenerate.
AffineMap affine_normalization(double observed_min, double observed_max, double lo, double hi);

// BadRange unless lo < hi and the signal is non-constant on the grid.
TestSignal normalize_signal(Signal s, double lo, double hi);

}  // namespace nefreg
