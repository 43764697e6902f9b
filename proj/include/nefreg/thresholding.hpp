#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "nefreg/wavelet.hpp"

namespace nefreg {

enum class ThresholdRule { BlockJS, NeighCoeff };

// Root of lambda - ln(lambda) = 3.
inline constexpr double kLambdaStar = 4.50524;

struct ThresholdConfig {
  ThresholdRule rule = ThresholdRule::BlockJS;
  double lambda_star = kLambdaStar;
  // Fixed block length; when empty, floor(ln T) clipped to [1, 2^j0].
  std::optional<std::size_t> block_length;
  double noise_variance = 0.0;
  std::size_t n = 0;

  // Defaults for a sample of n observations: noise variance 1/n.
  static ThresholdConfig for_sample(ThresholdRule rule, std::size_t n);

  // Throws ConfigError unless noise_variance > 0 and n >= 2.
  void validate() const;
  std::size_t resolved_block_length(std::size_t t_count, int j0) const;
};

// Shrink one level by blocks: each home coefficient of block B becomes
// (1 - lambda L sigma^2 / S_B^2)_+ y, with factor 0 when S_B^2 = 0.
std::vector<double> blockjs_level(std::span<const double> level, std::size_t block_length,
                                  double lambda_star, double noise_variance);

// Shrink one level coefficientwise with the periodic 3-neighbourhood sum of
// squares: (1 - 2 ln(n) sigma^2 / S_k^2)_+ y_k.
std::vector<double> neighcoeff_level(std::span<const double> level, std::size_t n,
                                     double noise_variance);

// Both leave the gross (scaling) coefficients untouched.
WaveletCoeffs blockjs(const WaveletCoeffs& coeffs, const ThresholdConfig& cfg);
WaveletCoeffs neighcoeff(const WaveletCoeffs& coeffs, const ThresholdConfig& cfg);
WaveletCoeffs apply_threshold(const WaveletCoeffs& coeffs, const ThresholdConfig& cfg);

// (MAD of the finest detail level / 0.6745)^2. Off by default in fits.
double robust_noise_variance(const WaveletCoeffs& coeffs);

}  // namespace nefreg
