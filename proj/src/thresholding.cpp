#include "nefreg/thresholding.hpp"

#include <algorithm>
#include <cmath>

#include "nefreg/error.hpp"

namespace nefreg {

namespace {

double shrink_factor(double penalty, double energy) {
  if (!(energy > 0.0)) return 0.0;
  return std::max(0.0, 1.0 - penalty / energy);
}

}  // namespace

ThresholdConfig ThresholdConfig::for_sample(ThresholdRule rule, std::size_t n) {
  ThresholdConfig cfg;
  cfg.rule = rule;
  cfg.n = n;
  cfg.noise_variance = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
  return cfg;
}

void ThresholdConfig::validate() const {
  if (!(noise_variance > 0.0) || !std::isfinite(noise_variance)) {
    throw Error(ErrorKind::ConfigError, "noise variance must be positive");
  }
  if (n < 2) throw Error(ErrorKind::ConfigError, "sample size must be at least 2");
  if (!(lambda_star > 0.0)) throw Error(ErrorKind::ConfigError, "lambda must be positive");
  if (block_length && *block_length == 0) {
    throw Error(ErrorKind::ConfigError, "block length must be positive");
  }
}

std::size_t ThresholdConfig::resolved_block_length(std::size_t t_count, int j0) const {
  if (block_length) return *block_length;
  const double raw = std::floor(std::log(static_cast<double>(std::max<std::size_t>(t_count, 1))));
  const auto cap = std::size_t{1} << std::max(j0, 0);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)), 1, cap);
}

std::vector<double> blockjs_level(std::span<const double> level, std::size_t block_length,
                                  double lambda_star, double noise_variance) {
  std::vector<double> out(level.size(), 0.0);
  const std::size_t len = std::clamp<std::size_t>(block_length, 1, std::max<std::size_t>(level.size(), 1));
  const double penalty = lambda_star * static_cast<double>(len) * noise_variance;
  for (const CoeffBlock& block : block_partition(level.size(), len)) {
    double energy = 0.0;
    for (std::size_t idx : block.indices) energy += level[idx] * level[idx];
    const double factor = shrink_factor(penalty, energy);
    for (std::size_t i = 0; i < block.home_count; ++i) {
      const std::size_t idx = block.indices[i];
      out[idx] = factor * level[idx];
    }
  }
  return out;
}

std::vector<double> neighcoeff_level(std::span<const double> level, std::size_t n,
                                     double noise_variance) {
  const std::size_t size = level.size();
  std::vector<double> out(size, 0.0);
  const double penalty = 2.0 * std::log(static_cast<double>(n)) * noise_variance;
  for (std::size_t k = 0; k < size; ++k) {
    const double left = level[(k + size - 1) % size];
    const double right = level[(k + 1) % size];
    const double energy = left * left + level[k] * level[k] + right * right;
    out[k] = shrink_factor(penalty, energy) * level[k];
  }
  return out;
}

WaveletCoeffs blockjs(const WaveletCoeffs& coeffs, const ThresholdConfig& cfg) {
  cfg.validate();
  const std::size_t len =
      cfg.resolved_block_length(std::size_t{1} << coeffs.top_level, coeffs.j0);
  WaveletCoeffs out = coeffs;
  for (auto& level : out.details) {
    level = blockjs_level(level, len, cfg.lambda_star, cfg.noise_variance);
  }
  return out;
}

WaveletCoeffs neighcoeff(const WaveletCoeffs& coeffs, const ThresholdConfig& cfg) {
  cfg.validate();
  WaveletCoeffs out = coeffs;
  for (auto& level : out.details) level = neighcoeff_level(level, cfg.n, cfg.noise_variance);
  return out;
}

WaveletCoeffs apply_threshold(const WaveletCoeffs& coeffs, const ThresholdConfig& cfg) {
  return cfg.rule == ThresholdRule::BlockJS ? blockjs(coeffs, cfg) : neighcoeff(coeffs, cfg);
}

double robust_noise_variance(const WaveletCoeffs& coeffs) {
  if (coeffs.details.empty() || coeffs.details.back().empty()) {
    throw Error(ErrorKind::BadShape, "no detail coefficients");
  }
  std::vector<double> mags;
  mags.reserve(coeffs.details.back().size());
  for (double v : coeffs.details.back()) mags.push_back(std::abs(v));
  const auto mid = mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2);
  std::nth_element(mags.begin(), mid, mags.end());
  double median = *mid;
  if (mags.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(mags.begin(), mid));
  }
  const double scale = median / 0.6745;
  return scale * scale;
}

}  // namespace nefreg
