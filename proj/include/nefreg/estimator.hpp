#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "nefreg/binning.hpp"
#include "nefreg/families.hpp"
#include "nefreg/thresholding.hpp"
#include "nefreg/wavelet.hpp"

namespace nefreg {

enum class NoiseEstimate { Theoretical, Robust };

struct FitConfig {
  FamilyModel family = FamilyModel::poisson();
  VstVariant variant = VstVariant::mean_matching();
  Regime regime = Regime::Qvf;  // GeneralNef forces the a = b = 0 transform
  ThresholdRule rule = ThresholdRule::BlockJS;
  double lambda_star = kLambdaStar;
  std::optional<std::size_t> block_length;
  NoiseEstimate noise = NoiseEstimate::Theoretical;
  WaveletFilter filter = WaveletFilter::symmlet8();
  int j0 = kDefaultPrimaryLevel;
  std::optional<std::size_t> t_override;
  std::optional<double> target_per_bin;
  // false skips shrinkage; the pipeline then reduces to G^{-1}(H_m(Q_j)).
  bool denoise = true;
};

struct EstimateResult {
  std::vector<double> grid;   // t_j = j / T, j = 1..T
  std::vector<double> g_hat;  // denoised transform-scale values
  std::vector<double> f_hat;  // g_inverse(g_hat)
  BinnedSeries binned;
  WaveletCoeffs coeffs_raw;     // T^{-1/2} W Y*
  WaveletCoeffs coeffs_shrunk;
  VstVariant variant;           // variant actually used
  double noise_variance = 0.0;
  std::size_t block_length = 0;  // 0 for NeighCoeff
  std::size_t clamp_events = 0;  // g_hat values outside the range of G
};

// Bin, transform, shrink in the wavelet domain, invert. Deterministic.
// Errors carry the failing step: "validate", "bin", "transform", "dwt",
// "threshold" or "invert". Out-of-support observations raise SupportError.
EstimateResult fit(std::span<const double> y, const FitConfig& cfg);

// Throws SupportError at the first observation the family cannot produce.
void validate_support(std::span<const double> y, const FamilyModel& family);

// (1/T) sum_j (f_hat(t_j) - f(t_j))^2.
double evaluate_mse(const EstimateResult& result, std::span<const double> f_true);
double evaluate_mse(const EstimateResult& result, const std::function<double(double)>& f_true);

}  // namespace nefreg
