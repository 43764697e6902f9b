#include "nefreg/estimator.hpp"

#include <cmath>
#include <string>

#include "nefreg/error.hpp"

namespace nefreg {

namespace {

template <typename F>
auto run_step(const char* step, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    if (!e.step().empty()) throw;
    throw e.with_step(step);
  }
}

bool is_count(double v) { return std::isfinite(v) && v >= 0.0 && v == std::floor(v); }

}  // namespace

void validate_support(std::span<const double> y, const FamilyModel& family) {
  const double r = family.r();
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double v = y[i];
    bool ok = true;
    switch (family.kind()) {
      case FamilyKind::Poisson:
      case FamilyKind::NegBinomial:
      case FamilyKind::GammaPoisson: ok = is_count(v); break;
      case FamilyKind::Binomial:
      case FamilyKind::BetaBinomial: ok = is_count(v) && v <= r; break;
      case FamilyKind::Gamma: ok = std::isfinite(v) && v > 0.0; break;
      case FamilyKind::NefGhs: ok = std::isfinite(v); break;
    }
    if (!ok) {
      throw Error(ErrorKind::SupportError,
                  "observation " + std::to_string(v) + " is outside the support of " +
                      family.name(),
                  i);
    }
  }
}

EstimateResult fit(std::span<const double> y, const FitConfig& cfg) {
  const VstVariant variant =
      cfg.regime == Regime::GeneralNef ? VstVariant::general_nef() : cfg.variant;

  run_step("validate", [&] {
    validate_support(y, cfg.family);
    vst_constants(cfg.family, variant);
    return 0;
  });

  const std::size_t n = y.size();
  BinnedSeries binned = run_step("bin", [&] {
    const std::size_t t = cfg.t_override
                              ? *cfg.t_override
                              : select_bin_count(n, cfg.regime, cfg.target_per_bin, cfg.j0);
    BinSums bins = bin_sums(y, t);
    return run_step("transform",
                    [&] { return transform_bins(bins.sums, bins.sizes, cfg.family, variant); });
  });

  const std::size_t t_count = binned.t_count;
  const double root_t = std::sqrt(static_cast<double>(t_count));

  WaveletCoeffs raw = run_step("dwt", [&] {
    WaveletCoeffs c = dwt(binned.transformed, cfg.filter, cfg.j0);
    for (double& v : c.gross) v /= root_t;
    for (auto& level : c.details) {
      for (double& v : level) v /= root_t;
    }
    return c;
  });

  ThresholdConfig tcfg = ThresholdConfig::for_sample(cfg.rule, n);
  tcfg.lambda_star = cfg.lambda_star;
  tcfg.block_length = cfg.block_length;
  WaveletCoeffs shrunk = run_step("threshold", [&] {
    if (cfg.noise == NoiseEstimate::Robust) tcfg.noise_variance = robust_noise_variance(raw);
    if (!cfg.denoise) return raw;
    return apply_threshold(raw, tcfg);
  });

  EstimateResult result{{}, {}, {}, std::move(binned), std::move(raw), std::move(shrunk), variant};
  result.noise_variance = tcfg.noise_variance;
  result.block_length =
      cfg.rule == ThresholdRule::BlockJS ? tcfg.resolved_block_length(t_count, cfg.j0) : 0;

  run_step("invert", [&] {
    result.g_hat = idwt(result.coeffs_shrunk, cfg.filter);
    result.grid.resize(t_count);
    result.f_hat.resize(t_count);
    for (std::size_t j = 0; j < t_count; ++j) {
      result.g_hat[j] *= root_t;
      result.grid[j] = static_cast<double>(j + 1) / static_cast<double>(t_count);
      if (g_inverse_clamps(cfg.family, result.g_hat[j])) ++result.clamp_events;
      result.f_hat[j] = g_inverse(cfg.family, result.g_hat[j]);
    }
    return 0;
  });
  return result;
}

double evaluate_mse(const EstimateResult& result, std::span<const double> f_true) {
  if (f_true.size() != result.f_hat.size()) {
    throw Error(ErrorKind::LengthMismatch,
                "truth has " + std::to_string(f_true.size()) + " points, estimate has " +
                    std::to_string(result.f_hat.size()));
  }
  if (f_true.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < f_true.size(); ++j) {
    const double d = result.f_hat[j] - f_true[j];
    total += d * d;
  }
  return total / static_cast<double>(f_true.size());
}

double evaluate_mse(const EstimateResult& result, const std::function<double(double)>& f_true) {
  std::vector<double> truth;
  truth.reserve(result.grid.size());
  for (double t : result.grid) truth.push_back(f_true(t));
  return evaluate_mse(result, truth);
}

}  // namespace nefreg
