#include "nefreg/binning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nefreg/error.hpp"

namespace nefreg {

std::size_t select_bin_count(std::size_t n, Regime regime, std::optional<double> target_per_bin,
                             int j0) {
  if (j0 < 0 || j0 > 40) throw Error(ErrorKind::ConfigError, "primary level out of range");
  const std::size_t floor_t = std::size_t{1} << (j0 + 1);
  if (n < 2 * floor_t) {
    throw Error(ErrorKind::TooFewObservations,
                "need at least " + std::to_string(2 * floor_t) + " observations, got " +
                    std::to_string(n));
  }

  std::size_t t = floor_t;
  if (target_per_bin) {
    if (!(*target_per_bin > 0.0)) {
      throw Error(ErrorKind::ConfigError, "target per bin must be positive");
    }
    t = 1;
    while (2 * t <= n && static_cast<double>(n) / static_cast<double>(2 * t) >= *target_per_bin) {
      t *= 2;
    }
  } else {
    const double exponent = regime == Regime::Qvf ? 0.75 : 0.5;
    const double level = std::round(exponent * std::log2(static_cast<double>(n)));
    t = std::size_t{1} << static_cast<int>(level);
  }
  t = std::max(t, floor_t);
  while (t > n) t /= 2;
  return t;
}

BinSums bin_sums(std::span<const double> y, std::size_t t_count) {
  const std::size_t n = y.size();
  if (t_count < 1 || t_count > n) {
    throw Error(ErrorKind::BadShape, "bin count " + std::to_string(t_count) +
                                         " incompatible with " + std::to_string(n) +
                                         " observations");
  }
  const std::size_t base = n / t_count;
  const std::size_t extra = n % t_count;
  BinSums out;
  out.sums.reserve(t_count);
  out.sizes.reserve(t_count);
  std::size_t pos = 0;
  for (std::size_t j = 0; j < t_count; ++j) {
    const std::size_t len = base + (j < extra ? 1 : 0);
    double s = 0.0;
    for (std::size_t i = pos; i < pos + len; ++i) s += y[i];
    out.sums.push_back(s);
    out.sizes.push_back(static_cast<double>(len));
    pos += len;
  }
  return out;
}

BinnedSeries transform_bins(std::span<const double> sums, std::span<const double> bin_sizes,
                            const FamilyModel& family, const VstVariant& variant) {
  if (sums.size() != bin_sizes.size()) {
    throw Error(ErrorKind::LengthMismatch, "sums and bin sizes differ in length");
  }
  BinnedSeries out{sums.size(),
                   {bin_sizes.begin(), bin_sizes.end()},
                   {sums.begin(), sums.end()},
                   {},
                   family,
                   variant};
  out.transformed.reserve(sums.size());
  for (std::size_t j = 0; j < sums.size(); ++j) {
    try {
      out.transformed.push_back(hm_transform(family, variant, sums[j], bin_sizes[j]));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DomainError) throw;
      throw Error(ErrorKind::DomainError, "bin " + std::to_string(j) + ": " + e.what(), j);
    }
  }
  return out;
}

}  // namespace nefreg
