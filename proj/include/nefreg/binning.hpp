#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "nefreg/families.hpp"

namespace nefreg {

enum class Regime { Qvf, GeneralNef };

inline constexpr int kDefaultPrimaryLevel = 4;

// Number of bins T, always a power of two in [2^(j0+1), n].
//
// With target_per_bin set, T is the largest power of two with
// n / T >= target_per_bin. Otherwise T is the power of two nearest (in log2)
// to n^(3/4) for Qvf, or n^(1/2) for GeneralNef.
std::size_t select_bin_count(std::size_t n, Regime regime,
                             std::optional<double> target_per_bin = std::nullopt,
                             int j0 = kDefaultPrimaryLevel);

struct BinSums {
  std::vector<double> sums;
  std::vector<double> sizes;
};

// Contiguous bins in input order. The first n mod T bins hold ceil(n/T)
// observations, the rest floor(n/T).
BinSums bin_sums(std::span<const double> y, std::size_t t_count);

struct BinnedSeries {
  std::size_t t_count;
  std::vector<double> bin_sizes;
  std::vector<double> sums;
  std::vector<double> transformed;
  FamilyModel family;
  VstVariant variant;
};

// Y*_j = H_{m_j}(Q_j). A failing bin raises DomainError carrying its index.
BinnedSeries transform_bins(std::span<const double> sums, std::span<const double> bin_sizes,
                            const FamilyModel& family, const VstVariant& variant);

}  // namespace nefreg
