#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "nefreg/families.hpp"

namespace nefreg {

// Moments of H_m(X), X the sum of m i.i.d. draws with mean mu.
struct TransformMoments {
  double mean;
  double variance;
  // Certified bound on the error from truncating an infinite support; zero
  // for finite supports and closed forms.
  double truncation_bound;
};

// Exact moments for Poisson, Binomial and NegBinomial (summation over the
// support of X) and Gamma (digamma/trigamma closed form). Other families
// raise UnsupportedFamily.
//
// Infinite supports are cut at the first K whose geometric tail bound on
// E[1 + H^2; X > K] falls below 1e-12. NegBinomial sums are capped at 10^6
// terms.
TransformMoments exact_transform_moments(const FamilyModel& family, const VstVariant& variant,
                                         double mu, int m);

struct DiagPoint {
  double mu;
  double scaled_bias;      // sqrt(m) (E H_m(X) - G(mu))
  double scaled_variance;  // m Var H_m(X)
  double truncation_bound;
};

struct DiagCurve {
  FamilyModel family;
  int m;
  VstVariant variant;
  std::vector<DiagPoint> points;
};

DiagCurve bias_variance_curve(const FamilyModel& family, const VstVariant& variant, int m,
                              std::span<const double> mu_grid);

struct BiasOrderRow {
  int m;
  double bias;
  double bias_m2;
};

std::vector<BiasOrderRow> bias_order_check(const FamilyModel& family, const VstVariant& variant,
                                           double mu, std::span<const int> m_list);

// Header `mu,scaled_bias,scaled_variance,truncation_bound`, 17 significant
// digits per value.
void write_curve_csv(std::ostream& os, const DiagCurve& curve);

namespace detail {

// Sum over k = 0..last_index only, with no tail bound. Test hook for the
// truncation certificate.
TransformMoments partial_sum_moments(const FamilyModel& family, const VstVariant& variant,
                                     double mu, int m, std::size_t last_index);

}  // namespace detail

}  // namespace nefreg
