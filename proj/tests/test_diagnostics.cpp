#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "nefreg/bench.hpp"
#include "nefreg/diagnostics.hpp"
#include "nefreg/error.hpp"
#include "nefreg/special.hpp"

using namespace nefreg;

namespace {

struct Moments {
  double mean, var;
};

// Direct summation with pmf recursion, run far past any tail of interest.
Moments poisson_oracle(double c, double lambda_total, double m, int kmax) {
  double p = std::exp(-lambda_total);
  double s1 = 0.0, s2 = 0.0;
  for (int k = 0; k <= kmax; ++k) {
    const double h = 2.0 * std::sqrt((k + c) / m);
    s1 += p * h;
    s2 += p * h * h;
    p *= lambda_total / (k + 1);
  }
  return {s1, s2 - s1 * s1};
}

Moments binomial_oracle(double c, int n_trials, double p, double m) {
  double s1 = 0.0, s2 = 0.0;
  for (int k = 0; k <= n_trials; ++k) {
    const double logc = std::lgamma(n_trials + 1.0) - std::lgamma(k + 1.0) -
                        std::lgamma(n_trials - k + 1.0);
    const double w = std::exp(logc + k * std::log(p) + (n_trials - k) * std::log1p(-p));
    const double h = 2.0 * std::asin(std::sqrt((k + c) / (m + 2.0 * c)));
    s1 += w * h;
    s2 += w * h * h;
  }
  return {s1, s2 - s1 * s1};
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / (n - 1.0));
  return g;
}

double max_abs_bias(const DiagCurve& c) {
  double m = 0.0;
  for (const auto& p : c.points) m = std::max(m, std::abs(p.scaled_bias));
  return m;
}

}  // namespace

TEST_CASE("gamma bias via the digamma identity") {
  const auto mm = exact_transform_moments(FamilyModel::gamma(1.0), VstVariant::mean_matching(),
                                          2.0, 3);
  const double oracle = (1.5 - special::euler_gamma) - std::log(2.5);
  CHECK(mm.mean - std::log(2.0) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(std::abs(oracle - 6.4936e-3) < 1e-7);
  CHECK(mm.variance == doctest::Approx(std::numbers::pi * std::numbers::pi / 6.0 - 1.25));
  CHECK(mm.truncation_bound == 0.0);
}

TEST_CASE("poisson mean-matching at lambda 1, m 1") {
  const auto t = exact_transform_moments(FamilyModel::poisson(), VstVariant::mean_matching(), 1.0,
                                         1);
  CHECK(t.mean == doctest::Approx(2.04362603066496141).epsilon(1e-12));
  CHECK(t.truncation_bound <= 1e-10);
}

TEST_CASE("poisson moments agree with a long direct sum") {
  for (double c : {0.0, 0.25, 0.375}) {
    for (double lambda : {0.3, 2.0, 9.5}) {
      for (int m : {1, 7, 30}) {
        CAPTURE(c);
        CAPTURE(lambda);
        CAPTURE(m);
        const auto t =
            exact_transform_moments(FamilyModel::poisson(), VstVariant::custom(c), lambda, m);
        const auto o = poisson_oracle(c, lambda * m, m, static_cast<int>(lambda * m * 4 + 200));
        CHECK(t.mean == doctest::Approx(o.mean).epsilon(1e-11));
        CHECK(t.variance == doctest::Approx(o.var).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("binomial moments agree with an independent sum") {
  for (double c : {0.0, 0.25, 0.375}) {
    for (double p : {0.05, 0.5, 0.93}) {
      const auto t = exact_transform_moments(FamilyModel::binomial(1), VstVariant::custom(c), p, 30);
      const auto o = binomial_oracle(c, 30, p, 30.0);
      CHECK(t.mean == doctest::Approx(o.mean).epsilon(1e-12));
      CHECK(t.variance == doctest::Approx(o.var).epsilon(1e-10));
      CHECK(t.truncation_bound == 0.0);
    }
  }
}

TEST_CASE("binomial point mass at the boundary") {
  const auto fam = FamilyModel::binomial(1);
  const auto bart = exact_transform_moments(fam, VstVariant::bartlett(), 0.0, 30);
  CHECK(bart.mean == 0.0);
  CHECK(bart.variance == 0.0);
  for (const auto& v : {VstVariant::mean_matching(), VstVariant::anscombe()}) {
    const auto t = exact_transform_moments(fam, v, 0.0, 30);
    CHECK(t.variance == 0.0);
    // A positive offset moves the transformed atom off G(0) = 0.
    const double c = v.offset();
    CHECK(t.mean == doctest::Approx(2.0 * std::asin(std::sqrt(c / (30.0 + 2.0 * c)))));
  }
}

TEST_CASE("negative binomial moments") {
  const auto fam = FamilyModel::neg_binomial(2.0);
  const auto t = exact_transform_moments(fam, VstVariant::mean_matching(), 1.5, 10);
  // Total X ~ NB(20, p) with mean 15; direct oracle.
  const double rt = 20.0, mean = 15.0, p = rt / (rt + mean);
  double w = std::pow(p, rt), s1 = 0.0, s2 = 0.0;
  for (int k = 0; k < 2000; ++k) {
    const double h = 2.0 * std::sqrt(2.0) * std::asinh(std::sqrt((k + 0.25) / (10.0 - 0.25) / 2.0));
    s1 += w * h;
    s2 += w * h * h;
    w *= (k + rt) / (k + 1.0) * (1.0 - p);
  }
  CHECK(t.mean == doctest::Approx(s1).epsilon(1e-11));
  CHECK(t.variance == doctest::Approx(s2 - s1 * s1).epsilon(1e-9));
}

TEST_CASE("unsupported families") {
  for (const auto& f : {FamilyModel::nef_ghs(1.0), FamilyModel::gamma_poisson(1.0),
                        FamilyModel::beta_binomial(2, 1.0, 1.0)}) {
    try {
      exact_transform_moments(f, VstVariant::mean_matching(), 0.5, 5);
      FAIL("expected UnsupportedFamily");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::UnsupportedFamily);
    }
  }
}

TEST_CASE("binomial curve ordering, m = 30") {
  const auto grid = linspace(0.1, 0.9, 17);
  const auto fam = FamilyModel::binomial(1);
  const double mm = max_abs_bias(bias_variance_curve(fam, VstVariant::custom(0.25), 30, grid));
  CHECK(mm < max_abs_bias(bias_variance_curve(fam, VstVariant::custom(0.0), 30, grid)));
  CHECK(mm < max_abs_bias(bias_variance_curve(fam, VstVariant::custom(0.375), 30, grid)));
}

TEST_CASE("poisson curve ordering, m = 30") {
  const auto grid = linspace(1.0, 10.0, 19);
  const auto fam = FamilyModel::poisson();
  const auto c14 = bias_variance_curve(fam, VstVariant::custom(0.25), 30, grid);
  CHECK(max_abs_bias(c14) < max_abs_bias(bias_variance_curve(fam, VstVariant::bartlett(), 30, grid)));
  for (const auto& p : c14.points) {
    if (p.mu >= 4.0) {
      CHECK(p.scaled_variance >= 0.95);
      CHECK(p.scaled_variance <= 1.05);
    }
  }
}

TEST_CASE("gamma offsets across m") {
  const auto fam = FamilyModel::gamma(1.0);
  for (int m = 3; m <= 40; ++m) {
    const double g = std::log(2.0);
    const double b12 = exact_transform_moments(fam, VstVariant::custom(0.5), 2.0, m).mean - g;
    const double b0 = exact_transform_moments(fam, VstVariant::custom(0.0), 2.0, m).mean - g;
    CAPTURE(m);
    CHECK(b12 == doctest::Approx(special::digamma(m) - std::log(m - 0.5)).epsilon(1e-10));
    CHECK(std::abs(b12) < std::abs(b0));
  }
}

TEST_CASE("bias order") {
  const int ms[] = {10, 20, 40, 80};
  const auto rows = bias_order_check(FamilyModel::poisson(), VstVariant::mean_matching(), 2.0, ms);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].m == ms[i]);
    CHECK(std::abs(rows[i].bias_m2) <= 1.0);
    CHECK(rows[i].bias_m2 == doctest::Approx(rows[i].bias * ms[i] * ms[i]));
    if (i > 0) {
      const double ratio = rows[i].bias / rows[i - 1].bias;
      CHECK(ratio >= 0.15);
      CHECK(ratio <= 0.40);
    }
  }
  const auto bart = bias_order_check(FamilyModel::poisson(), VstVariant::bartlett(), 2.0, ms);
  for (std::size_t i = 1; i < bart.size(); ++i) {
    const double ratio = bart[i].bias / bart[i - 1].bias;
    CHECK(ratio >= 0.4);
    CHECK(ratio <= 0.6);
  }
  const auto gam = bias_order_check(FamilyModel::gamma(1.0), VstVariant::mean_matching(), 1.0, ms);
  for (std::size_t i = 1; i < gam.size(); ++i) {
    const double ratio = gam[i].bias / gam[i - 1].bias;
    CHECK(ratio >= 0.15);
    CHECK(ratio <= 0.40);
  }
  const int bad[] = {10};
  CHECK_THROWS_AS(bias_order_check(FamilyModel::poisson(), VstVariant::mean_matching(), 2.0, bad),
                  Error);
}

TEST_CASE("truncation bound is honest") {
  const auto fam = FamilyModel::poisson();
  const auto mm = VstVariant::mean_matching();
  for (double lambda : {0.5, 3.0, 10.0}) {
    const int m = 20;
    const double total = lambda * m;
    for (std::size_t last : {static_cast<std::size_t>(total + 3.0 * std::sqrt(total)),
                             static_cast<std::size_t>(total + 6.0 * std::sqrt(total))}) {
      const auto part = detail::partial_sum_moments(fam, mm, lambda, m, last);
      const auto twice = detail::partial_sum_moments(fam, mm, lambda, m, 2 * last + 1);
      CAPTURE(lambda);
      CAPTURE(last);
      CHECK(std::abs(twice.mean - part.mean) <= part.truncation_bound);
    }
  }
}

TEST_CASE("curve validation and export") {
  const double bad_grid[] = {2.0, 1.0};
  CHECK_THROWS_AS(bias_variance_curve(FamilyModel::poisson(), VstVariant::mean_matching(), 5,
                                      bad_grid),
                  Error);
  const double outside[] = {0.5, 1.5};
  CHECK_THROWS_AS(bias_variance_curve(FamilyModel::binomial(1), VstVariant::mean_matching(), 5,
                                      outside),
                  Error);
  const double grid[] = {1.0, 2.0};
  const auto c = bias_variance_curve(FamilyModel::poisson(), VstVariant::mean_matching(), 5, grid);
  std::ostringstream os;
  write_curve_csv(os, c);
  const std::string s = os.str();
  CHECK(s.rfind("mu,scaled_bias,scaled_variance,truncation_bound\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 3);
}

TEST_CASE("monte carlo agrees with exact moments") {
  const auto fam = FamilyModel::poisson();
  const auto mm = VstVariant::mean_matching();
  const auto exact = exact_transform_moments(fam, mm, 2.0, 20);
  const std::size_t draws = 1000000;
  const auto mc = mc_transform_moments(fam, mm, 2.0, 20, draws, 2024);
  REQUIRE(mc.variance.has_value());
  CHECK(std::abs(mc.mean - exact.mean) <= 5.0 * std::sqrt(exact.variance / draws));
  // Var of the sample variance ~ 2 sigma^4 / draws for near-normal H.
  CHECK(std::abs(*mc.variance - exact.variance) <=
        5.0 * exact.variance * std::sqrt(2.0 / draws) * 1.5);

  const auto g = FamilyModel::gamma(2.0);
  const auto gx = exact_transform_moments(g, mm, 1.3, 4);
  const auto gm = mc_transform_moments(g, mm, 1.3, 4, draws, 9);
  CHECK(std::abs(gm.mean - gx.mean) <= 5.0 * std::sqrt(gx.variance / draws));
}
