#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "nefreg/binning.hpp"
#include "nefreg/error.hpp"

using namespace nefreg;

TEST_CASE("bin count rules") {
  CHECK(select_bin_count(4096, Regime::Qvf) == 512);
  CHECK(select_bin_count(4096, Regime::GeneralNef) == 64);
  CHECK(select_bin_count(7808, Regime::Qvf, 7.6) == 1024);
  CHECK(select_bin_count(640, Regime::Qvf, 5.0) == 128);
  CHECK(select_bin_count(640, Regime::Qvf, 4.9) == 128);
  CHECK(select_bin_count(640, Regime::Qvf, 5.1) == 64);
  // Nearest power of two to n^(3/4): 10000^(3/4) = 1000 -> 1024.
  CHECK(select_bin_count(10000, Regime::Qvf) == 1024);
  // Lower clamp at 2^(j0 + 1).
  CHECK(select_bin_count(64, Regime::GeneralNef) == 32);
  CHECK(select_bin_count(64, Regime::Qvf, 100.0) == 32);
  // Upper clamp at n.
  CHECK(select_bin_count(64, Regime::Qvf, 0.01) == 64);
}

TEST_CASE("too few observations") {
  try {
    select_bin_count(63, Regime::Qvf);
    FAIL("expected TooFewObservations");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooFewObservations);
  }
  CHECK_NOTHROW(select_bin_count(16, Regime::Qvf, std::nullopt, 2));
}

TEST_CASE("bin count is monotone in n") {
  for (auto regime : {Regime::Qvf, Regime::GeneralNef}) {
    std::size_t prev = 0;
    for (std::size_t n = 64; n < 200000; n = n * 9 / 8 + 1) {
      const std::size_t t = select_bin_count(n, regime);
      CHECK(t >= prev);
      CHECK((t & (t - 1)) == 0);
      prev = t;
    }
  }
}

TEST_CASE("bin sums") {
  const std::vector<double> a{1, 2, 3, 4};
  auto s = bin_sums(a, 2);
  CHECK(s.sums == std::vector<double>{3, 7});
  CHECK(s.sizes == std::vector<double>{2, 2});
  const std::vector<double> b{1, 2, 3, 4, 5};
  s = bin_sums(b, 2);
  CHECK(s.sums == std::vector<double>{6, 9});
  CHECK(s.sizes == std::vector<double>{3, 2});
  const std::vector<double> zeros(37, 0.0);
  for (std::size_t t : {1u, 5u, 37u}) {
    s = bin_sums(zeros, t);
    for (double v : s.sums) CHECK(v == 0.0);
  }
  CHECK_THROWS_AS(bin_sums(a, 0), Error);
  CHECK_THROWS_AS(bin_sums(a, 5), Error);
}

TEST_CASE("bins partition the sample") {
  for (std::size_t n : {17u, 64u, 100u, 641u}) {
    for (std::size_t t : {1u, 3u, 16u}) {
      // Encode the index so each sum identifies its range.
      std::vector<double> y(n);
      std::iota(y.begin(), y.end(), 0.0);
      const auto s = bin_sums(y, t);
      std::size_t pos = 0;
      for (std::size_t j = 0; j < t; ++j) {
        const auto len = static_cast<std::size_t>(s.sizes[j]);
        CHECK((len == n / t || len == n / t + 1));
        CHECK((len == n / t + 1) == (j < n % t));
        double want = 0.0;
        for (std::size_t i = pos; i < pos + len; ++i) want += static_cast<double>(i);
        CHECK(s.sums[j] == want);
        pos += len;
      }
      CHECK(pos == n);
    }
  }
}

TEST_CASE("transformed bins") {
  const std::vector<double> sums{1, 4}, sizes{4, 4};
  const auto b =
      transform_bins(sums, sizes, FamilyModel::poisson(), VstVariant::mean_matching());
  REQUIRE(b.transformed.size() == 2);
  CHECK(b.transformed[0] == doctest::Approx(1.118034).epsilon(1e-6));
  CHECK(b.transformed[1] == doctest::Approx(2.061553).epsilon(1e-6));
  CHECK(b.t_count == 2);

  const std::vector<double> gs{3}, gm{2};
  const auto g = transform_bins(gs, gm, FamilyModel::gamma(1.0), VstVariant::mean_matching());
  CHECK(g.transformed[0] == doctest::Approx(std::log(2.0)));

  const std::vector<double> bs{1, 5, 0}, bm{3, 3, 3};
  try {
    transform_bins(bs, bm, FamilyModel::binomial(1), VstVariant::mean_matching());
    FAIL("expected DomainError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DomainError);
    REQUIRE(e.index().has_value());
    CHECK(*e.index() == 1);
  }
  const std::vector<double> short_sizes{3};
  CHECK_THROWS_AS(transform_bins(bs, short_sizes, FamilyModel::poisson(),
                                 VstVariant::mean_matching()),
                  Error);
}

TEST_CASE("constant data gives identical transformed values per bin size") {
  const std::vector<double> y(100, 2.0);
  const auto s = bin_sums(y, 16);
  const auto b = transform_bins(s.sums, s.sizes, FamilyModel::poisson(),
                                VstVariant::mean_matching());
  for (std::size_t j = 1; j < 16; ++j) {
    if (s.sizes[j] == s.sizes[0]) CHECK(b.transformed[j] == b.transformed[0]);
  }
}
