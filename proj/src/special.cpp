#include "nefreg/special.hpp"

#include <cmath>

#include "nefreg/error.hpp"

namespace nefreg::special {

namespace {

constexpr double kAsymptoticFrom = 8.0;

void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw Error(ErrorKind::DomainError,
                std::string(name) + " requires a finite positive argument");
  }
}

}  // namespace

double digamma(double x) {
  require_positive(x, "digamma");
  double shift = 0.0;
  while (x < kAsymptoticFrom) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  // Bernoulli-number tail: -sum B_2k / (2k x^2k), k = 1..7.
  const double z = 1.0 / (x * x);
  const double tail =
      z * (1.0 / 12 -
           z * (1.0 / 120 -
                z * (1.0 / 252 -
                     z * (1.0 / 240 - z * (1.0 / 132 - z * (691.0 / 32760 - z * (1.0 / 12)))))));
  return shift + std::log(x) - 0.5 / x - tail;
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  double shift = 0.0;
  while (x < kAsymptoticFrom) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double z = inv * inv;
  // 1/x + 1/(2x^2) + sum B_2k / x^(2k+1), k = 1..7.
  const double series =
      inv * (1.0 + inv * 0.5 +
             z * (1.0 / 6 -
                  z * (1.0 / 30 -
                       z * (1.0 / 42 -
                            z * (1.0 / 30 - z * (5.0 / 66 - z * (691.0 / 2730 - z * (7.0 / 6))))))));
  return shift + series;
}

}  // namespace nefreg::special
