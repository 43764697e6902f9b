#pragma once

namespace nefreg::special {

inline constexpr double euler_gamma = 0.57721566490153286060651209008240243;

// Digamma psi(x) for x > 0. Recurrence up to x >= 8, then the asymptotic
// series; absolute error below 1e-13 over the positive axis.
double digamma(double x);

// Trigamma psi'(x) for x > 0, same scheme as digamma.
double trigamma(double x);

}  // namespace nefreg::special
