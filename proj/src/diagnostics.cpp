#include "nefreg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>

#include "nefreg/error.hpp"
#include "nefreg/special.hpp"

namespace nefreg {

namespace {

constexpr double kTailTolerance = 1e-12;
constexpr std::size_t kMaxTerms = 1'000'000;

// Law of the bin sum X for the discrete exact-moment families.
struct SumLaw {
  FamilyKind kind;
  double mean = 0.0;  // Poisson parameter
  double shape = 0.0; // NegBinomial R = r m
  double q = 0.0;     // NegBinomial failure probability mu / (r + mu)
  long long trials = 0;  // Binomial N = r m
  double p = 0.0;        // Binomial success probability

  std::optional<long long> support_max() const {
    if (kind == FamilyKind::Binomial) return trials;
    return std::nullopt;
  }

  double log_pmf(long long k) const {
    const double kd = static_cast<double>(k);
    switch (kind) {
      case FamilyKind::Poisson:
        return kd * std::log(mean) - mean - std::lgamma(kd + 1.0);
      case FamilyKind::NegBinomial:
        return std::lgamma(kd + shape) - std::lgamma(shape) - std::lgamma(kd + 1.0) +
               shape * std::log1p(-q) + kd * std::log(q);
      case FamilyKind::Binomial: {
        const double n = static_cast<double>(trials);
        return std::lgamma(n + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(n - kd + 1.0) +
               kd * std::log(p) + (n - kd) * std::log1p(-p);
      }
      default: return -std::numeric_limits<double>::infinity();
    }
  }

  // Upper bound on p_{k+1} / p_k over all k > last.
  double ratio_bound(long long last) const {
    const double next = static_cast<double>(last + 1);
    if (kind == FamilyKind::Poisson) return mean / (next + 1.0);
    const double growth = shape >= 1.0 ? (next + shape) / (next + 1.0) : 1.0;
    return q * growth;
  }
};

// Bound on E[1 + H(X)^2; X > last]. Root and asinh transforms satisfy
// H(k)^2 <= 4 (k + a) / (m + b), so 1 + H(k)^2 <= alpha + beta k, and the pmf
// decays at least geometrically past last. Infinite when no ratio bound < 1.
double tail_bound(const SumLaw& law, const VstConstants& c, int m, long long last) {
  const double rho = law.ratio_bound(last);
  if (rho >= 1.0) return std::numeric_limits<double>::infinity();
  const double beta = 4.0 / (m + c.b);
  const double alpha = 1.0 + beta * std::max(c.a, 0.0);
  const double next_p = std::exp(law.log_pmf(last + 1));
  const double first = static_cast<double>(last + 1);
  return next_p * ((alpha + beta * first) / (1.0 - rho) +
                   beta * rho / ((1.0 - rho) * (1.0 - rho)));
}

// Point mass when mu sits on the closed boundary of the mean domain.
std::optional<double> boundary_atom(const FamilyModel& family, double mu, int m) {
  const Interval dom = family.mean_domain();
  if (mu == dom.lo) return 0.0;
  if (family.kind() == FamilyKind::Binomial && mu == dom.hi) return family.r() * m;
  return std::nullopt;
}

SumLaw sum_law(const FamilyModel& family, double mu, int m) {
  SumLaw law{family.kind()};
  const double r = family.r();
  switch (family.kind()) {
    case FamilyKind::Poisson: law.mean = mu * m; break;
    case FamilyKind::NegBinomial:
      law.shape = r * m;
      law.q = mu / (r + mu);
      break;
    case FamilyKind::Binomial:
      law.trials = static_cast<long long>(r) * m;
      law.p = mu / r;
      break;
    default: break;
  }
  return law;
}

void check_inputs(const FamilyModel& family, double mu, int m) {
  if (m < 1) throw Error(ErrorKind::DomainError, "m must be a positive integer");
  const auto kind = family.kind();
  if (kind != FamilyKind::Poisson && kind != FamilyKind::Binomial &&
      kind != FamilyKind::NegBinomial && kind != FamilyKind::Gamma) {
    throw Error(ErrorKind::UnsupportedFamily, "no exact moments for " + family.name());
  }
  const Interval dom = family.mean_domain();
  const bool boundary_ok = kind != FamilyKind::Gamma && dom.contains_closed(mu) &&
                           std::isfinite(mu);
  if (!dom.contains_open(mu) && !boundary_ok) {
    throw Error(ErrorKind::DomainError, "mean outside the domain of " + family.name());
  }
}

TransformMoments gamma_moments(const FamilyModel& family, const VstVariant& variant, double mu,
                               int m) {
  const double r = family.r();
  const VstConstants c = vst_constants(family, variant);
  const double denom = m + c.b;
  if (!(denom > 0.0)) throw Error(ErrorKind::DomainError, "m + b is not positive");
  // X ~ Gamma(shape r m, rate r / mu): E ln X = psi(rm) + ln(mu / r).
  const double bias = std::sqrt(r) * (special::digamma(r * m) - std::log(r * denom));
  return {g_apply(family, mu) + bias, r * special::trigamma(r * m), 0.0};
}

struct Accumulated {
  std::vector<double> weights;
  std::vector<double> values;
};

TransformMoments finish(const Accumulated& acc, double tail) {
  double mean = 0.0;
  for (std::size_t i = 0; i < acc.weights.size(); ++i) mean += acc.weights[i] * acc.values[i];
  double var = 0.0;
  for (std::size_t i = 0; i < acc.weights.size(); ++i) {
    const double d = acc.values[i] - mean;
    var += acc.weights[i] * d * d;
  }
  // tail bounds E[1 + H^2; X > K]; the variance misses at most
  // E[(H - mean)^2; X > K] <= 2 (1 + mean^2) tail, plus the mean shift squared.
  const double bound = tail > 0.0 ? std::max(tail, 2.0 * (1.0 + mean * mean) * tail + tail * tail)
                                  : 0.0;
  return {mean, var, bound};
}

}  // namespace

TransformMoments exact_transform_moments(const FamilyModel& family, const VstVariant& variant,
                                         double mu, int m) {
  check_inputs(family, mu, m);
  if (family.kind() == FamilyKind::Gamma) return gamma_moments(family, variant, mu, m);

  if (auto atom = boundary_atom(family, mu, m)) {
    return {hm_transform(family, variant, *atom, m), 0.0, 0.0};
  }

  const SumLaw law = sum_law(family, mu, m);
  Accumulated acc;
  if (auto last = law.support_max()) {
    acc.weights.reserve(static_cast<std::size_t>(*last) + 1);
    for (long long k = 0; k <= *last; ++k) {
      acc.weights.push_back(std::exp(law.log_pmf(k)));
      acc.values.push_back(hm_transform(family, variant, static_cast<double>(k), m));
    }
    return finish(acc, 0.0);
  }

  for (long long k = 0;; ++k) {
    if (static_cast<std::size_t>(k) >= kMaxTerms) {
      throw Error(ErrorKind::UnsupportedFamily,
                  "exact summation for " + family.name() + " needs more than 10^6 terms");
    }
    acc.weights.push_back(std::exp(law.log_pmf(k)));
    acc.values.push_back(hm_transform(family, variant, static_cast<double>(k), m));
    const double tail = tail_bound(law, vst_constants(family, variant), m, k);
    if (tail > kTailTolerance) continue;
    const TransformMoments out = finish(acc, tail);
    if (out.truncation_bound <= kTailTolerance) return out;
  }
}

namespace detail {

TransformMoments partial_sum_moments(const FamilyModel& family, const VstVariant& variant,
                                     double mu, int m, std::size_t last_index) {
  check_inputs(family, mu, m);
  const SumLaw law = sum_law(family, mu, m);
  Accumulated acc;
  long long last = static_cast<long long>(last_index);
  if (auto top = law.support_max()) last = std::min(last, *top);
  for (long long k = 0; k <= last; ++k) {
    acc.weights.push_back(std::exp(law.log_pmf(k)));
    acc.values.push_back(hm_transform(family, variant, static_cast<double>(k), m));
  }
  if (law.support_max() && last == *law.support_max()) return finish(acc, 0.0);
  return finish(acc, tail_bound(law, vst_constants(family, variant), m, last));
}

}  // namespace detail

DiagCurve bias_variance_curve(const FamilyModel& family, const VstVariant& variant, int m,
                              std::span<const double> mu_grid) {
  if (mu_grid.empty()) throw Error(ErrorKind::BadShape, "empty mean grid");
  DiagCurve curve{family, m, variant, {}};
  curve.points.reserve(mu_grid.size());
  const double root_m = std::sqrt(static_cast<double>(m));
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mu_grid.size(); ++i) {
    const double mu = mu_grid[i];
    if (!(mu > prev)) throw Error(ErrorKind::BadShape, "mean grid must increase strictly", i);
    if (!family.mean_domain().contains_open(mu)) {
      throw Error(ErrorKind::DomainError, "grid point outside the open mean domain", i);
    }
    prev = mu;
    const TransformMoments mom = exact_transform_moments(family, variant, mu, m);
    curve.points.push_back({mu, root_m * (mom.mean - g_apply(family, mu)),
                            static_cast<double>(m) * mom.variance, mom.truncation_bound});
  }
  return curve;
}

std::vector<BiasOrderRow> bias_order_check(const FamilyModel& family, const VstVariant& variant,
                                           double mu, std::span<const int> m_list) {
  if (m_list.size() < 2) throw Error(ErrorKind::BadShape, "need at least two bin sizes");
  std::vector<BiasOrderRow> rows;
  rows.reserve(m_list.size());
  const double target = g_apply(family, mu);
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    const int m = m_list[i];
    if (i > 0 && m <= m_list[i - 1]) {
      throw Error(ErrorKind::BadShape, "bin sizes must increase", i);
    }
    const double bias = exact_transform_moments(family, variant, mu, m).mean - target;
    rows.push_back({m, bias, bias * static_cast<double>(m) * m});
  }
  return rows;
}

void write_curve_csv(std::ostream& os, const DiagCurve& curve) {
  os << "mu,scaled_bias,scaled_variance,truncation_bound\n";
  char buf[128];
  for (const auto& p : curve.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", p.mu, p.scaled_bias,
                  p.scaled_variance, p.truncation_bound);
    os << buf;
  }
}

}  // namespace nefreg
