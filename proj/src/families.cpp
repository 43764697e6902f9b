#include "nefreg/families.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "nefreg/error.hpp"

namespace nefreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::ConfigError, what);
}

std::string fmt_param(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

[[noreturn]] void unsupported(const FamilyModel& family, const VstVariant& variant) {
  throw Error(ErrorKind::UnsupportedVariant,
              "variant " + variant.name() + " is not defined for " + family.name());
}

}  // namespace

FamilyModel FamilyModel::poisson() { return FamilyModel(FamilyKind::Poisson, 1.0, 0.0, 0.0); }

FamilyModel FamilyModel::binomial(int r) {
  require(r >= 1, "binomial r must be a positive integer");
  return FamilyModel(FamilyKind::Binomial, r, 0.0, 0.0);
}

FamilyModel FamilyModel::neg_binomial(double r) {
  require(r > 0.0 && std::isfinite(r), "negative binomial r must be positive");
  return FamilyModel(FamilyKind::NegBinomial, r, 0.0, 0.0);
}

FamilyModel FamilyModel::gamma(double r) {
  require(r > 0.0 && std::isfinite(r), "gamma r must be positive");
  return FamilyModel(FamilyKind::Gamma, r, 0.0, 0.0);
}

FamilyModel FamilyModel::nef_ghs(double r) {
  require(r > 0.0 && std::isfinite(r), "NEF-GHS r must be positive");
  return FamilyModel(FamilyKind::NefGhs, r, 0.0, 0.0);
}

FamilyModel FamilyModel::gamma_poisson(double sigma) {
  require(sigma > 0.0 && std::isfinite(sigma), "gamma-Poisson sigma must be positive");
  return FamilyModel(FamilyKind::GammaPoisson, 1.0, sigma, 0.0);
}

FamilyModel FamilyModel::beta_binomial(int r, double k, double sigma) {
  require(r >= 1, "beta-binomial r must be a positive integer");
  require(k > 0.0 && std::isfinite(k), "beta-binomial k must be positive");
  require(sigma >= 0.0 && std::isfinite(sigma), "beta-binomial sigma must be nonnegative");
  return FamilyModel(FamilyKind::BetaBinomial, r, sigma, k);
}

Interval FamilyModel::mean_domain() const noexcept {
  switch (kind_) {
    case FamilyKind::Binomial: return {0.0, r_};
    case FamilyKind::NefGhs: return {-kInf, kInf};
    case FamilyKind::BetaBinomial: return {0.0, 1.0};
    default: return {0.0, kInf};
  }
}

Interval FamilyModel::g_range() const noexcept {
  switch (kind_) {
    case FamilyKind::Binomial: return {0.0, std::numbers::pi * std::sqrt(r_)};
    case FamilyKind::BetaBinomial: return {0.0, std::numbers::pi};
    case FamilyKind::Gamma:
    case FamilyKind::NefGhs: return {-kInf, kInf};
    default: return {0.0, kInf};
  }
}

std::optional<QvfCoefficients> FamilyModel::qvf() const noexcept {
  switch (kind_) {
    case FamilyKind::Poisson: return QvfCoefficients{0.0, 1.0, 0.0};
    case FamilyKind::Binomial: return QvfCoefficients{0.0, 1.0, -1.0 / r_};
    case FamilyKind::NegBinomial: return QvfCoefficients{0.0, 1.0, 1.0 / r_};
    case FamilyKind::Gamma: return QvfCoefficients{0.0, 0.0, 1.0 / r_};
    case FamilyKind::NefGhs: return QvfCoefficients{r_, 0.0, 1.0 / r_};
    default: return std::nullopt;
  }
}

bool FamilyModel::is_discrete() const noexcept {
  return kind_ != FamilyKind::Gamma && kind_ != FamilyKind::NefGhs;
}

std::string FamilyModel::name() const {
  switch (kind_) {
    case FamilyKind::Poisson: return "poisson";
    case FamilyKind::Binomial: return "binomial(r=" + fmt_param(r_) + ")";
    case FamilyKind::NegBinomial: return "negbin(r=" + fmt_param(r_) + ")";
    case FamilyKind::Gamma: return "gamma(r=" + fmt_param(r_) + ")";
    case FamilyKind::NefGhs: return "nefghs(r=" + fmt_param(r_) + ")";
    case FamilyKind::GammaPoisson: return "gamma-poisson(sigma=" + fmt_param(sigma_) + ")";
    case FamilyKind::BetaBinomial:
      return "beta-binomial(r=" + fmt_param(r_) + ",k=" + fmt_param(k_) +
             ",sigma=" + fmt_param(sigma_) + ")";
  }
  return "unknown";
}

std::string VstVariant::name() const {
  switch (kind_) {
    case Kind::MeanMatching: return "mm";
    case Kind::Bartlett: return "bartlett";
    case Kind::Anscombe: return "anscombe";
    case Kind::GeneralNef: return "general";
    case Kind::CustomOffset: return "c=" + fmt_param(offset_);
  }
  return "unknown";
}

VstConstants vst_constants(const FamilyModel& family, const VstVariant& variant) {
  using K = VstVariant::Kind;
  if (variant.kind() == K::GeneralNef) return {0.0, 0.0};

  const double r = family.r();
  if (variant.kind() == K::MeanMatching) {
    if (auto q = family.qvf()) return {q->a1 / 4.0, -q->a2 / 2.0};
    const double shift = (family.sigma() + 1.0) / 4.0;
    if (family.kind() == FamilyKind::GammaPoisson) return {shift, 0.0};
    return {shift, 2.0 * shift / r};  // BetaBinomial
  }

  const double c = variant.offset();
  switch (family.kind()) {
    case FamilyKind::Poisson: return {c, 0.0};
    case FamilyKind::Binomial: return {c, 2.0 * c / r};
    case FamilyKind::Gamma:
      if (variant.kind() == K::CustomOffset) return {0.0, -c / r};
      break;
    default: break;
  }
  unsupported(family, variant);
}

double g_apply(const FamilyModel& family, double mu) {
  const Interval dom = family.mean_domain();
  if (!dom.contains_closed(mu) || std::isnan(mu)) {
    throw Error(ErrorKind::DomainError,
                "mean " + fmt_param(mu) + " outside the domain of " + family.name());
  }
  const double r = family.r();
  switch (family.kind()) {
    case FamilyKind::Poisson:
    case FamilyKind::GammaPoisson: return 2.0 * std::sqrt(mu);
    case FamilyKind::Binomial: return 2.0 * std::sqrt(r) * std::asin(std::sqrt(mu / r));
    case FamilyKind::NegBinomial: return 2.0 * std::sqrt(r) * std::asinh(std::sqrt(mu / r));
    case FamilyKind::Gamma:
      if (!(mu > 0.0) || std::isinf(mu)) {
        throw Error(ErrorKind::DomainError, "log transform needs a finite positive mean");
      }
      return std::sqrt(r) * std::log(mu);
    case FamilyKind::NefGhs:
      if (std::isinf(mu)) throw Error(ErrorKind::DomainError, "NEF-GHS mean must be finite");
      return std::sqrt(r) * std::asinh(mu / r);
    case FamilyKind::BetaBinomial: return 2.0 * std::asin(std::sqrt(mu));
  }
  return 0.0;
}

bool g_inverse_clamps(const FamilyModel& family, double y) noexcept {
  return !family.g_range().contains_closed(y);
}

double g_inverse(const FamilyModel& family, double y) {
  const double r = family.r();
  const double v = family.g_range().clamp(y);
  switch (family.kind()) {
    case FamilyKind::Poisson:
    case FamilyKind::GammaPoisson: return 0.25 * v * v;
    case FamilyKind::Binomial: {
      const double s = std::sin(v / (2.0 * std::sqrt(r)));
      return std::min(r, r * s * s);
    }
    case FamilyKind::NegBinomial: {
      const double s = std::sinh(v / (2.0 * std::sqrt(r)));
      return r * s * s;
    }
    case FamilyKind::Gamma: return std::exp(v / std::sqrt(r));
    case FamilyKind::NefGhs: return r * std::sinh(v / std::sqrt(r));
    case FamilyKind::BetaBinomial: {
      const double s = std::sin(0.5 * v);
      return std::min(1.0, s * s);
    }
  }
  return 0.0;
}

double hm_transform(const FamilyModel& family, const VstVariant& variant, double x, double m) {
  if (!(m > 0.0) || !std::isfinite(m)) {
    throw Error(ErrorKind::DomainError, "bin size must be positive");
  }
  if (!std::isfinite(x) || (family.is_discrete() && x < 0.0)) {
    throw Error(ErrorKind::DomainError, "bin sum " + fmt_param(x) + " is not realizable for " +
                                            family.name());
  }
  const VstConstants c = vst_constants(family, variant);
  const double denom = m + c.b;
  if (!(denom > 0.0)) {
    throw Error(ErrorKind::DomainError, "shifted bin size m + b is not positive");
  }
  const double mu = (x + c.a) / denom;
  if (family.kind() == FamilyKind::BetaBinomial) {
    const double p = mu / family.r();
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorKind::DomainError,
                  "shifted proportion " + fmt_param(p) + " outside [0, 1]");
    }
    return std::sqrt(family.r()) * g_apply(family, p);
  }
  return g_apply(family, mu);
}

double variance_at(const FamilyModel& family, double mu) {
  if (!family.mean_domain().contains_open(mu)) {
    throw Error(ErrorKind::DomainError,
                "mean " + fmt_param(mu) + " outside the domain of " + family.name());
  }
  if (auto q = family.qvf()) return q->a0 + mu * (q->a1 + mu * q->a2);
  const double r = family.r();
  if (family.kind() == FamilyKind::GammaPoisson) return mu * (1.0 + family.sigma());
  // Beta-binomial proportion X / r with intra-class correlation 1 / (k + 1).
  return mu * (1.0 - mu) * (1.0 + (r - 1.0) / (family.k() + 1.0)) / r;
}

double sample(const FamilyModel& family, double mu, RandomStream& rng) {
  if (family.kind() == FamilyKind::NefGhs) {
    throw Error(ErrorKind::UnsupportedSampling, "no sampler for NEF-GHS");
  }
  if (!family.mean_domain().contains_open(mu)) {
    throw Error(ErrorKind::DomainError,
                "mean " + fmt_param(mu) + " outside the domain of " + family.name());
  }
  auto& eng = rng.engine();
  const double r = family.r();
  switch (family.kind()) {
    case FamilyKind::Poisson:
      return static_cast<double>(std::poisson_distribution<long long>(mu)(eng));
    case FamilyKind::Binomial:
      return static_cast<double>(
          std::binomial_distribution<int>(static_cast<int>(r), mu / r)(eng));
    case FamilyKind::NegBinomial: {
      const double z = std::gamma_distribution<double>(r, mu / r)(eng);
      if (z <= 0.0) return 0.0;
      return static_cast<double>(std::poisson_distribution<long long>(z)(eng));
    }
    case FamilyKind::Gamma: return std::gamma_distribution<double>(r, mu / r)(eng);
    case FamilyKind::GammaPoisson: {
      const double s = family.sigma();
      const double z = std::gamma_distribution<double>(mu / s, s)(eng);
      if (z <= 0.0) return 0.0;
      return static_cast<double>(std::poisson_distribution<long long>(z)(eng));
    }
    case FamilyKind::BetaBinomial: {
      const double k = family.k();
      const double g1 = std::gamma_distribution<double>(mu * k, 1.0)(eng);
      const double g2 = std::gamma_distribution<double>((1.0 - mu) * k, 1.0)(eng);
      const double total = g1 + g2;
      const double p = total > 0.0 ? g1 / total : mu;
      return static_cast<double>(std::binomial_distribution<int>(static_cast<int>(r), p)(eng));
    }
    case FamilyKind::NefGhs: break;
  }
  return 0.0;
}

double sample_sum(const FamilyModel& family, double mu, int m, RandomStream& rng) {
  if (m < 1) throw Error(ErrorKind::DomainError, "sum needs at least one draw");
  switch (family.kind()) {
    case FamilyKind::Poisson: return sample(family, mu * m, rng);
    case FamilyKind::Binomial:
      return sample(FamilyModel::binomial(static_cast<int>(family.r()) * m), mu * m, rng);
    case FamilyKind::NegBinomial:
      return sample(FamilyModel::neg_binomial(family.r() * m), mu * m, rng);
    case FamilyKind::Gamma: return sample(FamilyModel::gamma(family.r() * m), mu * m, rng);
    case FamilyKind::GammaPoisson: return sample(family, mu * m, rng);
    default: break;
  }
  double total = 0.0;
  for (int i = 0; i < m; ++i) total += sample(family, mu, rng);
  return total;
}

}  // namespace nefreg
