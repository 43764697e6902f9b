#pragma once

#include <optional>
#include <string>

#include "nefreg/random.hpp"

namespace nefreg {

enum class FamilyKind {
  Poisson,
  Binomial,
  NegBinomial,
  Gamma,
  NefGhs,
  GammaPoisson,
  BetaBinomial,
};

struct Interval {
  double lo;
  double hi;

  bool contains_open(double x) const noexcept { return x > lo && x < hi; }
  bool contains_closed(double x) const noexcept { return x >= lo && x <= hi; }
  double clamp(double x) const noexcept { return x < lo ? lo : (x > hi ? hi : x); }
};

// V(mu) = a0 + a1 mu + a2 mu^2.
struct QvfCoefficients {
  double a0;
  double a1;
  double a2;
};

// One observation model, parameterized on the mean scale.
//
// Binomial, NegBinomial, Gamma and NEF-GHS carry a known shape r. The two
// over-dispersed families carry their nuisance constants: GammaPoisson the
// latent gamma scale sigma; BetaBinomial the trial count r, the Beta
// concentration k = a + b, and the shift constant sigma used by its
// mean-matching transform. For BetaBinomial the mean parameter is the
// per-trial success probability, so a draw X has E[X] = r mu.
class FamilyModel {
 public:
  static FamilyModel poisson();
  static FamilyModel binomial(int r = 1);
  static FamilyModel neg_binomial(double r = 1.0);
  static FamilyModel gamma(double r = 1.0);
  static FamilyModel nef_ghs(double r = 1.0);
  static FamilyModel gamma_poisson(double sigma);
  static FamilyModel beta_binomial(int r, double k, double sigma);

  FamilyKind kind() const noexcept { return kind_; }
  double r() const noexcept { return r_; }
  double sigma() const noexcept { return sigma_; }
  double k() const noexcept { return k_; }

  // Open interval of admissible means.
  Interval mean_domain() const noexcept;
  // Closed range of G over the closure of the mean domain.
  Interval g_range() const noexcept;
  // Present for the five NEF-QVF kinds only.
  std::optional<QvfCoefficients> qvf() const noexcept;
  bool is_discrete() const noexcept;

  // Short identifier, e.g. "poisson" or "binomial(r=4)".
  std::string name() const;

 private:
  FamilyModel(FamilyKind kind, double r, double sigma, double k)
      : kind_(kind), r_(r), sigma_(sigma), k_(k) {}

  FamilyKind kind_;
  double r_;
  double sigma_;
  double k_;
};

struct VstConstants {
  double a;
  double b;
};

// Which shift constants to use in H_m(x) = G((x + a) / (m + b)).
class VstVariant {
 public:
  enum class Kind { MeanMatching, Bartlett, Anscombe, GeneralNef, CustomOffset };

  static VstVariant mean_matching() { return VstVariant(Kind::MeanMatching, 0.25); }
  static VstVariant bartlett() { return VstVariant(Kind::Bartlett, 0.0); }
  static VstVariant anscombe() { return VstVariant(Kind::Anscombe, 0.375); }
  static VstVariant general_nef() { return VstVariant(Kind::GeneralNef, 0.0); }
  static VstVariant custom(double offset) { return VstVariant(Kind::CustomOffset, offset); }

  Kind kind() const noexcept { return kind_; }
  // The root/arcsine offset c this variant stands for. MeanMatching reports
  // 1/4, its value for the Poisson and Binomial transforms.
  double offset() const noexcept { return offset_; }
  std::string name() const;

  friend bool operator==(const VstVariant&, const VstVariant&) = default;

 private:
  VstVariant(Kind kind, double offset) : kind_(kind), offset_(offset) {}

  Kind kind_;
  double offset_;
};

// (a, b) for the variant. Bartlett and Anscombe exist for Poisson and Binomial
// only; CustomOffset(c) is the root transform (x + c) / m for Poisson, the
// arcsine transform (x + c) / (rm + 2c) for Binomial, and the log transform
// x / (m - c/r) for Gamma.
VstConstants vst_constants(const FamilyModel& family, const VstVariant& variant);

// G(mu). Accepts the closure of the mean domain wherever G is finite.
double g_apply(const FamilyModel& family, double mu);

// G^{-1}(y), clamping y to the range of G first. Total.
double g_inverse(const FamilyModel& family, double y);

// True when g_inverse would clamp y.
bool g_inverse_clamps(const FamilyModel& family, double y) noexcept;

// H_m(x) for a bin sum x over m observations.
double hm_transform(const FamilyModel& family, const VstVariant& variant, double x, double m);

// V(mu). For BetaBinomial this is the variance of X / r.
double variance_at(const FamilyModel& family, double mu);

// One draw with mean mu (r mu for BetaBinomial). Not available for NEF-GHS.
double sample(const FamilyModel& family, double mu, RandomStream& rng);

// Sum of m independent draws with mean mu. Uses the closed-form law of the
// sum where the family is closed under convolution.
double sample_sum(const FamilyModel& family, double mu, int m, RandomStream& rng);

}  // namespace nefreg
