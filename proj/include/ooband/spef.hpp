#pragma once
// Single-parameter exponential family (SPEF) primitives: KL divergence,
// the two-point weighted-KL infimum, and KL-ball confidence inversion.
// Every distribution in a family is identified by its mean, so all
// operations work directly on mean values.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ooband {

// Margin by which Bernoulli means are kept away from {0,1}: the KL
// divergence blows up at the boundary and the model assumes interior means.
inline constexpr double kBernoulliMeanMargin = 1e-9;

// Absolute tolerance (on the mean axis) for confidence-bound bisections.
inline constexpr double kConfidenceBisectionTol = 1e-9;

enum class FamilyKind { Bernoulli, GaussianUnitVariance };

// A reward-distribution family where members are indexed by their means.
// Bernoulli means live strictly inside (0,1); Gaussian (unit variance)
// means live in a finite configured interval, default [-10, 10], which
// bounds confidence-interval clamping.
class DistributionFamily {
 public:
  static DistributionFamily bernoulli() {
    return DistributionFamily(FamilyKind::Bernoulli, kBernoulliMeanMargin,
                              1.0 - kBernoulliMeanMargin);
  }

  static DistributionFamily gaussian_unit_variance(double m_lo = -10.0,
                                                   double m_hi = 10.0) {
    if (!(m_lo < m_hi) || !std::isfinite(m_lo) || !std::isfinite(m_hi)) {
      throw std::invalid_argument(
          "ooband::DistributionFamily: Gaussian mean interval must be a "
          "finite nonempty interval");
    }
    return DistributionFamily(FamilyKind::GaussianUnitVariance, m_lo, m_hi);
  }

  FamilyKind kind() const { return kind_; }
  bool is_bernoulli() const { return kind_ == FamilyKind::Bernoulli; }
  double mean_lo() const { return lo_; }
  double mean_hi() const { return hi_; }

  bool admissible(double m) const {
    return std::isfinite(m) && m >= lo_ && m <= hi_;
  }

  void require_admissible(double m, const char* where) const {
    if (!admissible(m)) {
      throw std::domain_error(std::string("ooband::") + where +
                              ": mean " + std::to_string(m) +
                              " outside admissible range [" +
                              std::to_string(lo_) + ", " + std::to_string(hi_) +
                              "]");
    }
  }

  // Pulls a raw empirical mean into the admissible range. For Bernoulli this
  // clamps all-0/all-1 sample means a margin away from the boundary.
  double clamp_mean(double m) const { return std::clamp(m, lo_, hi_); }

 private:
  DistributionFamily(FamilyKind kind, double lo, double hi)
      : kind_(kind), lo_(lo), hi_(hi) {}

  FamilyKind kind_;
  double lo_;
  double hi_;
};

// KL divergence between the family members with means m1 and m2.
// Bernoulli: m1 log(m1/m2) + (1-m1) log((1-m1)/(1-m2)).
// Gaussian unit variance: (m1-m2)^2 / 2.
inline double kl(const DistributionFamily& family, double m1, double m2) {
  family.require_admissible(m1, "kl");
  family.require_admissible(m2, "kl");
  switch (family.kind()) {
    case FamilyKind::Bernoulli:
      if (m1 == m2) return 0.0;
      return m1 * std::log(m1 / m2) +
             (1.0 - m1) * std::log((1.0 - m1) / (1.0 - m2));
    case FamilyKind::GaussianUnitVariance: {
      const double d = m1 - m2;
      return 0.5 * d * d;
    }
  }
  throw std::logic_error("ooband::kl: unknown family");
}

// Minimizer of x -> lambda1*KL(m1,x) + lambda2*KL(m2,x). For any SPEF the
// infimum is attained at the weight-averaged mean, independent of the family.
inline double weighted_infimizer(double lambda1, double m1, double lambda2,
                                 double m2) {
  if (lambda1 < 0.0 || lambda2 < 0.0) {
    throw std::invalid_argument(
        "ooband::weighted_infimizer: negative weight");
  }
  const double total = lambda1 + lambda2;
  if (total <= 0.0) {
    throw std::invalid_argument(
        "ooband::weighted_infimizer: degenerate weights (lambda1+lambda2=0)");
  }
  return (lambda1 * m1 + lambda2 * m2) / total;
}

// inf over x of lambda1*KL(m1,x) + lambda2*KL(m2,x), evaluated at the
// infimizer above. Nondecreasing in each weight; zero when either weight is
// zero or the means coincide.
inline double weighted_index(const DistributionFamily& family, double lambda1,
                             double m1, double lambda2, double m2) {
  if (lambda1 == 0.0 && lambda2 == 0.0) return 0.0;
  if (lambda1 == 0.0 || lambda2 == 0.0 || m1 == m2) return 0.0;
  const double x = weighted_infimizer(lambda1, m1, lambda2, m2);
  return lambda1 * kl(family, m1, x) + lambda2 * kl(family, m2, x);
}

namespace detail {

// Solves n*KL(m_hat, x) = level on one monotone branch by bisection.
// `upper` selects the right branch (x >= m_hat) or the left one.
inline double kl_confidence_bound(const DistributionFamily& family,
                                  double m_hat, double n, double level,
                                  bool upper) {
  family.require_admissible(m_hat, "kl_confidence_bound");
  if (!(n > 0.0)) {
    throw std::invalid_argument(
        "ooband::kl_confidence_bound: sample count must be positive");
  }
  if (level < 0.0) {
    throw std::invalid_argument(
        "ooband::kl_confidence_bound: negative confidence level");
  }
  if (level == 0.0) return m_hat;

  const double boundary = upper ? family.mean_hi() : family.mean_lo();
  if (n * kl(family, m_hat, boundary) <= level) {
    return boundary;  // clamp: the KL ball reaches the admissible boundary
  }

  // Bisect well past kConfidenceBisectionTol so that the level residual
  // n*KL(m_hat, x) - level also lands within tolerance even when the KL
  // slope is steep (near-boundary Bernoulli means, large n).
  double inner = m_hat;     // n*KL <= level here
  double outer = boundary;  // n*KL > level here
  for (int iter = 0;
       iter < 200 &&
       std::abs(outer - inner) > 1e-15 * (1.0 + std::abs(inner));
       ++iter) {
    const double mid = 0.5 * (inner + outer);
    if (n * kl(family, m_hat, mid) <= level) {
      inner = mid;
    } else {
      outer = mid;
    }
  }
  return inner;
}

}  // namespace detail

// Largest x with n*KL(m_hat, x) <= level; at least m_hat, clamped to the
// family's upper boundary when the KL ball sticks out of the admissible range.
inline double kl_upper_confidence(const DistributionFamily& family,
                                  double m_hat, double n, double level) {
  return detail::kl_confidence_bound(family, m_hat, n, level, /*upper=*/true);
}

// Smallest x with n*KL(m_hat, x) <= level; mirror of kl_upper_confidence.
inline double kl_lower_confidence(const DistributionFamily& family,
                                  double m_hat, double n, double level) {
  return detail::kl_confidence_bound(family, m_hat, n, level, /*upper=*/false);
}

}  // namespace ooband
