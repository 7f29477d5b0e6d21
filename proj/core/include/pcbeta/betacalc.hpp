#pragma once

// Beta-distributed probabilities, their subjective-logic opinions, and the
// pairwise operators used by the independence-assuming baselines.

#include <optional>

namespace pcbeta {

inline constexpr double kDefaultBaseRate = 0.5;
inline constexpr double kDefaultPriorWeight = 2.0;
inline constexpr double kSimplexTolerance = 1e-9;

/// First two moments of a [0,1]-supported random variable.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;

  friend bool operator==(const Moments&, const Moments&) = default;
};

/// Subjective opinion <belief, disbelief, uncertainty, base rate>.
struct Opinion {
  double belief = 0.0;
  double disbelief = 0.0;
  double uncertainty = 1.0;
  double base_rate = kDefaultBaseRate;

  double projected() const { return belief + uncertainty * base_rate; }
  /// Throws DomainError unless b,d,u >= 0, b+d+u = 1 and base rate in [0,1].
  void check() const;

  friend bool operator==(const Opinion&, const Opinion&) = default;
};

/// A beta-distributed leaf probability.
///
/// Either a proper Beta(alpha_pos, alpha_neg) carrying the prior (base rate,
/// weight) it was learnt with, or a point mass at a fixed probability. The
/// certain-true / certain-false sentinels are point masses at 1 and 0; they are
/// tagged values, so no infinite alpha ever enters arithmetic.
class BetaLabel {
 public:
  /// Uniform prior Beta(1,1) at the defaults.
  BetaLabel() = default;

  /// Validates alpha_pos >= W*a and alpha_neg >= W*(1-a) (up to 1e-9).
  static BetaLabel from_alphas(double alpha_pos, double alpha_neg,
                               double base_rate = kDefaultBaseRate,
                               double prior_weight = kDefaultPriorWeight);
  /// Beta with the given mean in (0,1) and Dirichlet strength.
  static BetaLabel from_mean_strength(double mean, double strength,
                                      double base_rate = kDefaultBaseRate,
                                      double prior_weight = kDefaultPriorWeight);
  static BetaLabel point_mass(double probability, double base_rate = kDefaultBaseRate,
                              double prior_weight = kDefaultPriorWeight);
  static BetaLabel certain_true(double base_rate = kDefaultBaseRate) {
    return point_mass(1.0, base_rate);
  }
  static BetaLabel certain_false(double base_rate = kDefaultBaseRate) {
    return point_mass(0.0, base_rate);
  }

  bool is_point_mass() const { return point_mass_; }
  bool is_certain_true() const { return point_mass_ && mean_ == 1.0; }
  bool is_certain_false() const { return point_mass_ && mean_ == 0.0; }

  /// Only meaningful for proper betas.
  double alpha_pos() const { return alpha_pos_; }
  double alpha_neg() const { return alpha_neg_; }
  double base_rate() const { return base_rate_; }
  double prior_weight() const { return prior_weight_; }
  /// alpha_pos + alpha_neg; +infinity for point masses.
  double strength() const;
  double mean() const { return mean_; }

  /// Label of the negated literal: swapped alphas, base rate 1-a.
  BetaLabel complement() const;

  friend bool operator==(const BetaLabel&, const BetaLabel&) = default;

 private:
  double alpha_pos_ = 1.0;
  double alpha_neg_ = 1.0;
  double mean_ = 0.5;
  double base_rate_ = kDefaultBaseRate;
  double prior_weight_ = kDefaultPriorWeight;
  bool point_mass_ = false;
};

Moments moments_of(const BetaLabel& label);

/// cov[X, 1-X] = -var[X].
double complement_covariance(const BetaLabel& label);

Opinion to_opinion(const BetaLabel& label);
/// u == 0 is accepted only for b == 1 or d == 1 (the certain sentinels).
BetaLabel from_opinion(const Opinion& op, double prior_weight = kDefaultPriorWeight);

/// Strength chosen by moment matching, floored so that alpha >= W*<a, 1-a>.
/// Returns +infinity for zero variance.
double matched_strength(const Moments& m, double base_rate = kDefaultBaseRate,
                        double prior_weight = kDefaultPriorWeight);

/// Beta with the given mean and (floored) matched strength. Means at 0 or 1
/// return the certain sentinels; zero variance returns a point mass.
BetaLabel moment_match(const Moments& m, double base_rate = kDefaultBaseRate,
                       double prior_weight = kDefaultPriorWeight);

// Subjective-logic operators (sum of disjoint events, product of independent
// events, division). Division yields nullopt when its applicability
// constraints fail.
Opinion sl_sum(const Opinion& x, const Opinion& y);
Opinion sl_product(const Opinion& x, const Opinion& y);
std::optional<Opinion> sl_division(const Opinion& x, const Opinion& y);

// Moment-matching operators under an independence assumption.
Moments mm_sum(const Moments& x, const Moments& y);
Moments mm_product(const Moments& x, const Moments& y);
/// x is the numerator P(q, e), y the evidence P(e). Throws NonConditionable
/// unless E[y] > E[x].
Moments mm_division(const Moments& x, const Moments& y);

}  // namespace pcbeta
