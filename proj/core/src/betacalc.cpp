#include "pcbeta/betacalc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pcbeta/errors.hpp"

namespace pcbeta {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAlphaSlack = 1e-9;

void check_prior(double base_rate, double prior_weight) {
  if (!(base_rate > 0.0 && base_rate < 1.0)) {
    throw DomainError("base rate must lie in (0,1), got " + std::to_string(base_rate));
  }
  if (!(prior_weight > 0.0) || !std::isfinite(prior_weight)) {
    throw DomainError("prior weight must be positive, got " + std::to_string(prior_weight));
  }
}

}  // namespace

void Opinion::check() const {
  const double tol = kSimplexTolerance;
  if (belief < -tol || disbelief < -tol || uncertainty < -tol) {
    throw DomainError("opinion components must be non-negative");
  }
  if (std::abs(belief + disbelief + uncertainty - 1.0) > tol) {
    throw DomainError("opinion components must sum to 1");
  }
  if (!(base_rate >= 0.0 && base_rate <= 1.0)) {
    throw DomainError("opinion base rate must lie in [0,1]");
  }
}

BetaLabel BetaLabel::from_alphas(double alpha_pos, double alpha_neg, double base_rate,
                                 double prior_weight) {
  check_prior(base_rate, prior_weight);
  if (!std::isfinite(alpha_pos) || !std::isfinite(alpha_neg)) {
    throw DomainError("alpha parameters must be finite; use the certain sentinels instead");
  }
  if (alpha_pos < prior_weight * base_rate - kAlphaSlack ||
      alpha_neg < prior_weight * (1.0 - base_rate) - kAlphaSlack) {
    throw DomainError("alpha parameters below the prior floor W*<a, 1-a>");
  }
  BetaLabel out;
  out.alpha_pos_ = alpha_pos;
  out.alpha_neg_ = alpha_neg;
  out.mean_ = alpha_pos / (alpha_pos + alpha_neg);
  out.base_rate_ = base_rate;
  out.prior_weight_ = prior_weight;
  out.point_mass_ = false;
  return out;
}

BetaLabel BetaLabel::from_mean_strength(double mean, double strength, double base_rate,
                                        double prior_weight) {
  if (!(mean > 0.0 && mean < 1.0)) {
    throw DomainError("mean must lie in (0,1) for a proper beta");
  }
  if (!(strength > 0.0)) throw DomainError("strength must be positive");
  if (std::isinf(strength)) return point_mass(mean, base_rate, prior_weight);
  return from_alphas(mean * strength, (1.0 - mean) * strength, base_rate, prior_weight);
}

BetaLabel BetaLabel::point_mass(double probability, double base_rate, double prior_weight) {
  if (!(probability >= 0.0 && probability <= 1.0)) {
    throw DomainError("point-mass probability must lie in [0,1]");
  }
  if (!(base_rate >= 0.0 && base_rate <= 1.0)) throw DomainError("base rate must lie in [0,1]");
  BetaLabel out;
  out.alpha_pos_ = kInf;
  out.alpha_neg_ = kInf;
  out.mean_ = probability;
  out.base_rate_ = base_rate;
  out.prior_weight_ = prior_weight;
  out.point_mass_ = true;
  return out;
}

double BetaLabel::strength() const { return point_mass_ ? kInf : alpha_pos_ + alpha_neg_; }

BetaLabel BetaLabel::complement() const {
  BetaLabel out = *this;
  out.base_rate_ = 1.0 - base_rate_;
  out.mean_ = 1.0 - mean_;
  if (!point_mass_) std::swap(out.alpha_pos_, out.alpha_neg_);
  return out;
}

Moments moments_of(const BetaLabel& label) {
  if (label.is_point_mass()) return {label.mean(), 0.0};
  const double m = label.mean();
  return {m, m * (1.0 - m) / (label.strength() + 1.0)};
}

double complement_covariance(const BetaLabel& label) { return -moments_of(label).variance; }

Opinion to_opinion(const BetaLabel& label) {
  const double a = label.base_rate();
  if (label.is_point_mass()) return {label.mean(), 1.0 - label.mean(), 0.0, a};
  const double s = label.strength();
  const double w = label.prior_weight();
  return {(label.alpha_pos() - w * a) / s, (label.alpha_neg() - w * (1.0 - a)) / s, w / s, a};
}

BetaLabel from_opinion(const Opinion& op, double prior_weight) {
  op.check();
  const double a = op.base_rate;
  if (op.uncertainty <= 0.0) {
    if (std::abs(op.belief - 1.0) <= kSimplexTolerance) return BetaLabel::certain_true(a);
    if (std::abs(op.disbelief - 1.0) <= kSimplexTolerance) return BetaLabel::certain_false(a);
    throw DomainError("dogmatic opinion with 0 < b < 1 has no finite-strength beta");
  }
  const double k = prior_weight / op.uncertainty;
  return BetaLabel::from_alphas(k * op.belief + prior_weight * a,
                                k * op.disbelief + prior_weight * (1.0 - a), a, prior_weight);
}

double matched_strength(const Moments& m, double base_rate, double prior_weight) {
  if (m.variance <= 0.0) return kInf;
  const double mean = m.mean;
  const double by_variance = mean * (1.0 - mean) / m.variance - 1.0;
  const double floor_pos = prior_weight * base_rate / mean;
  const double floor_neg = prior_weight * (1.0 - base_rate) / (1.0 - mean);
  return std::max({by_variance, floor_pos, floor_neg});
}

BetaLabel moment_match(const Moments& m, double base_rate, double prior_weight) {
  check_prior(base_rate, prior_weight);
  if (m.mean <= 0.0) return BetaLabel::certain_false(base_rate);
  if (m.mean >= 1.0) return BetaLabel::certain_true(base_rate);
  if (m.variance <= 0.0) return BetaLabel::point_mass(m.mean, base_rate, prior_weight);
  const double s = matched_strength(m, base_rate, prior_weight);
  return BetaLabel::from_alphas(m.mean * s, (1.0 - m.mean) * s, base_rate, prior_weight);
}

Opinion sl_sum(const Opinion& x, const Opinion& y) {
  const double a = x.base_rate + y.base_rate;
  // Two zero base rates: weight both operands equally.
  const double wx = a > 0.0 ? x.base_rate / a : 0.5;
  const double wy = a > 0.0 ? y.base_rate / a : 0.5;
  Opinion out;
  out.belief = x.belief + y.belief;
  out.disbelief = wx * (x.disbelief - y.belief) + wy * (y.disbelief - x.belief);
  out.uncertainty = wx * x.uncertainty + wy * y.uncertainty;
  out.base_rate = a;
  return out;
}

Opinion sl_product(const Opinion& x, const Opinion& y) {
  const double ax = x.base_rate;
  const double ay = y.base_rate;
  const double denom = 1.0 - ax * ay;
  Opinion out;
  out.disbelief = x.disbelief + y.disbelief - x.disbelief * y.disbelief;
  out.base_rate = ax * ay;
  if (denom <= 0.0) {
    // Both base rates are 1: the cross terms vanish in the limit.
    out.belief = x.belief * y.belief + x.belief * y.uncertainty + x.uncertainty * y.belief;
    out.uncertainty = x.uncertainty * y.uncertainty;
    return out;
  }
  out.belief = x.belief * y.belief +
               ((1.0 - ax) * ay * x.belief * y.uncertainty +
                ax * (1.0 - ay) * x.uncertainty * y.belief) /
                   denom;
  out.uncertainty = x.uncertainty * y.uncertainty +
                    ((1.0 - ay) * x.belief * y.uncertainty + (1.0 - ax) * x.uncertainty * y.belief) /
                        denom;
  return out;
}

std::optional<Opinion> sl_division(const Opinion& x, const Opinion& y) {
  const double ax = x.base_rate;
  const double ay = y.base_rate;
  const double py = y.belief + ay * y.uncertainty;
  if (!(ax < ay) || !(x.disbelief >= y.disbelief)) return std::nullopt;
  if (ax >= 1.0 || y.disbelief >= 1.0 || py <= 0.0) return std::nullopt;
  const double one_minus_dx = 1.0 - x.disbelief;
  const double one_minus_dy = 1.0 - y.disbelief;
  const double belief_floor =
      ax * (1.0 - ay) * one_minus_dx * y.belief / ((1.0 - ax) * ay * one_minus_dy);
  const double uncertainty_floor =
      (1.0 - ay) * one_minus_dx * y.uncertainty / ((1.0 - ax) * one_minus_dy);
  if (!(x.belief >= belief_floor) || !(x.uncertainty >= uncertainty_floor)) return std::nullopt;

  const double px = x.belief + ax * x.uncertainty;
  const double gap = ay - ax;
  const double projected_term = ay * px / (gap * py);
  const double disbelief_term = one_minus_dx / (gap * one_minus_dy);
  Opinion out;
  out.belief = projected_term - ax * disbelief_term;
  out.disbelief = (x.disbelief - y.disbelief) / one_minus_dy;
  out.uncertainty = ay * disbelief_term - projected_term;
  out.base_rate = ax / ay;
  constexpr double tol = 1e-12;
  if (out.belief < -tol || out.disbelief < -tol || out.uncertainty < -tol) return std::nullopt;
  return out;
}

Moments mm_sum(const Moments& x, const Moments& y) {
  return {x.mean + y.mean, x.variance + y.variance};
}

Moments mm_product(const Moments& x, const Moments& y) {
  return {x.mean * y.mean, x.variance * y.mean * y.mean + y.variance * x.mean * x.mean +
                               x.variance * y.variance};
}

Moments mm_division(const Moments& x, const Moments& y) {
  if (!(y.mean > x.mean)) {
    throw NonConditionable("moment-matching division needs E[Y] > E[X]");
  }
  if (x.mean <= 0.0) return {0.0, 0.0};
  const double mz = x.mean / y.mean;
  const double gap = y.mean - x.mean;
  const double rel = x.variance / (x.mean * x.mean) + (y.variance + x.variance) / (gap * gap) +
                     2.0 * x.variance / (x.mean * gap);
  return {mz, mz * mz * (1.0 - mz) * (1.0 - mz) * rel};
}

}  // namespace pcbeta
