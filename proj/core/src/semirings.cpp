#include "pcbeta/semirings.hpp"

#include <algorithm>

namespace pcbeta {

double ProbSemiring::divide(double a, double b) const {
  if (b <= 0.0) throw InconsistentEvidence();
  return a / b;
}

Opinion SlSemiring::plus(const Opinion& a, const Opinion& b) const {
  if (b == kZero) return a;
  if (a == kZero) return b;
  return sl_sum(a, b);
}

Opinion SlSemiring::times(const Opinion& a, const Opinion& b) const {
  if (b == kOne) return a;
  if (a == kOne) return b;
  return sl_product(a, b);
}

Opinion SlSemiring::divide(const Opinion& a, const Opinion& b) const {
  if (b == kOne) return a;
  if (auto q = sl_division(a, b)) return *q;
  return kVacuous;
}

Opinion SlSemiring::leaf(const LabelTable& labels, Literal lit) const {
  const BetaLabel l = labels.label(lit);
  if (l.is_certain_true()) return kOne;
  if (l.is_certain_false()) return kZero;
  return to_opinion(l);
}

Moments MmSemiring::plus(const Moments& a, const Moments& b) const {
  if (b == zero()) return a;
  if (a == zero()) return b;
  return mm_sum(a, b);
}

Moments MmSemiring::times(const Moments& a, const Moments& b) const {
  if (b == one()) return a;
  if (a == one()) return b;
  return mm_product(a, b);
}

std::vector<std::uint8_t> query_lambdas(const Circuit& c) {
  auto lam = std::vector<std::uint8_t>(c.lambdas().begin(), c.lambdas().end());
  if (c.query()) {
    for (NodeId id : c.leaves_with(-*c.query())) lam[id] = 0;
  }
  return lam;
}

BetaLabel mm_conditioned_label(const Circuit& c, const LabelTable& labels, double base_rate,
                               double prior_weight) {
  const Moments m = conditioned_eval(c, MmSemiring{}, labels);
  Moments clamped = m;
  clamped.variance = std::min(std::max(m.variance, 0.0), m.mean * (1.0 - m.mean));
  return moment_match(clamped, base_rate, prior_weight);
}

}  // namespace pcbeta
