#pragma once

// Generic bottom-up circuit evaluation over a pluggable AMC-conditioning
// parametrisation, and the three baseline parametrisations.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pcbeta/betacalc.hpp"
#include "pcbeta/circuit.hpp"
#include "pcbeta/errors.hpp"
#include "pcbeta/label_table.hpp"

namespace pcbeta {

/// A parametrisation supplies Value, zero(), one(), plus, times, divide and a
/// leaf adapter from labels to values.
template <class S>
concept Semiring = requires(const S& s, const typename S::Value& v, const LabelTable& t,
                            Literal lit) {
  { s.zero() } -> std::convertible_to<typename S::Value>;
  { s.one() } -> std::convertible_to<typename S::Value>;
  { s.plus(v, v) } -> std::convertible_to<typename S::Value>;
  { s.times(v, v) } -> std::convertible_to<typename S::Value>;
  { s.divide(v, v) } -> std::convertible_to<typename S::Value>;
  { s.leaf(t, lit) } -> std::convertible_to<typename S::Value>;
  { s.is_zero(v) } -> std::convertible_to<bool>;
};

struct EvalStats {
  std::size_t node_evaluations = 0;
};

/// Point probabilities: (+, *, /) on label means.
struct ProbSemiring {
  using Value = double;
  double zero() const { return 0.0; }
  double one() const { return 1.0; }
  double plus(double a, double b) const { return a + b; }
  double times(double a, double b) const { return a * b; }
  /// Throws InconsistentEvidence on a zero denominator.
  double divide(double a, double b) const;
  double leaf(const LabelTable& labels, Literal lit) const { return labels.label(lit).mean(); }
  bool is_zero(double v) const { return v <= 0.0; }
};

/// Subjective-logic operators with exact identity short-circuits and the
/// vacuous fallback for undefined divisions.
struct SlSemiring {
  using Value = Opinion;
  static constexpr Opinion kZero{0.0, 1.0, 0.0, 0.0};
  static constexpr Opinion kOne{1.0, 0.0, 0.0, 1.0};
  static constexpr Opinion kVacuous{0.0, 0.0, 1.0, 0.5};

  Opinion zero() const { return kZero; }
  Opinion one() const { return kOne; }
  Opinion plus(const Opinion& a, const Opinion& b) const;
  Opinion times(const Opinion& a, const Opinion& b) const;
  Opinion divide(const Opinion& a, const Opinion& b) const;
  /// Certain-true leaves (indicators) map to the multiplicative identity,
  /// certain-false ones to the additive identity.
  Opinion leaf(const LabelTable& labels, Literal lit) const;
  bool is_zero(const Opinion& v) const { return v.projected() <= 0.0; }
};

/// Independence-assuming moment propagation.
struct MmSemiring {
  using Value = Moments;
  Moments zero() const { return {0.0, 0.0}; }
  Moments one() const { return {1.0, 0.0}; }
  Moments plus(const Moments& a, const Moments& b) const;
  Moments times(const Moments& a, const Moments& b) const;
  Moments divide(const Moments& a, const Moments& b) const { return mm_division(a, b); }
  Moments leaf(const LabelTable& labels, Literal lit) const {
    return moments_of(labels.label(lit));
  }
  bool is_zero(const Moments& v) const { return v.mean <= 0.0; }
};

/// Single bottom-up pass. Leaves whose lambda is 0 contribute zero(); every
/// node is evaluated exactly once. `lambda` overrides the circuit's own
/// indicators when non-empty. Children are folded in file order.
template <Semiring S>
typename S::Value eval(const Circuit& c, const S& s, const LabelTable& labels,
                       std::span<const std::uint8_t> lambda = {}, EvalStats* stats = nullptr) {
  if (lambda.empty()) lambda = c.lambdas();
  std::vector<typename S::Value> value(c.size(), s.zero());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Node& n = c.node(static_cast<NodeId>(i));
    switch (n.kind) {
      case NodeKind::True:
        value[i] = s.one();
        break;
      case NodeKind::False:
        value[i] = s.zero();
        break;
      case NodeKind::Literal:
        value[i] = lambda[i] ? s.leaf(labels, n.literal) : s.zero();
        break;
      case NodeKind::And: {
        auto acc = s.one();
        for (NodeId ch : n.children) acc = s.times(acc, value[ch]);
        value[i] = acc;
        break;
      }
      case NodeKind::Or: {
        auto acc = s.zero();
        for (NodeId ch : n.children) acc = s.plus(acc, value[ch]);
        value[i] = acc;
        break;
      }
    }
    if (stats) ++stats->node_evaluations;
  }
  return value.back();
}

/// Lambdas of `c` with every leaf carrying the negated query also cleared.
std::vector<std::uint8_t> query_lambdas(const Circuit& c);

/// A(q, e) and A(e) as two passes, then their division. The circuit must
/// carry a query (see set_condition). Throws InconsistentEvidence when the
/// evidence value is the additive identity.
template <Semiring S>
typename S::Value conditioned_eval(const Circuit& c, const S& s, const LabelTable& labels) {
  if (!c.query()) throw CircuitError("conditioned evaluation needs a query literal");
  const Literal q = *c.query();
  const auto den = eval(c, s, labels);
  if (s.is_zero(den)) throw InconsistentEvidence();
  for (const EvidenceItem& e : c.evidence()) {
    if (e.var == var_of(q)) return (e.value == (q > 0)) ? s.one() : s.zero();
  }
  const auto lam = query_lambdas(c);
  const auto num = eval(c, s, labels, std::span<const std::uint8_t>(lam));
  return s.divide(num, den);
}

/// Moment-matched result of the mm parametrisation (matching applied once,
/// at the conditioned root).
BetaLabel mm_conditioned_label(const Circuit& c, const LabelTable& labels,
                               double base_rate = kDefaultBaseRate,
                               double prior_weight = kDefaultPriorWeight);

}  // namespace pcbeta
