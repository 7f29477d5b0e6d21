#include "pcbeta/mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <tuple>

#include "pcbeta/errors.hpp"
#include "pcbeta/rng.hpp"
#include "pcbeta/semirings.hpp"

namespace pcbeta {

namespace {

class NeumaierSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double eval_point(const Circuit& c, std::span<const std::uint8_t> lambda,
                  const std::vector<double>& pos, std::vector<double>& scratch) {
  scratch.resize(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Node& n = c.node(static_cast<NodeId>(i));
    double v = 0.0;
    switch (n.kind) {
      case NodeKind::True:
        v = 1.0;
        break;
      case NodeKind::False:
        v = 0.0;
        break;
      case NodeKind::Literal: {
        if (!lambda[i]) break;
        const double p = pos[var_of(n.literal)];
        v = n.literal > 0 ? p : 1.0 - p;
        if (std::isnan(p)) v = 1.0;  // indicator: both literals weigh 1
        break;
      }
      case NodeKind::And:
        v = 1.0;
        for (NodeId ch : n.children) v *= scratch[ch];
        break;
      case NodeKind::Or:
        for (NodeId ch : n.children) v += scratch[ch];
        break;
    }
    scratch[i] = v;
  }
  return scratch.back();
}

}  // namespace

std::pair<double, double> sample_moments(const std::vector<double>& samples) {
  if (samples.empty()) return {0.0, 0.0};
  NeumaierSum total;
  for (double x : samples) total.add(x);
  const double mean = total.value() / static_cast<double>(samples.size());
  if (samples.size() < 2) return {mean, 0.0};
  NeumaierSum squares;
  for (double x : samples) squares.add((x - mean) * (x - mean));
  return {mean, squares.value() / static_cast<double>(samples.size() - 1)};
}

McResult mc_eval(const Circuit& conditioned, const LabelTable& labels, std::size_t n_samples,
                 std::uint64_t seed) {
  if (n_samples == 0) throw DomainError("Monte Carlo needs at least one sample");
  if (!conditioned.query()) throw CircuitError("Monte Carlo needs a query literal");
  const Literal q = *conditioned.query();
  const int vars = labels.var_count();
  if (vars < conditioned.var_count()) throw DomainError("label table smaller than the circuit");

  const auto den_lambda = conditioned.lambdas();
  const auto num_lambda = query_lambdas(conditioned);
  std::optional<double> fixed;
  for (const EvidenceItem& e : conditioned.evidence()) {
    if (e.var == var_of(q)) fixed = (e.value == (q > 0)) ? 1.0 : 0.0;
  }

  Rng rng(seed);
  McResult out;
  out.samples.reserve(n_samples);
  std::vector<double> pos(vars + 1, 0.0);
  std::vector<double> draw(vars + 1, 0.0);
  std::vector<double> scratch;
  const std::size_t max_attempts = std::max<std::size_t>(100, 100 * n_samples);
  std::size_t attempts = 0;
  while (out.samples.size() < n_samples) {
    if (++attempts > max_attempts) {
      throw InconsistentEvidence("evidence almost surely inconsistent: " +
                                 std::to_string(out.rejected) + " of " +
                                 std::to_string(attempts - 1) + " samples rejected");
    }
    for (int v = 1; v <= vars; ++v) {
      if (labels.is_indicator(v) || labels.parameter_of(v) != v) continue;
      const BetaLabel l = labels.label(v);
      draw[v] = l.is_point_mass() ? l.mean() : rng.beta(l.alpha_pos(), l.alpha_neg());
    }
    for (int v = 1; v <= vars; ++v) {
      pos[v] = labels.is_indicator(v) ? std::numeric_limits<double>::quiet_NaN()
                                      : draw[labels.parameter_of(v)];
    }
    const double den = eval_point(conditioned, den_lambda, pos, scratch);
    if (!(den > 0.0)) {
      ++out.rejected;
      continue;
    }
    if (fixed) {
      out.samples.push_back(*fixed);
      continue;
    }
    const double num = eval_point(conditioned, num_lambda, pos, scratch);
    out.samples.push_back(std::min(1.0, num / den));
  }
  std::tie(out.mean, out.variance) = sample_moments(out.samples);
  return out;
}

double mc_strength(const std::vector<double>& samples, double base_rate, double prior_weight) {
  const auto [mean, variance] = sample_moments(samples);
  if (!(variance > 0.0) || mean <= 0.0 || mean >= 1.0) {
    return std::numeric_limits<double>::infinity();
  }
  return matched_strength({mean, variance}, base_rate, prior_weight);
}

}  // namespace pcbeta
