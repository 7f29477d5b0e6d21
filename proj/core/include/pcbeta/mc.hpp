#pragma once

// Monte Carlo reference: sample leaf probabilities from their betas and
// evaluate the point-probability conditional per sample.

#include <cstdint>
#include <utility>
#include <vector>

#include "pcbeta/circuit.hpp"
#include "pcbeta/label_table.hpp"

namespace pcbeta {

struct McResult {
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
  std::vector<double> samples;
  std::size_t rejected = 0;
};

/// Draws one probability per parameter (tied variables share the draw; the
/// negated literal gets 1 - p). Samples whose evidence probability is 0 are
/// rejected and redrawn; InconsistentEvidence is thrown once rejections pass
/// 99% of at least 100 attempts. Explicit leaf covariances are not sampled.
McResult mc_eval(const Circuit& conditioned, const LabelTable& labels, std::size_t n_samples,
                 std::uint64_t seed);

/// Mean and unbiased variance with compensated (Neumaier) summation.
std::pair<double, double> sample_moments(const std::vector<double>& samples);

/// Moment-matched strength of the samples, floored like moment_match;
/// +infinity when the samples have zero variance.
double mc_strength(const std::vector<double>& samples, double base_rate = kDefaultBaseRate,
                   double prior_weight = kDefaultPriorWeight);

}  // namespace pcbeta
