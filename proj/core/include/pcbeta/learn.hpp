#pragma once

// Bayesian learning of beta labels from complete boolean observations.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pcbeta/label_table.hpp"

namespace pcbeta {

/// Complete observations: every row assigns every variable (1-based columns
/// stored 0-based).
struct Dataset {
  int var_count = 0;
  std::vector<std::vector<std::uint8_t>> rows;
};

struct Counts {
  std::vector<std::int64_t> positive;  // r per variable, index 0 unused
  std::vector<std::int64_t> negative;  // s per variable, index 0 unused
};

Counts count(const Dataset& d);

struct FitResult {
  LabelTable labels;
  LeafCovariance covariance;
};

/// Posterior Beta(r + W a, s + W (1 - a)) per variable; distinct variables
/// stay independent, so the covariance is block diagonal.
FitResult fit_complete(const Dataset& d, double base_rate = kDefaultBaseRate,
                       double prior_weight = kDefaultPriorWeight);
BetaLabel posterior(std::int64_t positive, std::int64_t negative,
                    double base_rate = kDefaultBaseRate,
                    double prior_weight = kDefaultPriorWeight);

/// n_ins i.i.d. rows, column v true with probability probs[v - 1].
Dataset sample_observations(const std::vector<double>& probs, std::size_t n_ins,
                            std::uint64_t seed);

/// "vars <n>" header, then one row per line of space separated 0/1 values.
Dataset parse_dataset(std::string_view text);
std::string write_dataset(const Dataset& d);

}  // namespace pcbeta
