#pragma once

// Fixtures, oracles and randomized property checks shared by the unit tests
// and the acceptance runner.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pcbeta/circuit.hpp"
#include "pcbeta/compile.hpp"
#include "pcbeta/label_table.hpp"

namespace pcbeta::testing {

std::string data_file(const std::string& name);
std::string read_text(const std::string& path);

/// Burglary circuit with calls(john) compiled in: vars 1 b, 2 e, 3 h.
Circuit burglary_circuit();
LabelTable burglary_labels();
LabelTable burglary_point_labels();
/// Node ids of the burglary file.
inline constexpr NodeId kBurglaryAlarm = 8;
inline constexpr NodeId kBurglaryRoot = 9;
inline constexpr NodeId kBurglaryBurglaryBranch = 6;
inline constexpr NodeId kBurglaryEarthquakeBranch = 7;

/// Boolean value of the circuit under a full assignment (index 0 unused).
bool circuit_satisfied(const Circuit& c, const std::vector<bool>& assignment);

/// Sum over all assignments accepted by the circuit of the product of
/// p[v] / 1 - p[v]. Exponential, for <= 20 variables.
double enumerate_wmc(const Circuit& c, const std::vector<double>& p);
/// Same over models of a theory, optionally restricted by evidence.
double enumerate_theory_wmc(const Theory& t, const std::vector<double>& p,
                            const std::vector<EvidenceItem>& evidence = {});

/// Random satisfiable theory of clauses and biconditionals.
Theory random_theory(std::mt19937_64& rng, int var_count, int constraints);

/// Proper betas with strength in [min_strength, max_strength] and means
/// in [0.05, 0.95].
LabelTable random_labels(std::mt19937_64& rng, int var_count, double min_strength,
                         double max_strength);
std::vector<double> label_means(const LabelTable& labels);

/// A compiled random theory conditioned on a query and some evidence with
/// positive probability.
struct RandomCase {
  Theory theory;
  Circuit conditioned;
  LabelTable labels;
  Literal query = 0;
  std::vector<EvidenceItem> evidence;
};
RandomCase random_case(std::mt19937_64& rng, int min_vars, int max_vars, double min_strength,
                       double max_strength);

/// Y then OR(AND(Y, X), AND(Y, -X)) over a random sub-circuit Y and a fresh
/// leaf X. Returns the circuit and the id of Y's root.
struct TotalProbabilityCase {
  Circuit circuit;
  Circuit y_circuit;
  NodeId y_root = 0;
  LabelTable labels;
};
TotalProbabilityCase random_total_probability_case(std::mt19937_64& rng);

struct PropertyResult {
  std::string name;
  int cases = 0;
  int failures = 0;
  std::string first_failure;

  bool ok() const { return failures == 0 && cases > 0; }
  void fail(const std::string& what) {
    if (failures++ == 0) first_failure = what;
  }
};

PropertyResult check_round_trips(std::uint64_t seed, int cases);
PropertyResult check_complement_sum_to_one(std::uint64_t seed, int cases);
PropertyResult check_moment_match_floor(std::uint64_t seed, int cases);
PropertyResult check_covariance_symmetry(std::uint64_t seed, int cases);
PropertyResult check_seeded_determinism(std::uint64_t seed, int cases);

}  // namespace pcbeta::testing
