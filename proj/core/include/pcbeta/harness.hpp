#pragma once

// Calibration experiments: ground-truth draws, learning from sampled
// observations, inference with every backend and the resulting metrics.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pcbeta/betacalc.hpp"
#include "pcbeta/circuit.hpp"
#include "pcbeta/compile.hpp"
#include "pcbeta/label_table.hpp"

namespace pcbeta {

struct Backend {
  enum class Kind { Prob, Cpb, Mm, Sl, Mc };
  Kind kind = Kind::Cpb;
  std::size_t samples = 0;  // Mc only

  /// "prob", "cpb", "mm", "sl" or "mc:<k>".
  static Backend parse(std::string_view text);
  std::string name() const;
};

/// Mean/variance reported by a backend plus the beta it stands for.
struct Inference {
  double mean = 0.0;
  double variance = 0.0;
  BetaLabel label;
};

Inference infer(const Backend& backend, const Circuit& conditioned, const LabelTable& labels,
                const std::optional<LeafCovariance>& leaf_cov = std::nullopt,
                std::uint64_t seed = 0);

/// Beta moments of a subjective opinion (uncertainty 0 gives a point mass).
Inference opinion_inference(const Opinion& op, double prior_weight = kDefaultPriorWeight);

enum class EvidenceMode { Fixed, Uniform, Forward };

struct ExperimentConfig {
  std::string program = "net1";
  bool shared_label = false;
  std::vector<std::size_t> n_ins = {10, 50, 100};
  std::size_t truth_draws = 100;
  std::size_t repetitions = 10;
  std::vector<Backend> backends = {Backend::parse("cpb"), Backend::parse("mm"),
                                   Backend::parse("sl"), Backend::parse("mc:100")};
  std::vector<double> gammas;  // defaults to 0.05, 0.10, ..., 0.95
  std::uint64_t seed = 1;
  /// Samples of the Monte Carlo golden standard; 0 disables correlations.
  std::size_t golden_samples = 0;
  double truth_low = 0.01;
  double truth_high = 0.99;
  /// Programs without fixed evidence draw it per truth draw.
  EvidenceMode evidence_mode = EvidenceMode::Uniform;
  bool fast = false;

  /// G = 30, R = 5.
  void apply_fast();
  void check() const;
};

ExperimentConfig parse_experiment_config(std::string_view json_text);
std::string experiment_config_json(const ExperimentConfig& cfg);

std::vector<double> default_gammas();

/// One (truth draw, repetition, query) outcome of a backend.
struct TrialRecord {
  std::size_t draw = 0;
  std::size_t repetition = 0;
  int query = 0;
  double truth = 0.0;
  Inference result;
  double seconds = 0.0;
};

struct BackendMetrics {
  std::string backend;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double actual_rmse = 0.0;
  double predicted_rmse = 0.0;
  std::vector<double> coverage;
  std::optional<double> strength_correlation;
  std::vector<double> timing_quantiles;  // seconds at 0, 0.25, 0.5, 0.75, 1
  std::vector<TrialRecord> records;
};

struct CellReport {
  std::size_t n_ins = 0;
  std::vector<BackendMetrics> backends;
};

struct MetricsReport {
  std::vector<double> gammas;
  std::vector<CellReport> cells;

  const BackendMetrics& find(std::size_t n_ins, const std::string& backend) const;
};

MetricsReport run_experiment(const ExperimentConfig& cfg);

/// Fraction of records whose truth lies inside the central interval of mass
/// gamma of the reported beta, per gamma.
std::vector<double> calibration_curve(const std::vector<TrialRecord>& records,
                                      const std::vector<double>& gammas);

/// Central interval of mass gamma; a point mass gives a degenerate interval.
std::pair<double, double> central_interval(const BetaLabel& label, double gamma);

/// Pearson r over pairs where both values are finite; nullopt when fewer than
/// two pairs remain or either side has zero variance.
std::optional<double> strength_correlation(const std::vector<double>& a,
                                           const std::vector<double>& b);

/// Writes rmse.csv, calibration.csv, correlation.csv, timing.csv and
/// config.json into `dir` (created if needed).
void write_reports(const MetricsReport& report, const ExperimentConfig& cfg,
                   const std::string& dir);
std::string rmse_csv(const MetricsReport& report);
std::string calibration_csv(const MetricsReport& report);
std::string correlation_csv(const MetricsReport& report);
std::string timing_csv(const MetricsReport& report);

/// Labels of a program's circuit variables from per-parameter labels:
/// derived variables become indicators, shared parameters become ties.
LabelTable program_labels(const Program& p, const std::vector<BetaLabel>& parameters);

}  // namespace pcbeta
