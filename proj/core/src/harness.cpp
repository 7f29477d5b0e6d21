#include "pcbeta/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>
#include <json.hpp>

#include "pcbeta/cpb.hpp"
#include "pcbeta/errors.hpp"
#include "pcbeta/learn.hpp"
#include "pcbeta/mc.hpp"
#include "pcbeta/rng.hpp"
#include "pcbeta/semirings.hpp"

namespace pcbeta {

using nlohmann::json;

Backend Backend::parse(std::string_view text) {
  Backend b;
  if (text == "prob") {
    b.kind = Kind::Prob;
  } else if (text == "cpb") {
    b.kind = Kind::Cpb;
  } else if (text == "mm") {
    b.kind = Kind::Mm;
  } else if (text == "sl") {
    b.kind = Kind::Sl;
  } else if (text.starts_with("mc")) {
    b.kind = Kind::Mc;
    b.samples = 100;
    if (text.size() > 2) {
      if (text[2] != ':') throw Error("backend must look like mc:<samples>");
      const std::string digits(text.substr(3));
      if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
        throw Error("invalid Monte Carlo sample count '" + digits + "'");
      }
      b.samples = std::stoull(digits);
      if (b.samples == 0) throw Error("Monte Carlo needs at least one sample");
    }
  } else {
    throw Error("unknown backend '" + std::string(text) + "'");
  }
  return b;
}

std::string Backend::name() const {
  switch (kind) {
    case Kind::Prob:
      return "prob";
    case Kind::Cpb:
      return "cpb";
    case Kind::Mm:
      return "mm";
    case Kind::Sl:
      return "sl";
    case Kind::Mc:
      return "mc:" + std::to_string(samples);
  }
  return "?";
}

Inference opinion_inference(const Opinion& op, double prior_weight) {
  Opinion o = op;
  o.belief = std::max(o.belief, 0.0);
  o.disbelief = std::max(o.disbelief, 0.0);
  o.uncertainty = std::max(o.uncertainty, 0.0);
  const double total = o.belief + o.disbelief + o.uncertainty;
  if (total > 0.0) {
    o.belief /= total;
    o.disbelief /= total;
    o.uncertainty /= total;
  }
  o.base_rate = std::clamp(o.base_rate, 1e-9, 1.0 - 1e-9);
  const double mean = std::clamp(o.projected(), 0.0, 1.0);
  if (o.uncertainty <= 1e-15) return {mean, 0.0, BetaLabel::point_mass(mean, o.base_rate)};
  const BetaLabel label = from_opinion(o, prior_weight);
  return {label.mean(), moments_of(label).variance, label};
}

Inference infer(const Backend& backend, const Circuit& conditioned, const LabelTable& labels,
                const std::optional<LeafCovariance>& leaf_cov, std::uint64_t seed) {
  switch (backend.kind) {
    case Backend::Kind::Prob: {
      const double p = conditioned_eval(conditioned, ProbSemiring{}, labels);
      return {p, 0.0, BetaLabel::point_mass(std::clamp(p, 0.0, 1.0))};
    }
    case Backend::Kind::Cpb: {
      const QueryResult r = cpb_query(conditioned, labels, leaf_cov);
      return {r.mean, moments_of(r.matched).variance, r.matched};
    }
    case Backend::Kind::Mm: {
      const BetaLabel l = mm_conditioned_label(conditioned, labels);
      const Moments m = moments_of(l);
      return {m.mean, m.variance, l};
    }
    case Backend::Kind::Sl:
      return opinion_inference(conditioned_eval(conditioned, SlSemiring{}, labels));
    case Backend::Kind::Mc: {
      const McResult r = mc_eval(conditioned, labels, backend.samples, seed);
      const double mean = std::clamp(r.mean, 0.0, 1.0);
      const double var = std::clamp(r.variance, 0.0, mean * (1.0 - mean));
      const BetaLabel l = moment_match({mean, var});
      return {mean, moments_of(l).variance, l};
    }
  }
  throw Error("unhandled backend");
}

std::vector<double> default_gammas() {
  std::vector<double> g;
  for (int i = 1; i <= 19; ++i) g.push_back(0.05 * i);
  return g;
}

void ExperimentConfig::apply_fast() {
  truth_draws = 30;
  repetitions = 5;
  fast = true;
}

void ExperimentConfig::check() const {
  if (truth_draws * repetitions < 30) {
    throw Error("truth_draws * repetitions must be at least 30 for calibration statistics");
  }
  if (n_ins.empty()) throw Error("n_ins must list at least one value");
  if (backends.empty()) throw Error("at least one backend is required");
  if (!(truth_low > 0.0 && truth_low < truth_high && truth_high < 1.0)) {
    throw Error("truth range must satisfy 0 < low < high < 1");
  }
  for (double g : gammas) {
    if (!(g > 0.0 && g < 1.0)) throw Error("significance levels must lie in (0,1)");
  }
}

namespace {

EvidenceMode parse_mode(const std::string& s) {
  if (s == "fixed") return EvidenceMode::Fixed;
  if (s == "uniform") return EvidenceMode::Uniform;
  if (s == "forward") return EvidenceMode::Forward;
  throw Error("unknown evidence_mode '" + s + "'");
}

std::string mode_name(EvidenceMode m) {
  switch (m) {
    case EvidenceMode::Fixed:
      return "fixed";
    case EvidenceMode::Uniform:
      return "uniform";
    case EvidenceMode::Forward:
      return "forward";
  }
  return "?";
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  ExperimentConfig cfg;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(std::string("invalid experiment config: ") + e.what());
  }
  try {
    if (j.contains("program")) cfg.program = j.at("program").get<std::string>();
    if (j.contains("shared_label")) cfg.shared_label = j.at("shared_label").get<bool>();
    if (j.contains("n_ins")) cfg.n_ins = j.at("n_ins").get<std::vector<std::size_t>>();
    if (j.contains("truth_draws")) cfg.truth_draws = j.at("truth_draws").get<std::size_t>();
    if (j.contains("repetitions")) cfg.repetitions = j.at("repetitions").get<std::size_t>();
    if (j.contains("backends")) {
      cfg.backends.clear();
      for (const auto& b : j.at("backends")) cfg.backends.push_back(Backend::parse(b.get<std::string>()));
    }
    if (j.contains("gammas")) cfg.gammas = j.at("gammas").get<std::vector<double>>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("golden_samples")) cfg.golden_samples = j.at("golden_samples").get<std::size_t>();
    if (j.contains("truth_range")) {
      const auto r = j.at("truth_range").get<std::vector<double>>();
      if (r.size() != 2) throw Error("truth_range needs two values");
      cfg.truth_low = r[0];
      cfg.truth_high = r[1];
    }
    if (j.contains("evidence_mode")) cfg.evidence_mode = parse_mode(j.at("evidence_mode").get<std::string>());
    if (j.contains("fast") && j.at("fast").get<bool>()) cfg.apply_fast();
  } catch (const json::exception& e) {
    throw Error(std::string("invalid experiment config: ") + e.what());
  }
  if (cfg.gammas.empty()) cfg.gammas = default_gammas();
  cfg.check();
  return cfg;
}

std::string experiment_config_json(const ExperimentConfig& cfg) {
  json j;
  j["program"] = cfg.program;
  j["shared_label"] = cfg.shared_label;
  j["n_ins"] = cfg.n_ins;
  j["truth_draws"] = cfg.truth_draws;
  j["repetitions"] = cfg.repetitions;
  std::vector<std::string> names;
  for (const Backend& b : cfg.backends) names.push_back(b.name());
  j["backends"] = names;
  j["gammas"] = cfg.gammas.empty() ? default_gammas() : cfg.gammas;
  j["seed"] = cfg.seed;
  j["golden_samples"] = cfg.golden_samples;
  j["truth_range"] = {cfg.truth_low, cfg.truth_high};
  j["evidence_mode"] = mode_name(cfg.evidence_mode);
  j["fast"] = cfg.fast;
  return j.dump(2) + "\n";
}

const BackendMetrics& MetricsReport::find(std::size_t n_ins, const std::string& backend) const {
  for (const CellReport& c : cells) {
    if (c.n_ins != n_ins) continue;
    for (const BackendMetrics& m : c.backends) {
      if (m.backend == backend) return m;
    }
  }
  throw Error("no metrics for backend " + backend + " at n_ins " + std::to_string(n_ins));
}

LabelTable program_labels(const Program& p, const std::vector<BetaLabel>& parameters) {
  LabelTable labels(p.theory.var_count);
  std::vector<int> representative(p.parameter_count, 0);
  for (int v = 1; v <= p.theory.var_count; ++v) {
    const int param = p.parameter_of[v];
    if (param < 0) {
      labels.set_indicator(v);
      continue;
    }
    labels.set(v, parameters.at(param));
    if (representative[param] == 0) {
      representative[param] = v;
    } else {
      labels.tie(v, representative[param]);
    }
  }
  return labels;
}

std::pair<double, double> central_interval(const BetaLabel& label, double gamma) {
  if (label.is_point_mass()) return {label.mean(), label.mean()};
  const double tail = (1.0 - gamma) / 2.0;
  return {boost::math::ibeta_inv(label.alpha_pos(), label.alpha_neg(), tail),
          boost::math::ibeta_inv(label.alpha_pos(), label.alpha_neg(), 1.0 - tail)};
}

std::vector<double> calibration_curve(const std::vector<TrialRecord>& records,
                                      const std::vector<double>& gammas) {
  std::vector<double> curve;
  for (double g : gammas) {
    if (records.empty()) {
      curve.push_back(0.0);
      continue;
    }
    std::size_t inside = 0;
    for (const TrialRecord& r : records) {
      const auto [lo, hi] = central_interval(r.result.label, g);
      if (r.truth >= lo && r.truth <= hi) ++inside;
    }
    curve.push_back(static_cast<double>(inside) / static_cast<double>(records.size()));
  }
  return curve;
}

std::optional<double> strength_correlation(const std::vector<double>& a,
                                           const std::vector<double>& b) {
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (std::isfinite(a[i]) && std::isfinite(b[i])) {
      x.push_back(a[i]);
      y.push_back(b[i]);
    }
  }
  if (x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

namespace {

struct TruthDraw {
  std::vector<double> parameters;
  std::vector<EvidenceItem> evidence;
};

TruthDraw draw_truth(const Program& p, const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  TruthDraw t;
  for (int k = 0; k < p.parameter_count; ++k) {
    t.parameters.push_back(rng.uniform(cfg.truth_low, cfg.truth_high));
  }
  if (!p.evidence_values.empty()) {
    for (std::size_t i = 0; i < p.evidence_vars.size(); ++i) {
      t.evidence.push_back({p.evidence_vars[i], p.evidence_values[i]});
    }
    return t;
  }
  if (cfg.evidence_mode == EvidenceMode::Forward && !p.node_vars.empty()) {
    std::vector<int> value_of_var(p.theory.var_count + 1, -1);
    std::vector<bool> node_value(p.node_vars.size(), false);
    std::vector<bool> done(p.node_vars.size(), false);
    // Nodes are numbered after their parents' variables, so sort by variable.
    std::vector<std::size_t> order(p.node_vars.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return p.node_vars[a] < p.node_vars[b]; });
    for (std::size_t i : order) {
      std::size_t config = 0;
      for (std::size_t j = 0; j < p.node_parents[i].size(); ++j) {
        if (node_value[p.node_parents[i][j]]) config |= std::size_t{1} << j;
      }
      node_value[i] = rng.bernoulli(t.parameters[p.cpt[i][config]]);
      value_of_var[p.node_vars[i]] = node_value[i] ? 1 : 0;
      done[i] = true;
    }
    for (int v : p.evidence_vars) t.evidence.push_back({v, value_of_var[v] == 1});
    return t;
  }
  for (int v : p.evidence_vars) t.evidence.push_back({v, rng.bernoulli(0.5)});
  return t;
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return xs[lo] + (xs[hi] - xs[lo]) * (pos - static_cast<double>(lo));
}

}  // namespace

MetricsReport run_experiment(const ExperimentConfig& input) {
  ExperimentConfig cfg = input;
  if (cfg.gammas.empty()) cfg.gammas = default_gammas();
  cfg.check();
  const Program program = cfg.program == "smokers" ? smokers_program(cfg.shared_label)
                                                   : builtin_program(cfg.program);

  std::map<std::vector<std::pair<int, bool>>, std::vector<Circuit>> cache;
  auto conditioned_for = [&](const std::vector<EvidenceItem>& evidence) -> const std::vector<Circuit>& {
    std::vector<std::pair<int, bool>> key;
    for (const auto& e : evidence) key.emplace_back(e.var, e.value);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const Circuit compiled = compile_program(program, evidence);
    std::vector<Circuit> per_query;
    for (int q : program.query_vars) per_query.push_back(set_condition(compiled, q, evidence));
    return cache.emplace(key, std::move(per_query)).first->second;
  };

  MetricsReport report;
  report.gammas = cfg.gammas;

  for (std::size_t k = 0; k < cfg.n_ins.size(); ++k) {
    CellReport cell;
    cell.n_ins = cfg.n_ins[k];
    cell.backends.resize(cfg.backends.size());
    for (std::size_t b = 0; b < cfg.backends.size(); ++b) cell.backends[b].backend = cfg.backends[b].name();
    std::vector<std::vector<double>> strengths(cfg.backends.size());
    std::vector<std::vector<double>> golden_strengths(cfg.backends.size());

    for (std::size_t g = 0; g < cfg.truth_draws; ++g) {
      const std::uint64_t draw_seed = split_seed(cfg.seed, g);
      const TruthDraw truth = draw_truth(program, cfg, split_seed(draw_seed, 0));
      const auto& circuits = conditioned_for(truth.evidence);
      std::vector<BetaLabel> truth_params;
      for (double p : truth.parameters) truth_params.push_back(BetaLabel::point_mass(p));
      const LabelTable truth_labels = program_labels(program, truth_params);
      std::vector<double> truths;
      for (const Circuit& c : circuits) truths.push_back(conditioned_eval(c, ProbSemiring{}, truth_labels));

      for (std::size_t r = 0; r < cfg.repetitions; ++r) {
        const std::uint64_t data_seed = split_seed(split_seed(draw_seed, 1 + k), r);
        const Dataset data = sample_observations(truth.parameters, cfg.n_ins[k], data_seed);
        const FitResult fit = fit_complete(data);
        std::vector<BetaLabel> params;
        for (int v = 1; v <= program.parameter_count; ++v) params.push_back(fit.labels.label(v));
        const LabelTable labels = program_labels(program, params);

        for (std::size_t qi = 0; qi < circuits.size(); ++qi) {
          std::optional<double> golden_strength;
          if (cfg.golden_samples > 0) {
            try {
              const McResult gm = mc_eval(circuits[qi], labels, cfg.golden_samples,
                                          split_seed(data_seed, 1000 + qi));
              golden_strength = mc_strength(gm.samples);
            } catch (const Error&) {
              golden_strength.reset();
            }
          }
          for (std::size_t b = 0; b < cfg.backends.size(); ++b) {
            BackendMetrics& m = cell.backends[b];
            TrialRecord rec;
            rec.draw = g;
            rec.repetition = r;
            rec.query = program.query_vars[qi];
            rec.truth = truths[qi];
            const auto start = std::chrono::steady_clock::now();
            try {
              rec.result = infer(cfg.backends[b], circuits[qi], labels, std::nullopt,
                                 split_seed(data_seed, 2000 + 64 * qi + b));
            } catch (const Error&) {
              ++m.failures;
              continue;
            }
            rec.seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            m.records.push_back(rec);
            if (golden_strength) {
              strengths[b].push_back(rec.result.label.strength());
              golden_strengths[b].push_back(*golden_strength);
            }
          }
        }
      }
    }

    for (std::size_t b = 0; b < cfg.backends.size(); ++b) {
      BackendMetrics& m = cell.backends[b];
      m.trials = m.records.size();
      double se = 0.0;
      double pv = 0.0;
      std::vector<double> times;
      for (const TrialRecord& rec : m.records) {
        se += (rec.result.mean - rec.truth) * (rec.result.mean - rec.truth);
        pv += rec.result.variance;
        times.push_back(rec.seconds);
      }
      if (m.trials > 0) {
        m.actual_rmse = std::sqrt(se / static_cast<double>(m.trials));
        m.predicted_rmse = std::sqrt(pv / static_cast<double>(m.trials));
      }
      m.coverage = calibration_curve(m.records, cfg.gammas);
      if (cfg.golden_samples > 0) m.strength_correlation = strength_correlation(strengths[b], golden_strengths[b]);
      for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) m.timing_quantiles.push_back(quantile(times, q));
    }
    report.cells.push_back(std::move(cell));
  }
  return report;
}

namespace {

std::string fmt(double x) {
  std::ostringstream out;
  out << std::setprecision(10) << x;
  return out.str();
}

}  // namespace

std::string rmse_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "n_ins,backend,actual_rmse,predicted_rmse,trials,failures\n";
  for (const CellReport& c : report.cells) {
    for (const BackendMetrics& m : c.backends) {
      out << c.n_ins << ',' << m.backend << ',' << fmt(m.actual_rmse) << ','
          << fmt(m.predicted_rmse) << ',' << m.trials << ',' << m.failures << '\n';
    }
  }
  return out.str();
}

std::string calibration_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "n_ins,backend,gamma,coverage\n";
  for (const CellReport& c : report.cells) {
    for (const BackendMetrics& m : c.backends) {
      for (std::size_t i = 0; i < report.gammas.size() && i < m.coverage.size(); ++i) {
        out << c.n_ins << ',' << m.backend << ',' << fmt(report.gammas[i]) << ','
            << fmt(m.coverage[i]) << '\n';
      }
    }
  }
  return out.str();
}

std::string correlation_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "n_ins,backend,pearson_r\n";
  for (const CellReport& c : report.cells) {
    for (const BackendMetrics& m : c.backends) {
      out << c.n_ins << ',' << m.backend << ','
          << (m.strength_correlation ? fmt(*m.strength_correlation) : "undefined") << '\n';
    }
  }
  return out.str();
}

std::string timing_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "n_ins,backend,min_us,q25_us,median_us,q75_us,max_us\n";
  for (const CellReport& c : report.cells) {
    for (const BackendMetrics& m : c.backends) {
      out << c.n_ins << ',' << m.backend;
      for (double t : m.timing_quantiles) out << ',' << fmt(t * 1e6);
      out << '\n';
    }
  }
  return out.str();
}

void write_reports(const MetricsReport& report, const ExperimentConfig& cfg,
                   const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(std::filesystem::path(dir) / name);
    if (!out) throw Error("cannot write " + name + " in " + dir);
    out << body;
  };
  write("config.json", experiment_config_json(cfg));
  write("rmse.csv", rmse_csv(report));
  write("calibration.csv", calibration_csv(report));
  write("correlation.csv", correlation_csv(report));
  write("timing.csv", timing_csv(report));
}

}  // namespace pcbeta
