// pcbeta: second-order inference on d-DNNF circuits with beta-distributed leaves.

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "pcbeta/betacalc.hpp"
#include "pcbeta/circuit.hpp"
#include "pcbeta/compile.hpp"
#include "pcbeta/errors.hpp"
#include "pcbeta/harness.hpp"
#include "pcbeta/label_table.hpp"
#include "pcbeta/learn.hpp"
#include "pcbeta/mc.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitInconsistent = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pcbeta::Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct InferArgs {
  std::string circuit;
  std::string labels;
  std::string cov;
  std::string evidence;
  std::string samples_out;
  int query = 0;
  std::string backend = "cpb";
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  int max_check_vars = 16;
};

int run_infer(const InferArgs& a) {
  using namespace pcbeta;
  const Circuit c = read_nnf_file(a.circuit);
  ValidateOptions vo;
  vo.max_check_vars = a.max_check_vars;
  vo.trust_determinism = true;
  const ValidationReport report = validate(c, vo);
  if (!report.ok()) {
    for (const auto& v : report.violations) std::cerr << "invalid circuit: " << v.message << '\n';
    return kExitValidation;
  }
  ConditionSpec cond;
  if (!a.evidence.empty()) cond = parse_condition(slurp(a.evidence));
  if (a.query != 0) cond.query = a.query;
  if (!cond.query) throw Error("a query literal is required (--query or a 'query' line)");
  const LabelTable labels = parse_labels(slurp(a.labels), c.var_count());
  std::optional<LeafCovariance> cov;
  if (!a.cov.empty()) cov = parse_leaf_covariance(slurp(a.cov), labels);
  const Circuit conditioned = set_condition(c, cond.query, cond.evidence);

  Backend backend = Backend::parse(a.backend);
  if (backend.kind == Backend::Kind::Mc && a.backend == "mc") backend.samples = a.samples;
  if (backend.kind == Backend::Kind::Mc && !a.samples_out.empty()) {
    const McResult r = mc_eval(conditioned, labels, backend.samples, a.seed);
    std::ofstream out(a.samples_out);
    out << std::setprecision(17);
    for (double x : r.samples) out << x << '\n';
  }
  const Inference r = infer(backend, conditioned, labels, cov, a.seed);
  std::cout << std::setprecision(10) << r.mean << ' ' << r.variance << ' ';
  if (r.label.is_point_mass()) {
    std::cout << "inf inf\n";
  } else {
    std::cout << r.label.alpha_pos() << ' ' << r.label.alpha_neg() << '\n';
  }
  return 0;
}

int run_validate(const std::string& path, int max_check_vars, bool trust) {
  using namespace pcbeta;
  const Circuit c = read_nnf_file(path);
  ValidateOptions vo;
  vo.max_check_vars = max_check_vars;
  vo.trust_determinism = trust;
  const ValidationReport report = validate(c, vo);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& v : report.violations) std::cout << "violation: " << v.message << '\n';
  std::cout << (report.ok() ? "ok" : "invalid") << ": " << c.size() << " nodes, "
            << c.var_count() << " variables, determinism "
            << (report.determinism_checked ? "checked" : "trusted") << '\n';
  return report.ok() ? 0 : kExitValidation;
}

int run_compile(const std::string& name, bool no_memo, const std::string& out_path,
                const std::string& legend_path) {
  using namespace pcbeta;
  const Program p = builtin_program(name);
  std::vector<EvidenceItem> evidence;
  for (std::size_t i = 0; i < p.evidence_vars.size(); ++i) {
    const bool value = p.evidence_values.empty() ? true : p.evidence_values[i];
    evidence.push_back({p.evidence_vars[i], value});
  }
  const Circuit c = compile_program(p, evidence, !no_memo);
  const std::string text = write_nnf(c);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream(out_path) << text;
  }
  if (!legend_path.empty()) {
    std::ofstream legend(legend_path);
    for (int v = 1; v <= p.theory.var_count; ++v) {
      legend << v << ' ' << p.names[v];
      if (!p.is_annotated(v)) legend << " derived";
      for (const EvidenceItem& e : evidence) {
        if (e.var == v) legend << " evidence=" << (e.value ? 1 : 0);
      }
      for (int q : p.query_vars) {
        if (q == v) legend << " query";
      }
      legend << '\n';
    }
  }
  return 0;
}

int run_fit(const std::string& path, double base_rate, double prior_weight) {
  using namespace pcbeta;
  const Dataset d = parse_dataset(slurp(path));
  std::cout << write_labels(fit_complete(d, base_rate, prior_weight).labels);
  return 0;
}

int run_experiment_cmd(const std::string& config, const std::string& out, bool fast) {
  using namespace pcbeta;
  ExperimentConfig cfg = parse_experiment_config(slurp(config));
  if (fast) cfg.apply_fast();
  const MetricsReport report = run_experiment(cfg);
  write_reports(report, cfg, out);
  std::cout << rmse_csv(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Second-order probabilistic inference on d-DNNF circuits"};
  app.require_subcommand(1);

  InferArgs infer_args;
  auto* infer = app.add_subcommand("infer", "Conditioned query with one backend");
  infer->add_option("--circuit", infer_args.circuit, "NNF circuit file")->required()->check(CLI::ExistingFile);
  infer->add_option("--labels", infer_args.labels, "Label table file")->required()->check(CLI::ExistingFile);
  infer->add_option("--cov", infer_args.cov, "Leaf covariance triplets")->check(CLI::ExistingFile);
  infer->add_option("--query", infer_args.query, "Query literal (overrides the evidence file)");
  infer->add_option("--evidence", infer_args.evidence, "Evidence/query file")->check(CLI::ExistingFile);
  infer->add_option("--backend", infer_args.backend, "prob | sl | mm | cpb | mc | mc:<k>")
      ->capture_default_str();
  infer->add_option("--samples", infer_args.samples, "Monte Carlo samples for --backend mc")
      ->capture_default_str();
  infer->add_option("--seed", infer_args.seed, "Random seed")->capture_default_str();
  infer->add_option("--dump-samples", infer_args.samples_out, "Write Monte Carlo samples here");
  infer->add_option("--max-check-vars", infer_args.max_check_vars, "Determinism check limit")
      ->capture_default_str();

  std::string config;
  std::string out_dir = "results";
  bool fast = false;
  auto* experiment = app.add_subcommand("experiment", "Run a calibration experiment");
  experiment->add_option("--config", config, "JSON experiment config")->required()->check(CLI::ExistingFile);
  experiment->add_option("--out", out_dir, "Output directory")->capture_default_str();
  experiment->add_flag("--fast", fast, "Reduced trial counts");

  std::string program;
  std::string compile_out;
  std::string legend_out;
  bool no_memo = false;
  auto* compile = app.add_subcommand("compile", "Compile a builtin example program to NNF");
  compile->add_option("program", program, "burglary | smokers | smokers-shared | net1 | net2 | net3")
      ->required();
  compile->add_option("--out", compile_out, "Output NNF file (stdout if omitted)");
  compile->add_option("--legend", legend_out, "Write the variable legend here");
  compile->add_flag("--no-memo", no_memo, "Expand shared sub-functions as a tree");

  std::string validate_path;
  int max_check_vars = 16;
  bool trust = false;
  auto* validate = app.add_subcommand("validate", "Check decomposability and determinism");
  validate->add_option("circuit", validate_path, "NNF circuit file")->required()->check(CLI::ExistingFile);
  validate->add_option("--max-check-vars", max_check_vars, "Determinism check limit")->capture_default_str();
  validate->add_flag("--trust", trust, "Silence the unchecked-determinism warning");

  std::string data_path;
  double base_rate = pcbeta::kDefaultBaseRate;
  double prior_weight = pcbeta::kDefaultPriorWeight;
  auto* fit = app.add_subcommand("fit", "Learn beta labels from complete observations");
  fit->add_option("data", data_path, "Dataset file")->required()->check(CLI::ExistingFile);
  fit->add_option("--base-rate", base_rate, "Prior base rate")->capture_default_str();
  fit->add_option("--prior-weight", prior_weight, "Prior weight")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*infer) return run_infer(infer_args);
    if (*experiment) return run_experiment_cmd(config, out_dir, fast);
    if (*compile) return run_compile(program, no_memo, compile_out, legend_out);
    if (*validate) return run_validate(validate_path, max_check_vars, trust);
    if (*fit) return run_fit(data_path, base_rate, prior_weight);
  } catch (const pcbeta::InconsistentEvidence& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInconsistent;
  } catch (const pcbeta::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const pcbeta::CircuitError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
