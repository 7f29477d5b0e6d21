#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pcbeta/betacalc.hpp"
#include "pcbeta/cpb.hpp"
#include "pcbeta/errors.hpp"
#include "pcbeta/learn.hpp"
#include "pcbeta/mc.hpp"
#include "pcbeta/rng.hpp"

#ifndef PCBETA_TEST_DATA_DIR
#define PCBETA_TEST_DATA_DIR "tests/data"
#endif

namespace pcbeta::testing {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

bool coin(std::mt19937_64& rng) { return std::bernoulli_distribution(0.5)(rng); }

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::string describe(const char* what, double got, double want) {
  std::ostringstream out;
  out.precision(17);
  out << what << ": got " << got << ", want " << want;
  return out.str();
}

std::vector<int> mentioned(const Circuit& c) {
  std::vector<int> vars;
  for (int v = 1; v <= c.var_count(); ++v) {
    if (c.mentions_var(v)) vars.push_back(v);
  }
  return vars;
}

bool same_structure(const Circuit& a, const Circuit& b) {
  if (a.size() != b.size() || a.var_count() != b.var_count()) return false;
  for (NodeId i = 0; i < a.size(); ++i) {
    const Node& x = a.node(i);
    const Node& y = b.node(i);
    if (x.kind != y.kind || x.children != y.children) return false;
    if (x.kind == NodeKind::Literal && x.literal != y.literal) return false;
  }
  return true;
}

BetaLabel random_beta(std::mt19937_64& rng) {
  const double a = uniform(rng, 0.05, 0.95);
  const double w = uniform(rng, 0.5, 5.0);
  return BetaLabel::from_alphas(w * a + uniform(rng, 0.0, 50.0),
                                w * (1.0 - a) + uniform(rng, 0.0, 50.0), a, w);
}

}  // namespace

std::string data_file(const std::string& name) {
  return std::string(PCBETA_TEST_DATA_DIR) + "/" + name;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Circuit burglary_circuit() { return read_nnf_file(data_file("burglary.nnf")); }

LabelTable burglary_labels() {
  return parse_labels(read_text(data_file("burglary.labels")), 3);
}

LabelTable burglary_point_labels() {
  return parse_labels(read_text(data_file("burglary_point.labels")), 3);
}

bool circuit_satisfied(const Circuit& c, const std::vector<bool>& assignment) {
  std::vector<bool> value(c.size());
  for (NodeId i = 0; i < c.size(); ++i) {
    const Node& n = c.node(i);
    switch (n.kind) {
      case NodeKind::True:
        value[i] = true;
        break;
      case NodeKind::False:
        value[i] = false;
        break;
      case NodeKind::Literal:
        value[i] = assignment[var_of(n.literal)] == (n.literal > 0);
        break;
      case NodeKind::And:
        value[i] = std::all_of(n.children.begin(), n.children.end(),
                               [&](NodeId ch) { return value[ch]; });
        break;
      case NodeKind::Or:
        value[i] = std::any_of(n.children.begin(), n.children.end(),
                               [&](NodeId ch) { return value[ch]; });
        break;
    }
  }
  return value.back();
}

namespace {

template <class Accept>
double enumerate(int n, const std::vector<double>& p, Accept accept) {
  double total = 0.0;
  std::vector<bool> x(n + 1);
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    double w = 1.0;
    for (int v = 1; v <= n; ++v) {
      x[v] = (m >> (v - 1)) & 1;
      w *= x[v] ? p[v] : 1.0 - p[v];
    }
    if (accept(x)) total += w;
  }
  return total;
}

}  // namespace

double enumerate_wmc(const Circuit& c, const std::vector<double>& p) {
  return enumerate(c.var_count(), p, [&](const std::vector<bool>& x) {
    return circuit_satisfied(c, x);
  });
}

double enumerate_theory_wmc(const Theory& t, const std::vector<double>& p,
                            const std::vector<EvidenceItem>& evidence) {
  return enumerate(t.var_count, p, [&](const std::vector<bool>& x) {
    for (const EvidenceItem& e : evidence) {
      if (x[e.var] != e.value) return false;
    }
    return t.satisfied_by(x);
  });
}

Theory random_theory(std::mt19937_64& rng, int var_count, int constraints) {
  auto literal = [&] {
    const int v = uniform_int(rng, 1, var_count);
    return var(coin(rng) ? v : -v);
  };
  for (;;) {
    Theory t;
    t.var_count = var_count;
    for (int i = 0; i < constraints; ++i) {
      if (var_count >= 3 && uniform_int(rng, 0, 3) == 0) {
        t.constraints.push_back(iff(literal(), disj({literal(), conj({literal(), literal()})})));
      } else {
        std::vector<Formula> clause;
        const int width = uniform_int(rng, 1, std::min(3, var_count));
        for (int k = 0; k < width; ++k) clause.push_back(literal());
        t.constraints.push_back(disj(std::move(clause)));
      }
    }
    std::vector<double> half(var_count + 1, 0.5);
    if (enumerate_theory_wmc(t, half) > 0.0) return t;
  }
}

LabelTable random_labels(std::mt19937_64& rng, int var_count, double min_strength,
                         double max_strength) {
  LabelTable labels(var_count);
  for (int v = 1; v <= var_count; ++v) {
    const double s = uniform(rng, min_strength, max_strength);
    const double lo = std::max(0.05, 1.0 / s);
    const double m = uniform(rng, lo, 1.0 - lo);
    labels.set(v, BetaLabel::from_mean_strength(m, s));
  }
  return labels;
}

std::vector<double> label_means(const LabelTable& labels) {
  std::vector<double> p(labels.var_count() + 1, 0.0);
  for (int v = 1; v <= labels.var_count(); ++v) p[v] = labels.label(v).mean();
  return p;
}

RandomCase random_case(std::mt19937_64& rng, int min_vars, int max_vars, double min_strength,
                       double max_strength) {
  for (;;) {
    RandomCase rc;
    const int n = uniform_int(rng, min_vars, max_vars);
    rc.theory = random_theory(rng, n, uniform_int(rng, 1, n));
    const Circuit c = shannon_compile(rc.theory);
    const std::vector<int> vars = mentioned(c);
    if (vars.empty()) continue;
    rc.labels = random_labels(rng, n, min_strength, max_strength);
    const int q = vars[uniform_int(rng, 0, static_cast<int>(vars.size()) - 1)];
    rc.query = coin(rng) ? q : -q;
    for (int v : vars) {
      if (v != q && uniform_int(rng, 0, 3) == 0) rc.evidence.push_back({v, coin(rng)});
    }
    if (enumerate_theory_wmc(rc.theory, label_means(rc.labels), rc.evidence) < 1e-6) continue;
    rc.conditioned = set_condition(c, rc.query, rc.evidence);
    return rc;
  }
}

TotalProbabilityCase random_total_probability_case(std::mt19937_64& rng) {
  for (;;) {
    const int k = uniform_int(rng, 1, 4);
    const Theory t = random_theory(rng, k, uniform_int(rng, 1, k + 1));
    const Circuit y = shannon_compile(t);
    if (y.node(y.root()).kind == NodeKind::True) continue;
    std::vector<Node> nodes = y.nodes();
    const int x = k + 1;
    const auto y_root = static_cast<NodeId>(nodes.size() - 1);
    const auto base = static_cast<NodeId>(nodes.size());
    nodes.push_back({NodeKind::Literal, {}, x, 0});
    nodes.push_back({NodeKind::Literal, {}, -x, 0});
    nodes.push_back({NodeKind::And, {y_root, base}, 0, 0});
    nodes.push_back({NodeKind::And, {y_root, base + 1}, 0, 0});
    nodes.push_back({NodeKind::Or, {base + 2, base + 3}, 0, x});
    TotalProbabilityCase out;
    out.circuit = Circuit(x, std::move(nodes));
    out.y_root = y_root;
    out.labels = random_labels(rng, x, 2.0, 30.0);
    out.y_circuit = Circuit(k, y.nodes());
    return out;
  }
}

PropertyResult check_round_trips(std::uint64_t seed, int cases) {
  PropertyResult r{"round-trips", cases, 0, {}};
  std::mt19937_64 rng(seed);
  for (int i = 0; i < cases; ++i) {
    const BetaLabel beta = random_beta(rng);
    const BetaLabel back = from_opinion(to_opinion(beta), beta.prior_weight());
    const double tol = 1e-10 * std::max(1.0, beta.strength());
    if (!close(back.alpha_pos(), beta.alpha_pos(), tol) ||
        !close(back.alpha_neg(), beta.alpha_neg(), tol) ||
        !close(back.base_rate(), beta.base_rate(), 1e-12)) {
      r.fail(describe("opinion round-trip alpha_pos", back.alpha_pos(), beta.alpha_pos()));
      continue;
    }

    const int n = uniform_int(rng, 1, 8);
    LabelTable labels(n);
    for (int v = 1; v <= n; ++v) {
      switch (uniform_int(rng, 0, 3)) {
        case 0:
          labels.set_indicator(v);
          break;
        case 1:
          labels.set(v, BetaLabel::point_mass(uniform(rng, 0.0, 1.0)));
          break;
        default:
          labels.set(v, random_beta(rng));
      }
    }
    const LabelTable parsed = parse_labels(write_labels(labels), n);
    for (int v = 1; v <= n; ++v) {
      if (parsed.is_indicator(v) != labels.is_indicator(v) ||
          !(parsed.label(v) == labels.label(v))) {
        r.fail("label file round-trip differs at variable " + std::to_string(v));
        break;
      }
    }

    const Theory t = random_theory(rng, n, uniform_int(rng, 1, n + 1));
    const Circuit c = shannon_compile(t);
    if (!same_structure(parse_nnf(write_nnf(c)), c)) r.fail("nnf round-trip changed the circuit");
  }
  return r;
}

PropertyResult check_complement_sum_to_one(std::uint64_t seed, int cases) {
  PropertyResult r{"complement sum-to-one", cases, 0, {}};
  std::mt19937_64 rng(seed);
  for (int i = 0; i < cases; ++i) {
    const BetaLabel beta = random_beta(rng);
    const BetaLabel comp = beta.complement();
    if (!close(beta.mean() + comp.mean(), 1.0, 1e-12) ||
        !close(complement_covariance(beta), -moments_of(beta).variance, 0.0) ||
        !close(moments_of(comp).variance, moments_of(beta).variance, 1e-15)) {
      r.fail(describe("label complement mean sum", beta.mean() + comp.mean(), 1.0));
      continue;
    }
    const RandomCase rc = random_case(rng, 1, 6, 2.0, 50.0);
    const Circuit raw = shannon_compile(rc.theory);
    const Circuit neg = set_condition(raw, -rc.query, rc.evidence);
    const double a = cpb_query(rc.conditioned, rc.labels).mean;
    const double b = cpb_query(neg, rc.labels).mean;
    if (!close(a + b, 1.0, 1e-9)) r.fail(describe("CPB q and -q mean sum", a + b, 1.0));
  }
  return r;
}

PropertyResult check_moment_match_floor(std::uint64_t seed, int cases) {
  PropertyResult r{"moment-match floor", cases, 0, {}};
  std::mt19937_64 rng(seed);
  for (int i = 0; i < cases; ++i) {
    const double mean = uniform(rng, 1e-4, 1.0 - 1e-4);
    const double var = uniform(rng, 1e-9, 1.5) * mean * (1.0 - mean);
    const double a = uniform(rng, 0.01, 0.99);
    const double w = uniform(rng, 0.1, 10.0);
    const BetaLabel m = moment_match({mean, var}, a, w);
    if (m.is_point_mass()) {
      r.fail("moment match produced a point mass for a proper input");
      continue;
    }
    const double slack = 1e-12 * w;
    if (m.alpha_pos() < w * a - slack || m.alpha_neg() < w * (1.0 - a) - slack) {
      r.fail(describe("floored alpha_pos", m.alpha_pos(), w * a));
      continue;
    }
    if (!close(m.mean(), mean, 1e-12)) r.fail(describe("matched mean", m.mean(), mean));
    const BetaLabel d = moment_match({mean, var});
    if (d.alpha_pos() < 1.0 - 1e-12 || d.alpha_neg() < 1.0 - 1e-12) {
      r.fail("alphas below <1,1> at the default prior");
    }
  }
  return r;
}

PropertyResult check_covariance_symmetry(std::uint64_t seed, int cases) {
  PropertyResult r{"covariance symmetry", cases, 0, {}};
  std::mt19937_64 rng(seed);
  for (int i = 0; i < cases; ++i) {
    const RandomCase rc = random_case(rng, 1, 6, 2.0, 50.0);
    const ShadowedCircuit sc = shadow_circuit(rc.conditioned);
    LeafCovariance leaf = LeafCovariance::independent(rc.labels);
    const int n = rc.labels.var_count();
    if (n >= 2) {
      const int a = uniform_int(rng, 1, n);
      int b = uniform_int(rng, 1, n - 1);
      if (b >= a) ++b;
      const double bound = std::sqrt(moments_of(rc.labels.label(a)).variance *
                                     moments_of(rc.labels.label(b)).variance);
      leaf.set(a, b, uniform(rng, -0.5, 0.5) * bound);
    }
    for (int a = -n; a <= n; ++a) {
      for (int b = -n; b <= n; ++b) {
        if (a == 0 || b == 0) continue;
        if (leaf(a, b) != leaf(b, a) || leaf(-a, b) != -leaf(a, b)) {
          r.fail("leaf covariance is not sign-symmetric");
        }
      }
    }
    MomentState state;
    eval_cov(sc, rc.labels, leaf, &state);
    for (NodeId x = 0; x < state.size(); ++x) {
      const double vx = state.variance(x);
      if (vx < -1e-15) r.fail(describe("negative node variance", vx, 0.0));
      for (NodeId y = 0; y <= x; ++y) {
        const double c = state.covariance(x, y);
        if (c != state.covariance(y, x)) r.fail("cov[x,y] != cov[y,x]");
        const double cs = std::sqrt(std::max(0.0, vx) * std::max(0.0, state.variance(y)));
        if (std::abs(c) > cs * (1.0 + 1e-9) + 1e-15) {
          r.fail(describe("Cauchy-Schwarz bound", std::abs(c), cs));
        }
      }
    }
  }
  return r;
}

PropertyResult check_seeded_determinism(std::uint64_t seed, int cases) {
  PropertyResult r{"seeded determinism", cases, 0, {}};
  std::mt19937_64 rng(seed);
  for (int i = 0; i < cases; ++i) {
    const RandomCase rc = random_case(rng, 1, 5, 2.0, 50.0);
    const std::uint64_t s = rng();
    const McResult a = mc_eval(rc.conditioned, rc.labels, 64, s);
    const McResult b = mc_eval(rc.conditioned, rc.labels, 64, s);
    if (a.samples != b.samples || a.mean != b.mean || a.variance != b.variance) {
      r.fail("Monte Carlo differs under one seed");
    }
    const std::vector<double> probs = {uniform(rng, 0.01, 0.99), uniform(rng, 0.01, 0.99)};
    if (sample_observations(probs, 20, s).rows != sample_observations(probs, 20, s).rows) {
      r.fail("observations differ under one seed");
    }
    const QueryResult x = cpb_query(rc.conditioned, rc.labels);
    const QueryResult y = cpb_query(rc.conditioned, rc.labels);
    if (x.mean != y.mean || x.variance != y.variance) r.fail("CPB is not reproducible");
    if (split_seed(s, i) != split_seed(s, i)) r.fail("seed splitting is not a function");
  }
  return r;
}

}  // namespace pcbeta::testing
