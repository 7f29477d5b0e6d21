#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "pcbeta/circuit.hpp"
#include "pcbeta/compile.hpp"
#include "pcbeta/errors.hpp"
#include "pcbeta/semirings.hpp"
#include "support.hpp"

using namespace pcbeta;
using namespace pcbeta::testing;

namespace {

int parse_error_line(std::string_view text) {
  try {
    parse_nnf(text);
  } catch (const ParseError& e) {
    return static_cast<int>(e.line());
  }
  return -1;
}

bool has_violation(const ValidationReport& r, Violation::Kind kind) {
  return std::any_of(r.violations.begin(), r.violations.end(),
                     [&](const Violation& v) { return v.kind == kind; });
}

}  // namespace

TEST(ParseNnf, SingleLiteral) {
  const Circuit c = parse_nnf("nnf 1 0 1\nL 1\n");
  EXPECT_EQ(c.size(), 1u);
  EXPECT_EQ(c.root(), 0u);
  EXPECT_EQ(c.node(0).kind, NodeKind::Literal);
  EXPECT_EQ(c.node(0).literal, 1);
}

TEST(ParseNnf, AndOfTwoLiterals) {
  const Circuit c = parse_nnf("nnf 3 2 2\nL 1\nL 2\nA 2 0 1\n");
  EXPECT_EQ(c.var_count(), 2);
  EXPECT_EQ(c.node(c.root()).kind, NodeKind::And);
  EXPECT_EQ(c.node(c.root()).children, (std::vector<NodeId>{0, 1}));
}

TEST(ParseNnf, ConstantsAndComments) {
  const Circuit t = parse_nnf("c comment\nnnf 1 0 0\nA 0\n");
  EXPECT_EQ(t.node(0).kind, NodeKind::True);
  const Circuit f = parse_nnf("nnf 1 0 0\nO 0 0\n");
  EXPECT_EQ(f.node(0).kind, NodeKind::False);
}

TEST(ParseNnf, ErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_error_line("nnf x 0 1\nL 1\n"), 1);
  EXPECT_EQ(parse_error_line("nnf 2 1 1\nL 1\nA 1 4\n"), 3);
  EXPECT_EQ(parse_error_line("nnf 2 0 1\nL 1\nL 3\n"), 3);
  EXPECT_EQ(parse_error_line("nnf 2 1 1\nL 1\nA 2 0\n"), 3);
  EXPECT_EQ(parse_error_line("nnf 1 0 1\nX 1\n"), 2);
  EXPECT_EQ(parse_error_line("nnf 1 0 1\nL 0\n"), 2);
  EXPECT_THROW(parse_nnf("nnf 3 0 1\nL 1\n"), ParseError);
  EXPECT_THROW(parse_nnf(""), ParseError);
}

TEST(ParseNnf, WriteRoundTrip) {
  const Circuit c = burglary_circuit();
  const Circuit d = parse_nnf(write_nnf(c));
  ASSERT_EQ(c.size(), d.size());
  for (NodeId i = 0; i < c.size(); ++i) {
    EXPECT_EQ(c.node(i).kind, d.node(i).kind);
    EXPECT_EQ(c.node(i).children, d.node(i).children);
    EXPECT_EQ(c.node(i).literal, d.node(i).literal);
  }
}

TEST(Validate, Burglary) {
  const ValidationReport r = validate(burglary_circuit());
  EXPECT_TRUE(r.ok());
  EXPECT_TRUE(r.determinism_checked);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Validate, AndOverSameVariable) {
  const ValidationReport r = validate(parse_nnf("nnf 3 2 1\nL 1\nL 1\nA 2 0 1\n"));
  EXPECT_TRUE(has_violation(r, Violation::Kind::Decomposability));
  EXPECT_EQ(r.violations.front().node, 2u);
}

TEST(Validate, OverlappingOr) {
  const ValidationReport r = validate(parse_nnf("nnf 3 2 1\nL 1\nL 1\nO 0 2 0 1\n"));
  EXPECT_TRUE(has_violation(r, Violation::Kind::Determinism));
  EXPECT_FALSE(has_violation(r, Violation::Kind::Decomposability));
}

TEST(Validate, DeterminismTrustedAboveLimit) {
  ValidateOptions o;
  o.max_check_vars = 1;
  const ValidationReport r = validate(parse_nnf("nnf 3 2 2\nL 1\nL 2\nO 0 2 0 1\n"), o);
  EXPECT_TRUE(r.ok());
  EXPECT_FALSE(r.determinism_checked);
  EXPECT_EQ(r.warnings.size(), 1u);
  o.trust_determinism = true;
  EXPECT_TRUE(validate(parse_nnf("nnf 3 2 2\nL 1\nL 2\nO 0 2 0 1\n"), o).warnings.empty());
}

TEST(SetCondition, BurglaryStagesQuery) {
  const Circuit c = set_condition(burglary_circuit(), 1, {});
  ASSERT_TRUE(c.query().has_value());
  EXPECT_EQ(*c.query(), 1);
  for (NodeId i = 0; i < c.size(); ++i) EXPECT_TRUE(c.lambda(i));
  const auto lam = query_lambdas(c);
  EXPECT_EQ(lam[1], 0);  // the -b leaf
  EXPECT_EQ(std::count(lam.begin(), lam.end(), 0), 1);
}

TEST(SetCondition, EvidenceClearsContradictingLeaves) {
  const Circuit c = set_condition(burglary_circuit(), 1, {{2, true}});
  EXPECT_FALSE(c.lambda(3));  // -e
  EXPECT_TRUE(c.lambda(2));
  EXPECT_EQ(c.evidence().size(), 1u);
}

TEST(SetCondition, RejectsAbsentQueryVariable) {
  EXPECT_THROW(set_condition(parse_nnf("nnf 1 0 2\nL 1\n"), 2, {}), CircuitError);
  EXPECT_THROW(set_condition(burglary_circuit(), 1, {{7, true}}), Error);
}

TEST(SetCondition, BothPolaritiesResolvableOnNet1) {
  const Program p = net1_program();
  std::vector<EvidenceItem> ev;
  for (int v : p.evidence_vars) ev.push_back({v, true});
  const Circuit c = compile_program(p, ev);
  for (int q : p.query_vars) {
    EXPECT_FALSE(c.leaves_with(q).empty());
    EXPECT_FALSE(c.leaves_with(-q).empty());
  }
}

TEST(SmoothVariables, WrapsDeficientChildren) {
  // OR(1, AND(-1, 2)) is not smooth in 2.
  const Circuit c = parse_nnf("nnf 5 4 2\nL 1\nL -1\nL 2\nA 2 1 2\nO 0 2 0 3\n");
  const Circuit s = smooth_variables(c, {2});
  EXPECT_GT(s.size(), c.size());
  EXPECT_TRUE(validate(s).ok());
  LabelTable labels(2);
  labels.set(1, BetaLabel::point_mass(0.3));
  labels.set(2, BetaLabel::point_mass(0.6));
  EXPECT_NEAR(eval(s, ProbSemiring{}, labels), eval(c, ProbSemiring{}, labels), 1e-15);
  const Circuit same = smooth_variables(burglary_circuit(), {1, 2, 3});
  EXPECT_EQ(same.size(), burglary_circuit().size());
}

TEST(SmoothVariables, MakesLambdaConditioningExact) {
  // Only x1 and -x2 survives evidence x2 = false.
  const Circuit c = parse_nnf("nnf 5 4 2\nL 1\nL -1\nL 2\nA 2 1 2\nO 0 2 0 3\n");
  LabelTable labels(2);
  labels.set(1, BetaLabel::point_mass(0.3));
  labels.set(2, BetaLabel::point_mass(0.6));
  const Circuit cond = set_condition(c, 1, {{2, false}});
  EXPECT_NEAR(conditioned_eval(cond, ProbSemiring{}, labels), 1.0, 1e-15);
  const double p_e = eval(cond, ProbSemiring{}, labels);
  EXPECT_NEAR(p_e, 0.3 * 0.4, 1e-15);
}

TEST(ParseCondition, Lines) {
  const ConditionSpec s = parse_condition("# c\nevidence 3 1\nevidence 2 0\nquery -1\n");
  ASSERT_TRUE(s.query.has_value());
  EXPECT_EQ(*s.query, -1);
  EXPECT_EQ(s.evidence, (std::vector<EvidenceItem>{{3, true}, {2, false}}));
  EXPECT_THROW(parse_condition("evidence 3 2\n"), ParseError);
  EXPECT_THROW(parse_condition("frobnicate\n"), ParseError);
}

TEST(Eval, BurglaryProbabilities) {
  const Circuit c = burglary_circuit();
  const LabelTable labels = burglary_point_labels();
  EXPECT_NEAR(eval(c, ProbSemiring{}, labels), 0.196, 1e-15);
  const Circuit q = set_condition(c, 1, {});
  const auto lam = query_lambdas(q);
  EXPECT_NEAR(eval(q, ProbSemiring{}, labels, lam), 0.07, 1e-15);
}

TEST(Eval, AllLambdasZeroGiveAdditiveIdentity) {
  const Circuit c = burglary_circuit();
  const std::vector<std::uint8_t> zeros(c.size(), 0);
  EXPECT_EQ(eval(c, ProbSemiring{}, burglary_point_labels(), zeros), 0.0);
}

TEST(Eval, EachNodeEvaluatedOnce) {
  const Program p = net1_program();
  std::vector<EvidenceItem> ev;
  for (int v : p.evidence_vars) ev.push_back({v, true});
  const Circuit c = compile_program(p, ev);
  LabelTable labels(c.var_count());
  for (int v = 1; v <= c.var_count(); ++v) labels.set(v, BetaLabel::point_mass(0.4));
  EvalStats stats;
  eval(c, ProbSemiring{}, labels, {}, &stats);
  EXPECT_EQ(stats.node_evaluations, c.size());
}

TEST(Eval, MatchesEnumerationOracle) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const Theory t = random_theory(rng, n, 1 + static_cast<int>(rng() % n));
    const Circuit c = shannon_compile(t);
    const LabelTable labels = random_labels(rng, n, 2, 50);
    const auto p = label_means(labels);
    EXPECT_NEAR(eval(c, ProbSemiring{}, labels), enumerate_wmc(c, p), 1e-10);
    EXPECT_NEAR(eval(c, ProbSemiring{}, labels), enumerate_theory_wmc(t, p), 1e-10);
  }
}

TEST(Eval, NeutralityOfComplementaryLiterals) {
  std::mt19937_64 rng(6);
  const LabelTable labels = random_labels(rng, 20, 2, 100);
  for (int v = 1; v <= 20; ++v) {
    ProbSemiring s;
    EXPECT_NEAR(s.plus(s.leaf(labels, v), s.leaf(labels, -v)), s.one(), 1e-15);
  }
}

TEST(Eval, ChildOrderIndependent) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const int n = 2 + static_cast<int>(rng() % 8);
    const Circuit c = shannon_compile(random_theory(rng, n, n));
    std::vector<Node> nodes = c.nodes();
    for (Node& node : nodes) std::shuffle(node.children.begin(), node.children.end(), rng);
    const Circuit shuffled = c.with_children_order(nodes);
    const LabelTable labels = random_labels(rng, n, 2, 50);
    EXPECT_NEAR(eval(c, ProbSemiring{}, labels), eval(shuffled, ProbSemiring{}, labels), 1e-12);
  }
}
