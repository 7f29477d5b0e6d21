#include <gtest/gtest.h>

#include <random>

#include "pcbeta/cpb.hpp"
#include "pcbeta/errors.hpp"
#include "pcbeta/semirings.hpp"
#include "support.hpp"

using namespace pcbeta;
using namespace pcbeta::testing;

TEST(ProbSemiring, Algebra) {
  ProbSemiring s;
  EXPECT_NEAR(s.divide(0.07, 0.196), 0.357142857, 1e-9);
  EXPECT_EQ(s.divide(0.3, s.one()), 0.3);
  EXPECT_EQ(s.plus(s.zero(), 0.3), 0.3);
  EXPECT_EQ(s.times(s.zero(), 0.3), s.zero());
  EXPECT_THROW(s.divide(0.1, 0.0), InconsistentEvidence);
}

TEST(SlSemiring, IdentitiesAreExact) {
  SlSemiring s;
  const Opinion a{0.2, 0.5, 0.3, 0.4};
  EXPECT_EQ(s.times(a, s.one()), a);
  EXPECT_EQ(s.times(s.one(), a), a);
  EXPECT_EQ(s.plus(a, s.zero()), a);
  EXPECT_EQ(s.plus(s.zero(), a), a);
  EXPECT_EQ(s.times(s.zero(), a), s.zero());
  EXPECT_EQ(s.divide(a, s.one()), a);
}

TEST(SlSemiring, UndefinedDivisionIsVacuous) {
  SlSemiring s;
  EXPECT_EQ(s.divide({0.6, 0.2, 0.2, 0.5}, {0.1, 0.7, 0.2, 0.5}), SlSemiring::kVacuous);
}

TEST(SlSemiring, IndicatorLeavesAreMultiplicativeIdentity) {
  LabelTable labels(2);
  labels.set(1, BetaLabel::from_alphas(2, 8));
  SlSemiring s;
  EXPECT_EQ(s.leaf(labels, 2), s.one());
  EXPECT_EQ(s.leaf(labels, -2), s.one());
  EXPECT_NEAR(s.leaf(labels, 1).projected(), 0.2, 1e-15);
}

TEST(SlSemiring, UncertaintyDependsOnEvaluationOrder) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  bool found = false;
  for (int i = 0; i < 100 && !found; ++i) {
    auto draw = [&] {
      const double b = 0.3 * u(rng), d = 0.3 * u(rng);
      return Opinion{b, d, 1.0 - b - d, 0.3 * u(rng)};
    };
    const Opinion x = draw(), y = draw(), z = draw();
    // x(y + z) and xy + xz denote the same event.
    const Opinion left = sl_product(x, sl_sum(y, z));
    const Opinion right = sl_sum(sl_product(x, y), sl_product(x, z));
    found = std::abs(left.uncertainty - right.uncertainty) > 1e-9;
  }
  EXPECT_TRUE(found);
}

TEST(MmSemiring, Identities) {
  MmSemiring s;
  const Moments a{0.3, 0.01};
  EXPECT_EQ(s.times(a, s.one()), a);
  EXPECT_EQ(s.plus(a, s.zero()), a);
}

TEST(ConditionedEval, BurglaryProb) {
  const Circuit c = set_condition(burglary_circuit(), 1, {});
  EXPECT_NEAR(conditioned_eval(c, ProbSemiring{}, burglary_point_labels()), 5.0 / 14.0, 1e-12);
}

TEST(ConditionedEval, QueryInEvidence) {
  const Circuit c = set_condition(burglary_circuit(), 1, {{1, true}});
  EXPECT_EQ(conditioned_eval(c, ProbSemiring{}, burglary_labels()), 1.0);
  EXPECT_EQ(conditioned_eval(c, SlSemiring{}, burglary_labels()), SlSemiring::kOne);
  const Circuit n = set_condition(burglary_circuit(), -1, {{1, true}});
  EXPECT_EQ(conditioned_eval(n, ProbSemiring{}, burglary_labels()), 0.0);
}

TEST(ConditionedEval, NoEvidenceReturnsLabelMean) {
  const Circuit d = set_condition(
      parse_nnf("nnf 8 8 2\nL 1\nL -1\nL 2\nL -2\nO 2 2 2 3\nA 2 0 4\nA 2 1 4\nO 1 2 5 6\n"), 1,
      {});
  EXPECT_NEAR(conditioned_eval(d, ProbSemiring{}, burglary_point_labels()), 0.1, 1e-15);
}

TEST(ConditionedEval, InconsistentEvidence) {
  const Circuit c = set_condition(burglary_circuit(), 1, {{3, false}});
  EXPECT_THROW(conditioned_eval(c, ProbSemiring{}, burglary_labels()), InconsistentEvidence);
  EXPECT_THROW(conditioned_eval(c, MmSemiring{}, burglary_labels()), InconsistentEvidence);
  EXPECT_THROW(conditioned_eval(c, SlSemiring{}, burglary_labels()), InconsistentEvidence);
}

TEST(MmSemiring, PointMassesReproduceProb) {
  const Circuit c = set_condition(burglary_circuit(), 1, {});
  const Moments m = conditioned_eval(c, MmSemiring{}, burglary_point_labels());
  EXPECT_EQ(m.mean, conditioned_eval(c, ProbSemiring{}, burglary_point_labels()));
  EXPECT_EQ(m.variance, 0.0);
}

TEST(MmSemiring, BurglaryOverestimatesVariance) {
  const Circuit c = set_condition(burglary_circuit(), 1, {});
  const Moments m = conditioned_eval(c, MmSemiring{}, burglary_labels());
  EXPECT_NEAR(m.mean, 0.3571, 1e-3);
  EXPECT_GT(m.variance, cpb_query(c, burglary_labels()).variance);
  const BetaLabel l = mm_conditioned_label(c, burglary_labels());
  EXPECT_NEAR(l.mean(), 5.0 / 14.0, 1e-12);
}

TEST(MeanAgreement, AllBackendsMatchProb) {
  std::mt19937_64 rng(17);
  int sl_checked = 0;
  for (int i = 0; i < 300; ++i) {
    const RandomCase rc = random_case(rng, 1, 8, 2.0, 60.0);
    const double p = conditioned_eval(rc.conditioned, ProbSemiring{}, rc.labels);
    EXPECT_NEAR(cpb_query(rc.conditioned, rc.labels).mean, p, 1e-9);
    try {
      EXPECT_NEAR(conditioned_eval(rc.conditioned, MmSemiring{}, rc.labels).mean, p, 1e-9);
    } catch (const NonConditionable&) {
      EXPECT_GT(p, 1.0 - 1e-9);
    }
    const Opinion o = conditioned_eval(rc.conditioned, SlSemiring{}, rc.labels);
    if (!(o == SlSemiring::kVacuous)) {
      EXPECT_NEAR(o.projected(), p, 1e-9);
      ++sl_checked;
    }
  }
  EXPECT_GT(sl_checked, 0);
}
