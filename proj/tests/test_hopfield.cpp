#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "random_ansatz.hpp"
#include "reference_forms.hpp"
#include "rsb/hopfield.hpp"
#include "rsb/solver.hpp"
#include "suites.hpp"

using namespace rsb;

namespace {

const QuadratureSpec kSpec;

double log_cosh(double x) { return std::fabs(x) + std::log1p(std::exp(-2.0 * std::fabs(x))) - std::log(2.0); }

ModelSpec hopfield(double beta, double alpha) {
  ModelSpec ms;
  ms.model = Model::hopfield;
  ms.hop = {beta, alpha};
  return ms;
}

// Root of m = tanh(beta m) on (0, 1] by bisection.
double curie_weiss_root(double beta) {
  double lo = 1e-6, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::tanh(beta * mid) - mid > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(HopDenominators, Examples) {
  EXPECT_EQ(hop_q_denominators({3.0, 0.1}, make_rs(0.0, 1.0)).values, std::vector<double>{1.0});
  EXPECT_THROW(hop_q_denominators({1.0, 0.1}, make_rs(0.0, 0.0)), SusceptibilityDivergence);
  const auto q = hop_q_denominators({2.0, 0.1}, RsbAnsatz{1, 0.0, {0.5, 0.8}, {}, {0.5}}).values;
  ASSERT_EQ(q.size(), 2u);
  EXPECT_NEAR(q[1], 0.6, 1e-15);
  EXPECT_NEAR(q[0], 0.3, 1e-15);
}

TEST(HopClosedForm, ZeroOverlapsGiveZero) {
  for (double p : hop_p_closed_form({0.7, 0.2}, RsbAnsatz{2, 0.0, {0.0, 0.0, 0.0}, {}, {0.3, 0.6}})) EXPECT_EQ(p, 0.0);
}

TEST(HopClosedForm, EqualOverlapsGiveReplicaSymmetricValue) {
  const double beta = 1.4, q = 0.55;
  const double rs = beta * q / std::pow(1.0 - beta * (1.0 - q), 2);
  const auto ps = hop_p_closed_form({beta, 0.1}, RsbAnsatz{1, 0.0, {q, q}, {}, {0.4}});
  EXPECT_NEAR(ps[0], rs, 1e-14);
  EXPECT_NEAR(ps[1], rs, 1e-14);
}

TEST(HopClosedForm, TwoStepMatchesDirectTranscription) {
  const double b = 1.2, q1 = 0.1, q2 = 0.4, q3 = 0.7, t1 = 0.3, t2 = 0.6;
  const double top = 1.0 - b * (1.0 - q3);
  const double mid = 1.0 - b * ((1.0 - q3) + t2 * (q3 - q2));
  const double low = 1.0 - b * ((1.0 - q3) + t1 * (q2 - q1) + t2 * (q3 - q2));
  const double p1 = b * q1 / (low * low);
  const double p2 = p1 + b * (q2 - q1) / (mid * low);
  const double p3 = p2 + b * (q3 - q2) / (top * mid);
  const auto ps = hop_p_closed_form({b, 0.1}, RsbAnsatz{2, 0.0, {q1, q2, q3}, {}, {t1, t2}});
  EXPECT_NEAR(ps[0], p1, 1e-12);
  EXPECT_NEAR(ps[1], p2, 1e-12);
  EXPECT_NEAR(ps[2], p3, 1e-12);
}

TEST(HopClosedForm, MonotoneForMonotoneOverlaps) {
  std::mt19937_64 eng(41);
  for (int i = 0; i < 50; ++i) {
    const RsbAnsatz a = fixtures::random_hopfield_ansatz(eng, {1.5, 0.1}, 1 + i % 3);
    for (std::size_t j = 1; j < a.ps.size(); ++j) EXPECT_GE(a.ps[j], a.ps[j - 1]);
  }
}

TEST(HopPressure, NoPatternsNoMagnetizationIsLog2) {
  EXPECT_NEAR(hop_pressure_rs({1.7, 0.0}, 0.0, 0.4, 0.0, kSpec), std::log(2.0), 1e-15);
  EXPECT_NEAR(hop_pressure_krsb({1.7, 0.0}, RsbAnsatz{1, 0.0, {0.2, 0.5}, {0.0, 0.0}, {0.4}}, kSpec),
              std::log(2.0), 1e-15);
}

TEST(HopPressure, CurieWeissIdentity) {
  for (double beta : {0.5, 1.0, 2.0, 3.5})
    for (double m : {-0.8, 0.1, 0.6, 0.97})
      EXPECT_NEAR(hop_pressure_rs({beta, 0.0}, m, 0.5, 0.0, kSpec),
                  std::log(2.0) + log_cosh(beta * m) - 0.5 * beta * m * m, 1e-12);
}

TEST(HopPressure, RetrievalPointStableUnderNodeDoubling) {
  const ModelSpec ms = hopfield(2.0, 0.05);
  const SolveReport r = solve(ms, default_inits(0, {}, Model::hopfield).front(), SolverOptions{}, kSpec);
  ASSERT_TRUE(r.converged);
  const auto& a = r.ansatz;
  const QuadratureSpec fine{2 * kSpec.nodes_per_level};
  EXPECT_NEAR(hop_pressure_rs(ms.hop, a.m, a.qs[0], a.ps[0], kSpec),
              hop_pressure_rs(ms.hop, a.m, a.qs[0], a.ps[0], fine), 1e-9);
}

TEST(HopMap, ZeroOverlap) {
  const HopfieldParams p{0.8, 0.2};
  const auto [m1, q1, p1] = hop_sce_rs(p, 0.6, 0.0, kSpec);
  EXPECT_EQ(p1, 0.0);
  EXPECT_NEAR(m1, std::tanh(0.8 * 0.6), 1e-15);
  EXPECT_NEAR(q1, std::pow(std::tanh(0.8 * 0.6), 2), 1e-15);
}

TEST(HopMap, InfiniteTemperature) {
  const auto [m1, q1, p1] = hop_sce_rs({0.0, 0.2}, 0.6, 0.4, kSpec);
  EXPECT_EQ(m1, 0.0);
  EXPECT_EQ(q1, 0.0);
  EXPECT_EQ(p1, 0.0);
}

TEST(HopMap, RetrievalFromPattern) {
  const SolveReport r = solve(hopfield(2.0, 0.05), make_rs(1.0, 1.0, 0.0), SolverOptions{}, kSpec);
  ASSERT_TRUE(r.converged);
  EXPECT_GT(r.ansatz.m, 0.9);
}

TEST(HopMap, EqualOverlapsReproduceReplicaSymmetricMap) {
  const HopfieldParams p{1.6, 0.07};
  const auto [m1, q1, p1] = hop_sce_rs(p, 0.5, 0.6, kSpec);
  for (int k = 1; k <= 2; ++k) {
    RsbAnsatz a{k, 0.5, std::vector<double>(k + 1, 0.6), {}, suites::even_thetas(k)};
    a.ps = hop_p_closed_form(p, a);
    const RsbAnsatz out = hop_sce_moments(p, a, kSpec);
    EXPECT_NEAR(out.m, m1, 1e-10);
    for (double v : out.qs) EXPECT_NEAR(v, q1, 1e-10);
    for (double v : a.ps) EXPECT_NEAR(v, p1, 1e-12);
  }
}

TEST(HopMap, InfiniteTemperatureKrsbIsZero) {
  RsbAnsatz a{1, 0.3, {0.2, 0.6}, {}, {0.5}};
  a.ps = hop_p_closed_form({0.0, 0.1}, a);
  const RsbAnsatz out = hop_sce_krsb({0.0, 0.1}, a, kSpec);
  EXPECT_EQ(out.m, 0.0);
  for (double q : out.qs) EXPECT_EQ(q, 0.0);
}

TEST(HopKrsb, ReplicaSymmetricIsTheZeroStepCase) {
  const HopfieldParams p{1.8, 0.06};
  const double pp = hop_p_closed_form(p, make_rs(0.4, 0.7))[0];
  EXPECT_EQ(hop_pressure_krsb(p, make_rs(0.4, 0.7, pp), kSpec), hop_pressure_rs(p, 0.4, 0.7, pp, kSpec));
}

TEST(HopKrsb, EqualOverlapsMatchReplicaSymmetric) {
  const HopfieldParams p{1.8, 0.06};
  const double q = 0.7, pp = hop_p_closed_form(p, make_rs(0.4, q))[0];
  for (double theta : {0.05, 0.4, 0.9})
    EXPECT_NEAR(hop_pressure_krsb(p, RsbAnsatz{1, 0.4, {q, q}, {pp, pp}, {theta}}, kSpec),
                hop_pressure_rs(p, 0.4, q, pp, kSpec), 1e-10);
}

TEST(HopKrsb, OneStepMatchesClosedForm) {
  const HopfieldParams p{2.0, 0.1};
  // theta = 0.5 puts this point exactly on Q_1 = 0.
  EXPECT_THROW(hop_p_closed_form(p, RsbAnsatz{1, 0.4, {0.3, 0.7}, {}, {0.5}}), SusceptibilityDivergence);
  RsbAnsatz a{1, 0.4, {0.3, 0.7}, {}, {0.25}};
  a.ps = hop_p_closed_form(p, a);
  EXPECT_NEAR(hop_pressure_krsb(p, a, kSpec),
              reference::hop_1rsb(2.0, 0.1, 0.4, 0.3, 0.7, a.ps[0], a.ps[1], 0.25), 1e-9);
}

TEST(HopKrsb, MatchesClosedFormsAtRandomPoints) {
  std::mt19937_64 eng(42);
  std::uniform_real_distribution<double> ub(0.3, 2.5), ua(0.0, 0.15);
  for (int i = 0; i < 8; ++i) {
    const HopfieldParams p{ub(eng), ua(eng)};
    const RsbAnsatz a = fixtures::random_hopfield_ansatz(eng, p, 1 + i % 2);
    const double expect =
        a.k == 1 ? reference::hop_1rsb(p.beta, p.alpha, a.m, a.qs[0], a.qs[1], a.ps[0], a.ps[1], a.thetas[0])
                 : reference::hop_2rsb(p.beta, p.alpha, a.m, a.qs[0], a.qs[1], a.qs[2], a.ps[0], a.ps[1], a.ps[2],
                                       a.thetas[0], a.thetas[1]);
    EXPECT_NEAR(hop_pressure_krsb(p, a, kSpec), expect, 1e-9);
  }
}

TEST(HopKrsb, OneStepFixedPointIsStationary) {
  const SolveReport r =
      solve(hopfield(3.0, 0.08), RsbAnsatz{1, 0.999, {0.9, 0.99}, {0.0, 0.0}, {0.5}}, SolverOptions{}, kSpec);
  ASSERT_TRUE(r.converged);
  ASSERT_EQ(r.stationarity.size(), 3u);
  for (double g : r.stationarity) EXPECT_LE(std::fabs(g), 1e-5);
}

TEST(HopCurieWeiss, RetrievalMagnetizationIsTheMeanFieldRoot) {
  const SolveReport r = solve(hopfield(2.0, 0.0), make_rs(0.999, 0.99, 0.0), SolverOptions{}, kSpec);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.ansatz.m, curie_weiss_root(2.0), 1e-8);
  EXPECT_NEAR(curie_weiss_root(2.0), 0.9575, 1e-4);
}

TEST(HopCurieWeiss, OnsetAtUnitInverseTemperature) {
  EXPECT_FALSE(suites::curie_weiss_retrieves(0.5, kSpec));
  EXPECT_TRUE(suites::curie_weiss_retrieves(1.5, kSpec));
  EXPECT_NEAR(suites::curie_weiss_onset(0.5, 1.5, 0.005, kSpec), 1.0, 0.01);
}

TEST(HopDomain, NonPositiveDenominatorsAlwaysThrow) {
  std::mt19937_64 eng(43);
  std::uniform_real_distribution<double> ub(1.0, 6.0);
  int tried = 0;
  while (tried < 100) {
    const HopfieldParams p{ub(eng), 0.05};
    RsbAnsatz a = fixtures::random_sk_ansatz(eng, eng() % 3);
    bool outside = false;
    double Q = 1.0 - p.beta * (1.0 - a.qs.back());
    outside = Q <= 0.0;
    for (int i = a.k - 1; i >= 0; --i) {
      Q -= p.beta * a.thetas[i] * (a.qs[i + 1] - a.qs[i]);
      outside = outside || Q <= 0.0;
    }
    if (!outside) continue;
    ++tried;
    a.ps = fixtures::sorted_uniform(eng, a.k + 1, 0.0, 3.0);
    EXPECT_THROW(hop_q_denominators(p, a), SusceptibilityDivergence);
    EXPECT_THROW(hop_p_closed_form(p, a), SusceptibilityDivergence);
    EXPECT_THROW(hop_pressure_krsb(p, a, kSpec), SusceptibilityDivergence);
    EXPECT_THROW(hop_sce_krsb(p, a, kSpec), SusceptibilityDivergence);
  }
}
