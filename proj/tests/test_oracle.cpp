#include <cmath>
#include <numeric>
#include <algorithm>

#include <gtest/gtest.h>

#include "rsb/oracle.hpp"
#include "rsb/solver.hpp"
#include "suites.hpp"

using namespace rsb;

namespace {

// Direct sum over all states, energies computed from scratch.
double naive_sk_log_z(const SkDisorderSample& s, double beta) {
  std::vector<double> terms;
  for (unsigned state = 0; state < (1u << s.n); ++state) {
    double e = 0.0;
    for (int i = 0; i < s.n; ++i)
      for (int j = i + 1; j < s.n; ++j) e -= s.at(i, j) * (((state >> i) & 1) ? -1 : 1) * (((state >> j) & 1) ? -1 : 1);
    terms.push_back(-beta * e);
  }
  const double mx = *std::max_element(terms.begin(), terms.end());
  double z = 0.0;
  for (double t : terms) z += std::exp(t - mx);
  return mx + std::log(z);
}

double naive_hopfield_log_z(const HopfieldDisorderSample& s, double beta) {
  std::vector<double> terms;
  for (unsigned state = 0; state < (1u << s.n); ++state) {
    auto spin = [&](int i) { return ((state >> i) & 1) ? -1.0 : 1.0; };
    double sum = 0.0, m = 0.0;
    for (int i = 0; i < s.n; ++i) m += s.retrieved_pattern[i] * spin(i);
    sum += m * m;
    for (int mu = 0; mu + 1 < s.p; ++mu) {
      double o = 0.0;
      for (int i = 0; i < s.n; ++i) o += s.noise_row(mu)[i] * spin(i);
      sum += o * o;
    }
    terms.push_back(beta / (2.0 * s.n) * sum);
  }
  const double mx = *std::max_element(terms.begin(), terms.end());
  double z = 0.0;
  for (double t : terms) z += std::exp(t - mx);
  return mx + std::log(z);
}

double curie_weiss_root(double beta) {
  double lo = 1e-6, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::tanh(beta * mid) - mid > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

HopfieldDisorderSample single_pattern(int n) {
  HopfieldDisorderSample s;
  s.n = n;
  s.p = 1;
  s.retrieved_pattern.assign(n, 1.0);
  return s;
}

}  // namespace

TEST(Disorder, SkCouplingsAreSymmetricWithZeroDiagonal) {
  const auto s = make_sk_sample(9, {1.0, 0.4, 1.0}, 3, 0);
  for (int i = 0; i < 9; ++i) {
    EXPECT_EQ(s.at(i, i), 0.0);
    for (int j = 0; j < 9; ++j) EXPECT_EQ(s.at(i, j), s.at(j, i));
  }
}

TEST(Disorder, HopfieldSampleShape) {
  const auto s = make_hopfield_sample(40, 0.1, 3, 0);
  EXPECT_EQ(s.p, 4);
  EXPECT_EQ(s.noise_patterns.size(), 3u * 40u);
  for (double x : s.retrieved_pattern) EXPECT_TRUE(x == 1.0 || x == -1.0);
  EXPECT_EQ(make_hopfield_sample(40, 0.0, 3, 0).p, 1);
  const auto b = make_hopfield_sample(40, 0.1, 3, 0, true);
  for (double x : b.noise_patterns) EXPECT_TRUE(x == 1.0 || x == -1.0);
}

TEST(Disorder, SubstreamsDoNotDependOnOrder) {
  const auto late = make_sk_sample(10, {1.0, 0.0, 1.0}, 17, 5);
  for (int i = 0; i < 5; ++i) make_sk_sample(10, {1.0, 0.0, 1.0}, 17, i);
  EXPECT_EQ(make_sk_sample(10, {1.0, 0.0, 1.0}, 17, 5).couplings, late.couplings);
  EXPECT_NE(make_sk_sample(10, {1.0, 0.0, 1.0}, 17, 4).couplings, late.couplings);
  EXPECT_NE(make_sk_sample(10, {1.0, 0.0, 1.0}, 18, 5).couplings, late.couplings);
}

TEST(SkEnumeration, SingleSpinIsLog2) {
  const Estimate e = enumerate_sk_pressure(1, {1.3, 0.7, 1.0}, 5, 1);
  EXPECT_DOUBLE_EQ(e.mean, std::log(2.0));
  EXPECT_EQ(e.standard_error, 0.0);
}

TEST(SkEnumeration, TwoSpinsWithoutNoise) {
  const double beta = 1.7, j0 = 0.9;
  const Estimate e = enumerate_sk_pressure(2, {beta, j0, 0.0}, 3, 1);
  EXPECT_NEAR(e.mean, 0.5 * std::log(4.0 * std::cosh(beta * j0 / 2.0)), 1e-14);
}

TEST(SkEnumeration, GrayCodeMatchesDirectSum) {
  for (int n : {3, 7, 10}) {
    const auto s = make_sk_sample(n, {1.0, 0.5, 1.0}, 9, n);
    EXPECT_NEAR(sk_log_z(s, 1.4), naive_sk_log_z(s, 1.4), 1e-10);
  }
}

TEST(SkEnumeration, HighTemperatureMatchesReplicaSymmetric) {
  const double beta = 0.3;
  const Estimate e = enumerate_sk_pressure(12, {beta, 0.0, 1.0}, 200, 7);
  EXPECT_LE(std::fabs(e.mean - (std::log(2.0) + beta * beta / 4.0)), 3 * e.standard_error + 0.02);
}

TEST(SkEnumeration, DeterministicGivenSeed) {
  const Estimate a = enumerate_sk_pressure(10, {1.2, 0.3, 1.0}, 8, 11);
  const Estimate b = enumerate_sk_pressure(10, {1.2, 0.3, 1.0}, 8, 11);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.standard_error, b.standard_error);
}

TEST(SkEnumeration, GaugeInvariance) {
  const auto s = make_sk_sample(11, {1.5, 0.0, 1.0}, 4, 0);
  auto gauged = s;
  std::vector<int> g(11);
  for (int i = 0; i < 11; ++i) g[i] = (i * 7 + 3) % 5 < 2 ? -1 : 1;
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) gauged.couplings[static_cast<std::size_t>(i) * 11 + j] *= g[i] * g[j];
  EXPECT_NEAR(sk_log_z(gauged, 1.5), sk_log_z(s, 1.5), 1e-11);
}

TEST(SkEnumeration, Budget) {
  EXPECT_THROW(enumerate_sk_pressure(21, {1.0, 0.0, 1.0}, 1, 1), BudgetExceeded);
  EXPECT_THROW(enumerate_sk_pressure(4, {1.0, 0.0, 1.0}, 0, 1), RangeViolation);
}

TEST(HopfieldEnumeration, SingleSpin) {
  for (double beta : {0.0, 0.7, 2.0}) {
    const Estimate e = enumerate_hopfield_pressure(1, {beta, 0.5}, 3, 1);
    EXPECT_NEAR(e.mean, std::log(2.0) + beta / 2.0, 1e-14);
  }
}

TEST(HopfieldEnumeration, InfiniteTemperatureIsLog2) {
  const Estimate e = enumerate_hopfield_pressure(10, {0.0, 0.2}, 4, 1);
  EXPECT_NEAR(e.mean, std::log(2.0), 1e-15);
}

TEST(HopfieldEnumeration, GrayCodeMatchesDirectSum) {
  for (int n : {4, 9}) {
    const auto s = make_hopfield_sample(n, 0.3, 5, n);
    EXPECT_NEAR(hopfield_log_z(s, 1.1), naive_hopfield_log_z(s, 1.1), 1e-10);
  }
}

TEST(HopfieldEnumeration, MatchesReplicaSymmetricPressure) {
  const int n = 14;
  const HopfieldParams p{0.5, 0.07};
  ASSERT_EQ(hopfield_pattern_count(n, p.alpha), 1);
  ModelSpec ms;
  ms.model = Model::hopfield;
  ms.hop = p;
  double best = -INFINITY;
  for (const auto& b : solve_branches(ms, 0, {}, SolverOptions{}, QuadratureSpec{}))
    if (b.report && b.report->converged) best = std::max(best, b.report->pressure);
  ASSERT_TRUE(std::isfinite(best));
  const Estimate e = enumerate_hopfield_pressure(n, p, 20, 7);
  EXPECT_LE(std::fabs(e.mean - best), 3 * e.standard_error + 0.03);
}

TEST(HopfieldEnumeration, MattisGaugeInvariance) {
  const auto s = make_hopfield_sample(12, 0.25, 6, 0);
  auto gauged = s;
  for (int i = 0; i < s.n; ++i) {
    gauged.retrieved_pattern[i] = 1.0;
    for (int mu = 0; mu + 1 < s.p; ++mu)
      gauged.noise_patterns[static_cast<std::size_t>(mu) * s.n + i] *= s.retrieved_pattern[i];
  }
  EXPECT_NEAR(hopfield_log_z(gauged, 1.3), hopfield_log_z(s, 1.3), 1e-11);
}

TEST(HopfieldEnumeration, Budget) {
  EXPECT_THROW(enumerate_hopfield_pressure(19, {1.0, 0.1}, 1, 1), BudgetExceeded);
}

TEST(Metropolis, InfiniteTemperatureHasNoMagnetization) {
  const auto s = make_sk_sample(200, {0.0, 0.0, 1.0}, 2, 0);
  const MetropolisResult r = metropolis_run(s, 0.0, 2000, InitPolicy::random, 2);
  EXPECT_LE(std::fabs(r.overlap_mean), 3 * r.overlap_se);
}

TEST(Metropolis, CurieWeissSurrogate) {
  const MetropolisResult r = metropolis_run(single_pattern(500), 2.0, 2000, InitPolicy::aligned, 3);
  EXPECT_NEAR(r.overlap_mean, curie_weiss_root(2.0), 0.02);
  EXPECT_NEAR(curie_weiss_root(2.0), 0.9575, 1e-4);
}

TEST(Metropolis, TwoSpinDetailedBalance) {
  SkDisorderSample s;
  s.n = 2;
  const double j = 0.8, beta = 1.1;
  s.couplings = {0.0, j, j, 0.0};
  const MetropolisResult r = metropolis_run(s, beta, 100000, InitPolicy::random, 4);
  // Per-spin energy -(J/2) <s1 s2> with <s1 s2> = tanh(beta J).
  EXPECT_LE(std::fabs(r.energy_mean + 0.5 * j * std::tanh(beta * j)), 3 * r.energy_se);
  EXPECT_LE(std::fabs(r.overlap_mean), 3 * r.overlap_se + 1e-12);
}

TEST(Metropolis, RetrievalMatchesReplicaSymmetric) {
  ModelSpec ms;
  ms.model = Model::hopfield;
  ms.hop = {2.0, 0.05};
  const SolveReport rs = solve(ms, make_rs(1.0, 1.0, 0.0), SolverOptions{}, QuadratureSpec{});
  ASSERT_TRUE(rs.converged);
  const auto s = make_hopfield_sample(2000, 0.05, 5, 0);
  const MetropolisResult r = metropolis_run(s, 2.0, 2000, InitPolicy::aligned, 5);
  EXPECT_LE(std::fabs(r.overlap_mean - rs.ansatz.m) + 3 * r.overlap_se, 0.05);
}

TEST(Metropolis, Validation) {
  const auto s = make_sk_sample(10, {1.0, 0.0, 1.0}, 1, 0);
  EXPECT_THROW(metropolis_run(s, 1.0, 50, InitPolicy::random, 1), RangeViolation);
  EXPECT_THROW(overlap_histogram(s, 1.0, 99, 10, 1), RangeViolation);
  EXPECT_THROW(overlap_histogram(s, 1.0, 200, 0, 1), RangeViolation);
}

TEST(Histogram, BinsCoverTheIntervalAndCountsAddUp) {
  const auto s = make_sk_sample(50, {1.0, 0.0, 1.0}, 8, 0);
  const auto h = overlap_histogram(s, 1.0, 400, 21, 8);
  ASSERT_EQ(h.bin_edges.size(), 22u);
  EXPECT_EQ(h.bin_edges.front(), -1.0);
  EXPECT_EQ(h.bin_edges.back(), 1.0);
  for (std::size_t b = 1; b < h.bin_edges.size(); ++b) EXPECT_GT(h.bin_edges[b], h.bin_edges[b - 1]);
  EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), 0LL), h.total);
  EXPECT_EQ(h.total, 200);
}

TEST(Histogram, CsvLayout) {
  OverlapHistogram h = make_histogram(2);
  h.add(-0.5);
  h.add(0.5);
  h.add(1.0);
  EXPECT_EQ(histogram_csv(h), "bin_lo,bin_hi,count\n-1,0,1\n0,1,2\n");
}

TEST(Histogram, SymmetrizedWidth) {
  OverlapHistogram h = make_histogram(4);
  h.add(0.6);
  h.add(0.6);
  // Midpoint 0.75 in both samples: one-sided std is zero, symmetrized is 0.75.
  EXPECT_NEAR(histogram_moments(h).stddev, 0.0, 1e-15);
  EXPECT_NEAR(symmetrized_stddev(h), 0.75, 1e-15);
}

TEST(Histogram, SuiteChecksPass) {
  const auto checks = suites::histogram(2000, 41, 0);
  for (const auto& c : checks) EXPECT_TRUE(c.pass) << c.name << " measured " << c.measured;
}
