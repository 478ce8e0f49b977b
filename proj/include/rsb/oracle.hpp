#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "rsb/errors.hpp"
#include "rsb/rng.hpp"
#include "rsb/types.hpp"

namespace rsb {

constexpr int kMaxEnumerateSk = 20;
constexpr int kMaxEnumerateHopfield = 18;

// Symmetric couplings J_ij = J0/N + J z_ij / sqrt(N), zero diagonal, stored
// row-major. H = -sum_{i<j} J_ij s_i s_j.
struct SkDisorderSample {
  int n = 0;
  std::vector<double> couplings;
  std::uint64_t seed = 0;

  double at(int i, int j) const { return couplings[static_cast<std::size_t>(i) * n + j]; }
};

// Retrieved pattern plus p - 1 noise patterns; H = -(1/2N) sum_mu (xi^mu . s)^2
// over all p patterns.
struct HopfieldDisorderSample {
  int n = 0;
  int p = 1;
  std::vector<double> retrieved_pattern;  // entries +-1
  std::vector<double> noise_patterns;     // (p - 1) x n, row-major
  std::uint64_t seed = 0;

  const double* noise_row(int mu) const { return noise_patterns.data() + static_cast<std::size_t>(mu) * n; }
};

struct Estimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

inline int hopfield_pattern_count(int n, double alpha) {
  return std::max(1, static_cast<int>(std::ceil(alpha * n - 1e-9)));
}

inline SkDisorderSample make_sk_sample(int n, const SkParams& p, std::uint64_t seed, std::uint64_t index) {
  if (n < 1) throw RangeViolation("n must be positive");
  p.validate();
  auto eng = substream(seed, kStreamSkDisorder, index);
  std::normal_distribution<double> normal;
  SkDisorderSample s;
  s.n = n;
  s.seed = seed;
  s.couplings.assign(static_cast<std::size_t>(n) * n, 0.0);
  const double inv_n = 1.0 / n, inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = p.j0 * inv_n + p.j * normal(eng) * inv_sqrt_n;
      s.couplings[static_cast<std::size_t>(i) * n + j] = v;
      s.couplings[static_cast<std::size_t>(j) * n + i] = v;
    }
  return s;
}

inline HopfieldDisorderSample make_hopfield_sample(int n, double alpha, std::uint64_t seed,
                                                   std::uint64_t index, bool boolean_noise = false) {
  if (n < 1) throw RangeViolation("n must be positive");
  if (!std::isfinite(alpha) || alpha < 0.0) throw RangeViolation("alpha must be non-negative");
  auto eng = substream(seed, kStreamHopfieldDisorder, index);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution coin(0.5);
  HopfieldDisorderSample s;
  s.n = n;
  s.p = hopfield_pattern_count(n, alpha);
  s.seed = seed;
  s.retrieved_pattern.resize(n);
  for (double& x : s.retrieved_pattern) x = coin(eng) ? 1.0 : -1.0;
  s.noise_patterns.resize(static_cast<std::size_t>(s.p - 1) * n);
  for (double& x : s.noise_patterns) x = boolean_noise ? (coin(eng) ? 1.0 : -1.0) : normal(eng);
  return s;
}

namespace detail {

// Streaming log-sum-exp.
struct LogSum {
  double max = -INFINITY;
  double sum = 0.0;
  void add(double x) {
    if (x > max) {
      sum = sum * std::exp(max - x) + 1.0;
      max = x;
    } else {
      sum += std::exp(x - max);
    }
  }
  double value() const { return max + std::log(sum); }
};

inline Estimate mean_and_se(const std::vector<double>& v) {
  Estimate e;
  const double n = static_cast<double>(v.size());
  for (double x : v) e.mean += x;
  e.mean /= n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - e.mean) * (x - e.mean);
    e.standard_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return e;
}

}  // namespace detail

// log Z by Gray-code enumeration with incremental local fields.
inline double sk_log_z(const SkDisorderSample& s, double beta) {
  const int n = s.n;
  if (n > kMaxEnumerateSk) throw BudgetExceeded("SK enumeration limited to n <= 20");
  std::vector<int> sigma(n, 1);
  std::vector<double> field(n, 0.0);
  double energy = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      field[i] += s.at(i, j);
      if (j > i) energy -= s.at(i, j);
    }
  detail::LogSum acc;
  acc.add(-beta * energy);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t g = 1; g < total; ++g) {
    const int k = std::countr_zero(g);
    energy += 2.0 * sigma[k] * field[k];
    sigma[k] = -sigma[k];
    const double* row = s.couplings.data() + static_cast<std::size_t>(k) * n;
    const double d = 2.0 * sigma[k];
    for (int j = 0; j < n; ++j) field[j] += d * row[j];
    acc.add(-beta * energy);
  }
  return acc.value();
}

inline double hopfield_log_z(const HopfieldDisorderSample& s, double beta) {
  const int n = s.n;
  if (n > kMaxEnumerateHopfield) throw BudgetExceeded("Hopfield enumeration limited to n <= 18");
  const int pc = s.p;
  // Column-major pattern table: pattern mu at entry k is pat[k * pc + mu].
  std::vector<double> pat(static_cast<std::size_t>(n) * pc);
  for (int k = 0; k < n; ++k) {
    pat[static_cast<std::size_t>(k) * pc] = s.retrieved_pattern[k];
    for (int mu = 1; mu < pc; ++mu) pat[static_cast<std::size_t>(k) * pc + mu] = s.noise_row(mu - 1)[k];
  }
  std::vector<int> sigma(n, 1);
  std::vector<double> overlap(pc, 0.0);
  for (int k = 0; k < n; ++k)
    for (int mu = 0; mu < pc; ++mu) overlap[mu] += pat[static_cast<std::size_t>(k) * pc + mu];
  const double scale = beta / (2.0 * n);
  auto log_weight = [&] {
    double e = 0.0;
    for (double o : overlap) e += o * o;
    return scale * e;
  };
  detail::LogSum acc;
  acc.add(log_weight());
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t g = 1; g < total; ++g) {
    const int k = std::countr_zero(g);
    sigma[k] = -sigma[k];
    const double d = 2.0 * sigma[k];
    const double* col = pat.data() + static_cast<std::size_t>(k) * pc;
    for (int mu = 0; mu < pc; ++mu) overlap[mu] += d * col[mu];
    acc.add(log_weight());
  }
  return acc.value();
}

// Quenched pressure (1/N) E log Z over disorder samples 0..samples-1.
inline Estimate enumerate_sk_pressure(int n, const SkParams& p, int samples, std::uint64_t seed) {
  if (n > kMaxEnumerateSk) throw BudgetExceeded("SK enumeration limited to n <= 20");
  if (samples < 1) throw RangeViolation("samples must be positive");
  std::vector<double> a(samples);
  for (int s = 0; s < samples; ++s) a[s] = sk_log_z(make_sk_sample(n, p, seed, s), p.beta) / n;
  return detail::mean_and_se(a);
}

inline Estimate enumerate_hopfield_pressure(int n, const HopfieldParams& p, int samples,
                                            std::uint64_t seed) {
  if (n > kMaxEnumerateHopfield) throw BudgetExceeded("Hopfield enumeration limited to n <= 18");
  if (samples < 1) throw RangeViolation("samples must be positive");
  p.validate();
  std::vector<double> a(samples);
  for (int s = 0; s < samples; ++s)
    a[s] = hopfield_log_z(make_hopfield_sample(n, p.alpha, seed, s), p.beta) / n;
  return detail::mean_and_se(a);
}

enum class InitPolicy { random, aligned };

struct MetropolisResult {
  double overlap_mean = 0.0;
  double overlap_se = 0.0;
  double energy_mean = 0.0;  // per spin
  double energy_se = 0.0;
};

namespace detail {

constexpr int kBatches = 20;

inline Estimate batch_means(const std::vector<double>& v) {
  const std::size_t batches = std::min<std::size_t>(kBatches, v.size());
  const std::size_t len = v.size() / batches;
  std::vector<double> means(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t i = 0; i < len; ++i) means[b] += v[b * len + i];
    means[b] /= static_cast<double>(len);
  }
  return mean_and_se(means);
}

// Single-spin-flip Metropolis chain; the model supplies the energy change of
// flipping spin k, the flip itself, and the per-sweep observables.
template <class Model>
MetropolisResult run_chain(Model& model, double beta, int sweeps, std::mt19937_64& eng) {
  if (sweeps < 100) throw RangeViolation("sweeps must be at least 100");
  const int n = model.size();
  std::uniform_int_distribution<int> site(0, n - 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> overlaps, energies;
  const int burn = sweeps / 2;
  for (int sw = 0; sw < sweeps; ++sw) {
    for (int t = 0; t < n; ++t) {
      const int k = site(eng);
      const double de = model.delta_energy(k);
      if (de <= 0.0 || unif(eng) < std::exp(-beta * de)) model.flip(k);
    }
    if (sw >= burn) {
      overlaps.push_back(model.overlap());
      energies.push_back(model.energy() / n);
    }
  }
  const Estimate o = batch_means(overlaps), e = batch_means(energies);
  return {o.mean, o.standard_error, e.mean, e.standard_error};
}

struct SkChain {
  const SkDisorderSample& s;
  std::vector<int> sigma;
  std::vector<double> field;

  SkChain(const SkDisorderSample& sample, std::vector<int> init) : s(sample), sigma(std::move(init)) {
    field.assign(s.n, 0.0);
    for (int i = 0; i < s.n; ++i)
      for (int j = 0; j < s.n; ++j) field[i] += s.at(i, j) * sigma[j];
  }
  int size() const { return s.n; }
  double delta_energy(int k) const { return 2.0 * sigma[k] * field[k]; }
  void flip(int k) {
    sigma[k] = -sigma[k];
    const double d = 2.0 * sigma[k];
    const double* row = s.couplings.data() + static_cast<std::size_t>(k) * s.n;
    for (int j = 0; j < s.n; ++j) field[j] += d * row[j];
  }
  double overlap() const {
    double m = 0.0;
    for (int x : sigma) m += x;
    return m / s.n;
  }
  double energy() const {
    double e = 0.0;
    for (int i = 0; i < s.n; ++i) e -= 0.5 * sigma[i] * field[i];
    return e;
  }
};

struct HopfieldChain {
  const HopfieldDisorderSample& s;
  int pc;
  std::vector<double> pat;  // column-major, pat[k * pc + mu]
  std::vector<int> sigma;
  std::vector<double> overlaps;

  HopfieldChain(const HopfieldDisorderSample& sample, std::vector<int> init)
      : s(sample), pc(sample.p), sigma(std::move(init)) {
    pat.resize(static_cast<std::size_t>(s.n) * pc);
    for (int k = 0; k < s.n; ++k) {
      pat[static_cast<std::size_t>(k) * pc] = s.retrieved_pattern[k];
      for (int mu = 1; mu < pc; ++mu) pat[static_cast<std::size_t>(k) * pc + mu] = s.noise_row(mu - 1)[k];
    }
    overlaps.assign(pc, 0.0);
    for (int k = 0; k < s.n; ++k)
      for (int mu = 0; mu < pc; ++mu) overlaps[mu] += pat[static_cast<std::size_t>(k) * pc + mu] * sigma[k];
  }
  int size() const { return s.n; }
  // H = -(1/2N) sum_mu M_mu^2 with M_mu -> M_mu - 2 xi_k s_k under the flip.
  double delta_energy(int k) const {
    const double* col = pat.data() + static_cast<std::size_t>(k) * pc;
    double acc = 0.0;
    for (int mu = 0; mu < pc; ++mu) acc += col[mu] * (sigma[k] * overlaps[mu] - col[mu]);
    return 2.0 * acc / s.n;
  }
  void flip(int k) {
    sigma[k] = -sigma[k];
    const double d = 2.0 * sigma[k];
    const double* col = pat.data() + static_cast<std::size_t>(k) * pc;
    for (int mu = 0; mu < pc; ++mu) overlaps[mu] += d * col[mu];
  }
  double overlap() const { return overlaps[0] / s.n; }
  double energy() const {
    double e = 0.0;
    for (double o : overlaps) e += o * o;
    return -e / (2.0 * s.n);
  }
};

inline std::vector<int> initial_spins(int n, InitPolicy init, const std::vector<double>* pattern,
                                      std::mt19937_64& eng) {
  std::vector<int> sigma(n, 1);
  if (init == InitPolicy::aligned) {
    if (pattern)
      for (int i = 0; i < n; ++i) sigma[i] = (*pattern)[i] > 0 ? 1 : -1;
  } else {
    std::bernoulli_distribution coin(0.5);
    for (int& x : sigma) x = coin(eng) ? 1 : -1;
  }
  return sigma;
}

}  // namespace detail

// Mattis overlap (Hopfield) or magnetization (SK), both with batch-means errors.
inline MetropolisResult metropolis_run(const SkDisorderSample& sample, double beta, int sweeps,
                                       InitPolicy init, std::uint64_t seed) {
  auto eng = substream(seed, kStreamMetropolis, 0);
  detail::SkChain chain(sample, detail::initial_spins(sample.n, init, nullptr, eng));
  return detail::run_chain(chain, beta, sweeps, eng);
}

inline MetropolisResult metropolis_run(const HopfieldDisorderSample& sample, double beta, int sweeps,
                                       InitPolicy init, std::uint64_t seed) {
  auto eng = substream(seed, kStreamMetropolis, 0);
  detail::HopfieldChain chain(sample, detail::initial_spins(sample.n, init, &sample.retrieved_pattern, eng));
  return detail::run_chain(chain, beta, sweeps, eng);
}

struct OverlapHistogram {
  std::vector<double> bin_edges;
  std::vector<long long> counts;
  long long total = 0;

  void add(double q) {
    const int bins = static_cast<int>(counts.size());
    int b = static_cast<int>(std::floor((q + 1.0) * 0.5 * bins));
    b = std::clamp(b, 0, bins - 1);
    ++counts[b];
    ++total;
  }
};

inline OverlapHistogram make_histogram(int bins) {
  if (bins < 1) throw RangeViolation("bins must be positive");
  OverlapHistogram h;
  h.bin_edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) h.bin_edges[b] = -1.0 + 2.0 * b / bins;
  h.counts.assign(bins, 0);
  return h;
}

namespace detail {

template <class Chain>
OverlapHistogram replica_overlaps(Chain& a, Chain& b, double beta, int sweeps, int bins,
                                  std::mt19937_64& ea, std::mt19937_64& eb) {
  if (sweeps < 100) throw RangeViolation("sweeps must be at least 100");
  OverlapHistogram h = make_histogram(bins);
  const int n = a.size();
  std::uniform_int_distribution<int> site(0, n - 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto sweep = [&](Chain& c, std::mt19937_64& eng) {
    for (int t = 0; t < n; ++t) {
      const int k = site(eng);
      const double de = c.delta_energy(k);
      if (de <= 0.0 || unif(eng) < std::exp(-beta * de)) c.flip(k);
    }
  };
  for (int sw = 0; sw < sweeps; ++sw) {
    sweep(a, ea);
    sweep(b, eb);
    if (sw >= sweeps / 2) {
      long long dot = 0;
      for (int i = 0; i < n; ++i) dot += a.sigma[i] * b.sigma[i];
      h.add(static_cast<double>(dot) / n);
    }
  }
  return h;
}

}  // namespace detail

// Two independent chains on the same disorder; q12 recorded every sweep
// after burn-in.
inline OverlapHistogram overlap_histogram(const SkDisorderSample& sample, double beta, int sweeps,
                                          int bins, std::uint64_t seed,
                                          InitPolicy init = InitPolicy::random) {
  auto ea = substream(seed, kStreamMetropolis, 1);
  auto eb = substream(seed, kStreamMetropolis, 2);
  detail::SkChain a(sample, detail::initial_spins(sample.n, init, nullptr, ea));
  detail::SkChain b(sample, detail::initial_spins(sample.n, init, nullptr, eb));
  return detail::replica_overlaps(a, b, beta, sweeps, bins, ea, eb);
}

inline OverlapHistogram overlap_histogram(const HopfieldDisorderSample& sample, double beta, int sweeps,
                                          int bins, std::uint64_t seed,
                                          InitPolicy init = InitPolicy::random) {
  auto ea = substream(seed, kStreamMetropolis, 1);
  auto eb = substream(seed, kStreamMetropolis, 2);
  detail::HopfieldChain a(sample, detail::initial_spins(sample.n, init, &sample.retrieved_pattern, ea));
  detail::HopfieldChain b(sample, detail::initial_spins(sample.n, init, &sample.retrieved_pattern, eb));
  return detail::replica_overlaps(a, b, beta, sweeps, bins, ea, eb);
}

struct HistogramMoments {
  double mean = 0.0;
  double stddev = 0.0;
};

// Mean and standard deviation of q12 from bin midpoints.
inline HistogramMoments histogram_moments(const OverlapHistogram& h) {
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    const double mid = 0.5 * (h.bin_edges[b] + h.bin_edges[b + 1]);
    s1 += mid * h.counts[b];
    s2 += mid * mid * h.counts[b];
  }
  const double n = static_cast<double>(h.total);
  const double mean = s1 / n;
  return {mean, std::sqrt(std::max(0.0, s2 / n - mean * mean))};
}

// Standard deviation of the histogram symmetrized under q -> -q, i.e.
// sqrt(E q^2). Without a field the measure is invariant under a global spin
// flip, which single-spin-flip chains at low temperature rarely perform.
inline double symmetrized_stddev(const OverlapHistogram& h) {
  double s2 = 0.0;
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    const double mid = 0.5 * (h.bin_edges[b] + h.bin_edges[b + 1]);
    s2 += mid * mid * h.counts[b];
  }
  return std::sqrt(s2 / static_cast<double>(h.total));
}

inline std::string histogram_csv(const OverlapHistogram& h) {
  std::string out = "bin_lo,bin_hi,count\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b)
    out += fmt::format("{:.17g},{:.17g},{}\n", h.bin_edges[b], h.bin_edges[b + 1], h.counts[b]);
  return out;
}

}  // namespace rsb
