#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "rsb/errors.hpp"
#include "rsb/oracle.hpp"
#include "rsb/rng.hpp"
#include "rsb/types.hpp"

namespace rsb {

// Interpolating pressure at finite N.
//
// SK:       log B = b [ sqrt(t) J / sqrt(N) sum_{i<j} z_ij s_i s_j + sum_a sqrt(x_a) h^a.s
//                       + t J0/(2N) M^2 + w J0 M ]
// Hopfield: log B = b [ t/(2N) M^2 + sum_a sqrt(x_a) h^a.s + w M ]
//                   + sum_mu b c_mu^2 / (2(1-z)) - (P/2) log(1-z),
//           c_mu = sqrt(t/N) xi^mu.s + sum_a sqrt(y_a) J^a_mu,
// where M is the magnetization (SK) or the Mattis sum xi.s (Hopfield) and the
// Gaussian hidden units of the noise patterns have been integrated out.
//
// Level 0 averages log Z over all draws. Level 1 splits the draws into an
// outer layer (disorder, h^1, J^1) and an inner layer (h^2, J^2) averaged as
// (1/theta) log E_2 Z^theta, with E_2 replaced by a mean over inner_samples
// draws.
struct InterpolationPoint {
  double t = 0.0;
  std::vector<double> x{0.0};
  std::vector<double> y{0.0};
  double z = 0.0;
  double w = 0.0;
  int level = 0;
  double theta = 0.5;  // used at level 1 only

  void validate() const {
    if (level != 0 && level != 1) throw RangeViolation("level must be 0 or 1");
    const std::size_t n = static_cast<std::size_t>(level) + 1;
    if (x.size() != n || y.size() != n) throw ShapeMismatch("x and y must have level+1 entries");
    if (!(t >= 0.0 && t <= 1.0)) throw RangeViolation("t must lie in [0, 1]");
    for (double v : x)
      if (!(v >= 0.0) || !std::isfinite(v)) throw RangeViolation("x must be non-negative");
    for (double v : y)
      if (!(v >= 0.0) || !std::isfinite(v)) throw RangeViolation("y must be non-negative");
    if (!(z < 1.0) || !std::isfinite(z)) throw RangeViolation("z must be below 1");
    if (!std::isfinite(w)) throw RangeViolation("w must be finite");
    if (level == 1 && !(theta > 0.0 && theta < 1.0)) throw RangeViolation("theta must lie in (0, 1)");
  }
};

enum class LemmaVariable { t, x, y, z, w };

struct LemmaSelector {
  LemmaVariable var = LemmaVariable::t;
  int index = 0;  // layer of x or y: 0 outer, 1 inner
};

struct LemmaOptions {
  double rel_step = 1e-3;
  bool richardson = true;
  int inner_samples = 256;
  // Regress both estimators on the zero-mean fluctuation of the squared norm
  // of the Gaussian variables attached to the differentiated coupling.
  bool control_variate = true;
};

struct LemmaCheck {
  double fd_lhs = 0.0;
  double bracket_rhs = 0.0;
  double abs_diff = 0.0;
  // Standard error of the per-sample difference between the two estimates.
  double difference_se = 0.0;
};

inline constexpr int kMaxLemmaSize = 10;

namespace detail {

inline double spin(unsigned state, int i) { return ((state >> i) & 1u) ? -1.0 : 1.0; }

// sum_i h_i s_i for every state, one addition per state.
inline std::vector<double> field_sums(const double* h, int n) {
  const unsigned states = 1u << n;
  std::vector<double> out(states);
  double all = 0.0;
  for (int i = 0; i < n; ++i) all += h[i];
  out[0] = all;
  for (unsigned s = 1; s < states; ++s)
    out[s] = out[s & (s - 1)] - 2.0 * h[std::countr_zero(s)];
  return out;
}

struct LemmaDraws {
  int n = 0;
  int noise = 0;   // Hopfield noise patterns
  int inner = 1;
  std::vector<double> quad;      // SK coupling form per state
  std::vector<double> mag;       // magnetization or Mattis sum per state
  std::vector<double> outer;     // h^1 . s per state
  std::vector<double> inner_h;   // inner x inner states: h^2 . s
  std::vector<double> patterns;  // state x noise: xi^mu . s
  std::vector<double> j1;        // noise
  std::vector<double> j2;        // inner x noise
  // Mean square minus one of each Gaussian family; zero mean by construction.
  double sq_coupling = 0.0;
  double sq_outer = 0.0;
  double sq_inner = 0.0;
  double sq_j1 = 0.0;
  double sq_j2 = 0.0;
};

// Accumulates the centred mean square of a run of standard normal draws.
struct SquareMean {
  double sum = 0.0;
  long count = 0;
  void add(double v) {
    sum += v * v;
    ++count;
  }
  double centred() const { return count ? sum / count - 1.0 : 0.0; }
};

inline LemmaDraws draw_lemma_sample(const ModelSpec& ms, int n, int level, int inner,
                                    std::uint64_t seed, std::uint64_t index) {
  auto rng = substream(seed, kStreamLemma, index);
  std::normal_distribution<double> normal;
  const unsigned states = 1u << n;
  LemmaDraws d;
  d.n = n;
  d.inner = level == 1 ? inner : 1;
  std::vector<double> h(n);
  SquareMean coupling, outer, inner_sq, j1sq, j2sq;

  if (ms.model == Model::sk) {
    std::vector<double> zc(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        zc[static_cast<std::size_t>(i) * n + j] = normal(rng);
        coupling.add(zc[static_cast<std::size_t>(i) * n + j]);
      }
    d.quad.assign(states, 0.0);
    d.mag.assign(states, 0.0);
    for (unsigned s = 0; s < states; ++s) {
      double q = 0.0, m = 0.0;
      for (int i = 0; i < n; ++i) {
        const double si = spin(s, i);
        m += si;
        double row = 0.0;
        for (int j = i + 1; j < n; ++j) row += zc[static_cast<std::size_t>(i) * n + j] * spin(s, j);
        q += si * row;
      }
      d.quad[s] = q;
      d.mag[s] = m;
    }
  } else {
    d.noise = hopfield_pattern_count(n, ms.hop.alpha) - 1;
    std::bernoulli_distribution coin(0.5);
    std::vector<double> xi(n);
    for (double& v : xi) v = coin(rng) ? 1.0 : -1.0;
    d.mag = field_sums(xi.data(), n);
    d.patterns.assign(static_cast<std::size_t>(states) * d.noise, 0.0);
    for (int mu = 0; mu < d.noise; ++mu) {
      for (double& v : h) {
        v = normal(rng);
        coupling.add(v);
      }
      const auto sums = field_sums(h.data(), n);
      for (unsigned s = 0; s < states; ++s) d.patterns[static_cast<std::size_t>(s) * d.noise + mu] = sums[s];
    }
  }

  for (double& v : h) {
    v = normal(rng);
    outer.add(v);
  }
  d.outer = field_sums(h.data(), n);
  d.j1.resize(d.noise);
  for (double& v : d.j1) {
    v = normal(rng);
    j1sq.add(v);
  }

  if (level == 1) {
    d.inner_h.reserve(static_cast<std::size_t>(d.inner) * states);
    d.j2.resize(static_cast<std::size_t>(d.inner) * d.noise);
    for (int k = 0; k < d.inner; ++k) {
      for (double& v : h) {
        v = normal(rng);
        inner_sq.add(v);
      }
      const auto sums = field_sums(h.data(), n);
      d.inner_h.insert(d.inner_h.end(), sums.begin(), sums.end());
      for (int mu = 0; mu < d.noise; ++mu) {
        const double v = normal(rng);
        j2sq.add(v);
        d.j2[static_cast<std::size_t>(k) * d.noise + mu] = v;
      }
    }
  }
  d.sq_coupling = coupling.centred();
  d.sq_outer = outer.centred();
  d.sq_inner = inner_sq.centred();
  d.sq_j1 = j1sq.centred();
  d.sq_j2 = j2sq.centred();
  return d;
}

// Hidden-unit field c_mu for one state and inner draw.
inline void hidden_fields(const LemmaDraws& d, const InterpolationPoint& pt, unsigned s, int k,
                          double* c) {
  const double st = std::sqrt(pt.t / d.n);
  const double sy1 = std::sqrt(pt.y[0]);
  const double sy2 = pt.level == 1 ? std::sqrt(pt.y[1]) : 0.0;
  for (int mu = 0; mu < d.noise; ++mu) {
    c[mu] = st * d.patterns[static_cast<std::size_t>(s) * d.noise + mu] + sy1 * d.j1[mu];
    if (pt.level == 1) c[mu] += sy2 * d.j2[static_cast<std::size_t>(k) * d.noise + mu];
  }
}

// log B for every state at inner draw k.
inline void log_weights(const ModelSpec& ms, const LemmaDraws& d, const InterpolationPoint& pt,
                        int k, std::vector<double>& out) {
  const unsigned states = 1u << d.n;
  out.resize(states);
  const double b = ms.beta();
  const double n = d.n;
  const double sx1 = std::sqrt(pt.x[0]);
  const double sx2 = pt.level == 1 ? std::sqrt(pt.x[1]) : 0.0;
  const double* inner = pt.level == 1 ? d.inner_h.data() + static_cast<std::size_t>(k) * states : nullptr;
  if (ms.model == Model::sk) {
    const double cq = std::sqrt(pt.t) * ms.sk.j / std::sqrt(n);
    const double cm = pt.t * ms.sk.j0 / (2.0 * n);
    for (unsigned s = 0; s < states; ++s) {
      double e = cq * d.quad[s] + sx1 * d.outer[s] + cm * d.mag[s] * d.mag[s] + pt.w * ms.sk.j0 * d.mag[s];
      if (inner) e += sx2 * inner[s];
      out[s] = b * e;
    }
    return;
  }
  const double lz = 1.0 - pt.z;
  const double constant = -0.5 * d.noise * std::log(lz);
  std::vector<double> c(d.noise);
  for (unsigned s = 0; s < states; ++s) {
    double e = pt.t / (2.0 * n) * d.mag[s] * d.mag[s] + sx1 * d.outer[s] + pt.w * d.mag[s];
    if (inner) e += sx2 * inner[s];
    hidden_fields(d, pt, s, k, c.data());
    double hid = 0.0;
    for (double v : c) hid += v * v;
    out[s] = b * e + b * hid / (2.0 * lz) + constant;
  }
}

inline double lse(const std::vector<double>& v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

// Per-sample contribution (1/N) log Z_1 at the given point.
inline double sample_pressure(const ModelSpec& ms, const LemmaDraws& d, const InterpolationPoint& pt,
                              std::vector<double>& scratch) {
  if (pt.level == 0) {
    log_weights(ms, d, pt, 0, scratch);
    return lse(scratch) / d.n;
  }
  std::vector<double> tz(d.inner);
  for (int k = 0; k < d.inner; ++k) {
    log_weights(ms, d, pt, k, scratch);
    tz[k] = pt.theta * lse(scratch);
  }
  return (lse(tz) - std::log(static_cast<double>(d.inner))) / (pt.theta * d.n);
}

// Bracket expression for one sample, with telescopic weights
// W_k = Z_k^theta / sum_l Z_l^theta over the inner draws.
inline double sample_bracket(const ModelSpec& ms, const LemmaDraws& d, const InterpolationPoint& pt,
                             LemmaSelector which) {
  const unsigned states = 1u << d.n;
  const int n = d.n;
  const int P = d.noise;
  const double b = ms.beta();
  const double theta = pt.level == 1 ? pt.theta : 1.0;
  const double lz = 1.0 - pt.z;

  std::vector<std::vector<double>> probs(d.inner);
  std::vector<double> tz(d.inner);
  for (int k = 0; k < d.inner; ++k) {
    log_weights(ms, d, pt, k, probs[k]);
    const double lzk = lse(probs[k]);
    for (double& v : probs[k]) v = std::exp(v - lzk);
    tz[k] = theta * lzk;
  }
  std::vector<double> weight(d.inner);
  const double norm = lse(tz);
  for (int k = 0; k < d.inner; ++k) weight[k] = std::exp(tz[k] - norm);

  // Observables per inner draw, combined as sum_k W_k f_k and sum_k W_k f_k^2
  // (entrywise) or (sum_k W_k f_k)^2.
  std::vector<double> c(P);
  auto two_level = [&](auto&& fill, std::size_t dim, double& inner_sq, double& outer_sq) {
    std::vector<double> avg(dim, 0.0), f(dim);
    inner_sq = 0.0;
    for (int k = 0; k < d.inner; ++k) {
      std::fill(f.begin(), f.end(), 0.0);
      fill(k, f);
      double sq = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        sq += f[i] * f[i];
        avg[i] += weight[k] * f[i];
      }
      inner_sq += weight[k] * sq;
    }
    outer_sq = 0.0;
    for (double v : avg) outer_sq += v * v;
  };
  auto expect = [&](auto&& g) {
    double acc = 0.0;
    for (int k = 0; k < d.inner; ++k) {
      double e = 0.0;
      for (unsigned s = 0; s < states; ++s) e += probs[k][s] * g(k, s);
      acc += weight[k] * e;
    }
    return acc;
  };
  auto hidden_sq = [&]() {
    // sum_mu <tau_mu^2>, with E[tau^2 | s] = c^2/(1-z)^2 + 1/(b(1-z)).
    return expect([&](int k, unsigned s) {
      hidden_fields(d, pt, s, k, c.data());
      double acc = 0.0;
      for (double v : c) acc += v * v / (lz * lz);
      return acc + P / (b * lz);
    });
  };

  switch (which.var) {
    case LemmaVariable::w: {
      const double m = expect([&](int, unsigned s) { return d.mag[s]; }) / n;
      return ms.model == Model::sk ? b * ms.sk.j0 * m : b * m;
    }
    case LemmaVariable::x: {
      double in_sq = 0.0, out_sq = 0.0;
      two_level([&](int k, std::vector<double>& f) {
        for (unsigned s = 0; s < states; ++s)
          for (int i = 0; i < n; ++i) f[i] += probs[k][s] * spin(s, i);
      }, n, in_sq, out_sq);
      const double q2 = in_sq / n, q1 = out_sq / n;
      double r = 1.0 - (1.0 - theta) * q2;
      if (which.index == 0) r -= theta * q1;
      return 0.5 * b * b * r;
    }
    case LemmaVariable::y: {
      if (P == 0) return 0.0;
      double in_sq = 0.0, out_sq = 0.0;
      two_level([&](int k, std::vector<double>& f) {
        for (unsigned s = 0; s < states; ++s) {
          hidden_fields(d, pt, s, k, c.data());
          for (int mu = 0; mu < P; ++mu) f[mu] += probs[k][s] * c[mu] / lz;
        }
      }, P, in_sq, out_sq);
      double r = hidden_sq() - (1.0 - theta) * in_sq;
      if (which.index == 0) r -= theta * out_sq;
      return 0.5 * b * b * r / n;
    }
    case LemmaVariable::z:
      return P == 0 ? 0.0 : 0.5 * b * hidden_sq() / n;
    case LemmaVariable::t: {
      const double m2 = expect([&](int, unsigned s) { return d.mag[s] * d.mag[s]; }) / (double(n) * n);
      double in_sq = 0.0, out_sq = 0.0;
      if (ms.model == Model::sk) {
        two_level([&](int k, std::vector<double>& f) {
          for (unsigned s = 0; s < states; ++s)
            for (int i = 0; i < n; ++i)
              for (int j = 0; j < n; ++j) f[i * n + j] += probs[k][s] * spin(s, i) * spin(s, j);
        }, static_cast<std::size_t>(n) * n, in_sq, out_sq);
        // Pairs i != j only; the diagonal contributes n to each square sum.
        const double nn = double(n) * n;
        const double r = (1.0 - 1.0 / n) - (1.0 - theta) * (in_sq - n) / nn - theta * (out_sq - n) / nn;
        return 0.25 * b * b * ms.sk.j * ms.sk.j * r + 0.5 * b * ms.sk.j0 * m2;
      }
      if (P == 0) return 0.5 * b * m2;
      two_level([&](int k, std::vector<double>& f) {
        for (unsigned s = 0; s < states; ++s) {
          hidden_fields(d, pt, s, k, c.data());
          for (int i = 0; i < n; ++i)
            for (int mu = 0; mu < P; ++mu) f[i * P + mu] += probs[k][s] * spin(s, i) * c[mu] / lz;
        }
      }, static_cast<std::size_t>(n) * P, in_sq, out_sq);
      const double r = hidden_sq() - ((1.0 - theta) * in_sq + theta * out_sq) / n;
      return 0.5 * b * m2 + 0.5 * b * b * r / n;
    }
  }
  return 0.0;
}

inline double control_statistic(const LemmaDraws& d, LemmaSelector which) {
  switch (which.var) {
    case LemmaVariable::t: return d.sq_coupling;
    case LemmaVariable::x: return which.index == 0 ? d.sq_outer : d.sq_inner;
    case LemmaVariable::y: return which.index == 0 ? d.sq_j1 : d.sq_j2;
    default: return 0.0;
  }
}

// Sample mean of v adjusted by the zero-mean control g with the least-squares
// coefficient; also returns the residual standard error.
inline Estimate controlled_mean(const std::vector<double>& v, const std::vector<double>& g, bool use) {
  const Estimate plain = mean_and_se(v);
  const Estimate gm = mean_and_se(g);
  double cov = 0.0, var = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    cov += (v[i] - plain.mean) * (g[i] - gm.mean);
    var += (g[i] - gm.mean) * (g[i] - gm.mean);
  }
  if (!use || !(var > 0.0)) return plain;
  const double c = cov / var;
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[i] - c * g[i];
  return mean_and_se(r);
}

inline double& coordinate(InterpolationPoint& pt, LemmaSelector which) {
  switch (which.var) {
    case LemmaVariable::t: return pt.t;
    case LemmaVariable::x: return pt.x.at(which.index);
    case LemmaVariable::y: return pt.y.at(which.index);
    case LemmaVariable::z: return pt.z;
    case LemmaVariable::w: return pt.w;
  }
  return pt.t;
}

inline void check_lemma_inputs(const ModelSpec& ms, int n, const InterpolationPoint& pt,
                               int samples, const LemmaOptions& opts) {
  if (n < 1) throw RangeViolation("n must be positive");
  if (n > kMaxLemmaSize) throw BudgetExceeded("lemma checks enumerate at most 2^10 states");
  if (samples < 1) throw RangeViolation("samples must be positive");
  if (opts.inner_samples < 1) throw RangeViolation("inner_samples must be positive");
  if (ms.model == Model::sk) ms.sk.validate(); else ms.hop.validate();
  pt.validate();
}

}  // namespace detail

// Interpolating pressure averaged over `samples` draws.
inline Estimate interpolating_pressure(const ModelSpec& ms, int n, const InterpolationPoint& pt,
                                       int samples, std::uint64_t seed, const LemmaOptions& opts = {}) {
  detail::check_lemma_inputs(ms, n, pt, samples, opts);
  std::vector<double> values(samples), scratch;
  for (int s = 0; s < samples; ++s) {
    const auto d = detail::draw_lemma_sample(ms, n, pt.level, opts.inner_samples, seed, s);
    values[s] = detail::sample_pressure(ms, d, pt, scratch);
  }
  return detail::mean_and_se(values);
}

// Central difference (Richardson-extrapolated once by default) of the
// interpolating pressure against the bracket expression, all from the same draws.
inline LemmaCheck interpolation_derivative_check(const ModelSpec& ms, int n, const InterpolationPoint& pt,
                                                 LemmaSelector which, int samples, std::uint64_t seed,
                                                 const LemmaOptions& opts = {}) {
  detail::check_lemma_inputs(ms, n, pt, samples, opts);
  if (ms.model == Model::sk && (which.var == LemmaVariable::y || which.var == LemmaVariable::z))
    throw RangeViolation("the SK interpolation has no y or z coupling");
  if ((which.var == LemmaVariable::x || which.var == LemmaVariable::y) &&
      (which.index < 0 || which.index > pt.level))
    throw RangeViolation("layer index out of range for this level");
  if (!(opts.rel_step > 0.0)) throw RangeViolation("rel_step must be positive");

  InterpolationPoint base = pt;
  const double v = detail::coordinate(base, which);
  const double h = opts.rel_step * std::max(1.0, std::fabs(v));
  const bool sqrt_var = which.var == LemmaVariable::t || which.var == LemmaVariable::x ||
                        which.var == LemmaVariable::y;
  if (sqrt_var && v - h < 0.0) throw RangeViolation("difference stencil leaves the domain (negative coupling)");
  if (which.var == LemmaVariable::z && v + h >= 1.0) throw RangeViolation("difference stencil reaches z = 1");

  const std::vector<double> offsets = opts.richardson ? std::vector<double>{h, -h, h / 2, -h / 2}
                                                      : std::vector<double>{h, -h};
  std::vector<InterpolationPoint> stencil(offsets.size(), base);
  for (std::size_t i = 0; i < offsets.size(); ++i) detail::coordinate(stencil[i], which) = v + offsets[i];

  std::vector<double> fd(samples), br(samples), diff(samples), scratch;
  std::vector<double> g(samples), a(offsets.size());
  for (int s = 0; s < samples; ++s) {
    const auto d = detail::draw_lemma_sample(ms, n, pt.level, opts.inner_samples, seed, s);
    for (std::size_t i = 0; i < offsets.size(); ++i) a[i] = detail::sample_pressure(ms, d, stencil[i], scratch);
    const double coarse = (a[0] - a[1]) / (2.0 * h);
    fd[s] = opts.richardson ? (4.0 * (a[2] - a[3]) / h - coarse) / 3.0 : coarse;
    br[s] = detail::sample_bracket(ms, d, base, which);
    diff[s] = fd[s] - br[s];
    g[s] = detail::control_statistic(d, which);
  }
  LemmaCheck out;
  out.fd_lhs = detail::controlled_mean(fd, g, opts.control_variate).mean;
  out.bracket_rhs = detail::controlled_mean(br, g, opts.control_variate).mean;
  out.abs_diff = std::fabs(out.fd_lhs - out.bracket_rhs);
  out.difference_se = detail::controlled_mean(diff, g, opts.control_variate).standard_error;
  return out;
}

}  // namespace rsb
