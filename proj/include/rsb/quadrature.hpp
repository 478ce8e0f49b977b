#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rsb/errors.hpp"
#include "rsb/types.hpp"

namespace rsb {

// g(h) = offset + sum_a coeffs[a] * h_a with independent standard normal h_a.
struct FieldArgument {
  double offset = 0.0;
  std::vector<double> coeffs;
};

enum class Inner { none, tanh, tanh2 };

struct NestedResult {
  // (1/theta_1) E_1 log N_1, including the log 2 of 2cosh.
  double log_term = 0.0;
  // Telescopic average of the inner function.
  double mean = 0.0;
  // squares[s]: telescopic average with the partial average over levels
  // s+2..K+1 squared (s = K squares the inner function itself).
  std::vector<double> squares;
};

constexpr int kMaxLevels = 8;
constexpr double kMinTheta = 0.01;

// Half-width of the integration window in units of the standard deviation,
// before the shift needed by cosh^theta tilting.
constexpr double kGridHalfWidth = 9.0;
constexpr double kSmallCoeff = 0.4;

namespace detail {

struct Grid {
  std::vector<double> h;
  std::vector<double> logw;
};

inline double log_2cosh(double x) {
  const double ax = std::fabs(x);
  return ax + std::log1p(std::exp(-2.0 * ax));
}

inline double log_sum_exp(const double* v, std::size_t n) {
  double mx = -INFINITY;
  for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, v[i]);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - mx);
  return mx + std::log(s);
}

// Uniform grid on [-L, L] with normalized Gaussian weights. The spacing is
// divided by the field coefficient so that the complex singularities of
// tanh and log cosh, at distance pi / (2c), stay resolved. Below
// kSmallCoeff the Gaussian factor sets the resolution instead.
inline Grid uniform_grid(double coeff, double tilt, const QuadratureSpec& spec) {
  Grid g;
  if (coeff == 0.0) {
    g.h = {0.0};
    g.logw = {0.0};
    return g;
  }
  const double half = kGridHalfWidth + tilt;
  const double base_step = 2.0 * kGridHalfWidth / spec.nodes_per_level;
  const double step = base_step / std::max(kSmallCoeff, coeff);
  const auto half_count = static_cast<std::size_t>(std::ceil(half / step));
  const std::size_t n = 2 * half_count + 1;
  const double dx = half / static_cast<double>(half_count);
  g.h.resize(n);
  g.logw.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    // Symmetric construction keeps h_j = -h_{n-1-j} exactly.
    const double h = (static_cast<double>(j) - static_cast<double>(half_count)) * dx;
    g.h[j] = h;
    g.logw[j] = -0.5 * h * h;
  }
  const double norm = log_sum_exp(g.logw.data(), n);
  for (double& w : g.logw) w -= norm;
  return g;
}

inline Grid antithetic_grid(int level, const QuadratureSpec& spec) {
  const std::size_t pairs = std::max<std::size_t>(1, (spec.mc_samples + 1) / 2);
  std::mt19937_64 eng(0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(level + 1));
  std::normal_distribution<double> normal;
  Grid g;
  g.h.reserve(2 * pairs);
  for (std::size_t i = 0; i < pairs; ++i) {
    const double z = normal(eng);
    g.h.push_back(z);
    g.h.push_back(-z);
  }
  g.logw.assign(g.h.size(), -std::log(static_cast<double>(g.h.size())));
  return g;
}

struct Plan {
  int levels = 1;                           // K + 1
  double offset = 0.0;
  std::array<double, kMaxLevels> coeff{};   // c_1..c_{K+1}
  std::array<double, kMaxLevels> ratio{};   // theta_a / theta_{a+1}, a = 1..K
  double inv_theta1 = 1.0;
  std::vector<Grid> grids;                  // one per level
  Inner inner = Inner::tanh;
};

inline void check_thetas(const std::vector<double>& thetas) {
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const double t = thetas[i];
    if (!std::isfinite(t) || t <= 0.0 || t >= 1.0)
      throw RangeViolation("each theta must lie in (0, 1)");
    if (i > 0 && t <= thetas[i - 1])
      throw OrderingViolation("thetas must be strictly increasing");
  }
  for (double t : thetas)
    if (t < kMinTheta) throw DomainError("theta below 0.01 is outside the evaluated domain");
}

inline Plan make_plan(const FieldArgument& arg, const std::vector<double>& thetas,
                      const QuadratureSpec& spec, Inner inner) {
  spec.validate();
  if (arg.coeffs.empty() || arg.coeffs.size() != thetas.size() + 1)
    throw ShapeMismatch("field coefficients must number one more than thetas");
  if (arg.coeffs.size() > static_cast<std::size_t>(kMaxLevels))
    throw ShapeMismatch("at most " + std::to_string(kMaxLevels) + " nesting levels are supported");
  if (!std::isfinite(arg.offset)) throw RangeViolation("field offset must be finite");
  for (double c : arg.coeffs)
    if (!std::isfinite(c) || c < 0.0)
      throw RangeViolation("field coefficients must be finite and non-negative");
  check_thetas(thetas);

  Plan plan;
  plan.levels = static_cast<int>(arg.coeffs.size());
  plan.offset = arg.offset;
  plan.inner = inner;
  const int k = plan.levels - 1;
  for (int a = 0; a < plan.levels; ++a) plan.coeff[a] = arg.coeffs[a];
  for (int a = 0; a < k; ++a) {
    const double next = (a + 1 < k) ? thetas[a + 1] : 1.0;
    plan.ratio[a] = thetas[a] / next;
  }
  plan.inv_theta1 = k > 0 ? 1.0 / thetas[0] : 1.0;

  double points = 1.0;
  for (int a = 0; a < plan.levels; ++a) {
    const double tilt = a > 0 ? thetas[a - 1] * arg.coeffs[a] : 0.0;
    plan.grids.push_back(uniform_grid(arg.coeffs[a], tilt, spec));
    points *= static_cast<double>(plan.grids.back().h.size());
  }
  if (points > static_cast<double>(spec.max_tensor_points)) {
    if (spec.mc_samples == 0)
      throw BudgetExceeded("tensor grid of " + std::to_string(points) +
                           " points exceeds max_tensor_points and Monte Carlo is disabled");
    points = 1.0;
    for (int a = 0; a < plan.levels; ++a) {
      if (arg.coeffs[a] != 0.0) plan.grids[a] = antithetic_grid(a, spec);
      points *= static_cast<double>(plan.grids[a].h.size());
    }
    if (points > static_cast<double>(spec.max_tensor_points))
      throw BudgetExceeded("Monte Carlo grid exceeds max_tensor_points");
  }
  return plan;
}

struct Partial {
  double log_n = 0.0;
  double v = 0.0;
  std::array<double, kMaxLevels> s{};
};

inline double inner_value(Inner inner, double t) {
  switch (inner) {
    case Inner::none: return 1.0;
    case Inner::tanh: return t;
    case Inner::tanh2: return t * t;
  }
  return 0.0;
}

// Per-level scratch, sized once per evaluation.
struct Workspace {
  std::vector<std::vector<double>> logv;
  std::vector<std::vector<Partial>> parts;
};

inline Partial innermost(const Plan& plan, double x) {
  const double ax = std::fabs(x);
  const double e = std::exp(-2.0 * ax);
  Partial p;
  p.log_n = ax + std::log1p(e);
  const double t = std::copysign((1.0 - e) / (1.0 + e), x);
  p.v = inner_value(plan.inner, t);
  p.s[plan.levels - 1] = p.v * p.v;
  return p;
}

// Quantities at level a (0-based) as a function of the partial field u,
// which already contains the level-a Gaussian.
template <bool Moments>
Partial level_value(const Plan& plan, Workspace& ws, int a, double u) {
  const int last = plan.levels - 1;
  if (a == last) return innermost(plan, u);

  const Grid& g = plan.grids[a + 1];
  const double c = plan.coeff[a + 1];
  const double r = plan.ratio[a];
  const std::size_t n = g.h.size();
  auto& logv = ws.logv[a];
  auto& parts = ws.parts[a];

  if (a + 1 == last) {
    // Children are innermost; inline for speed.
    for (std::size_t j = 0; j < n; ++j) {
      const double x = u + c * g.h[j];
      const double ax = std::fabs(x);
      const double e = std::exp(-2.0 * ax);
      const double ln = ax + std::log1p(e);
      parts[j].log_n = ln;
      if constexpr (Moments) {
        const double t = std::copysign((1.0 - e) / (1.0 + e), x);
        parts[j].v = inner_value(plan.inner, t);
      }
      logv[j] = g.logw[j] + r * ln;
    }
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      parts[j] = level_value<Moments>(plan, ws, a + 1, u + c * g.h[j]);
      logv[j] = g.logw[j] + r * parts[j].log_n;
    }
  }

  Partial out;
  out.log_n = log_sum_exp(logv.data(), n);
  if constexpr (Moments) {
    if (a + 1 == last)
      for (std::size_t j = 0; j < n; ++j) parts[j].s[last] = parts[j].v * parts[j].v;
    for (std::size_t j = 0; j < n; ++j) {
      const double w = std::exp(logv[j] - out.log_n);
      out.v += w * parts[j].v;
      for (int b = a + 1; b <= last; ++b) out.s[b] += w * parts[j].s[b];
    }
    out.s[a] = out.v * out.v;
  }
  return out;
}

template <bool Moments>
NestedResult evaluate(const Plan& plan) {
  Workspace ws;
  ws.logv.resize(plan.levels);
  ws.parts.resize(plan.levels);
  for (int a = 0; a + 1 < plan.levels; ++a) {
    ws.logv[a].resize(plan.grids[a + 1].h.size());
    ws.parts[a].resize(plan.grids[a + 1].h.size());
  }

  const Grid& g = plan.grids[0];
  const double c = plan.coeff[0];
  NestedResult res;
  res.squares.assign(plan.levels, 0.0);
  double log_acc = 0.0;
  for (std::size_t j = 0; j < g.h.size(); ++j) {
    const Partial p = level_value<Moments>(plan, ws, 0, plan.offset + c * g.h[j]);
    const double w = std::exp(g.logw[j]);
    log_acc += w * p.log_n;
    if constexpr (Moments) {
      res.mean += w * p.v;
      for (int b = 0; b < plan.levels; ++b) res.squares[b] += w * p.s[b];
    }
  }
  res.log_term = plan.inv_theta1 * log_acc;

  bool finite = std::isfinite(res.log_term) && std::isfinite(res.mean);
  for (double s : res.squares) finite = finite && std::isfinite(s);
  if (!finite) throw NonFiniteIntegrand("nested expectation produced a non-finite value");
  return res;
}

}  // namespace detail

// E f(h) for h ~ N(0, 1).
inline double gauss_expect(const std::function<double(double)>& f, const QuadratureSpec& spec) {
  spec.validate();
  const detail::Grid g = detail::uniform_grid(1.0, 1.0, spec);
  double acc = 0.0;
  for (std::size_t j = 0; j < g.h.size(); ++j) {
    const double v = f(g.h[j]);
    if (!std::isfinite(v))
      throw NonFiniteIntegrand("integrand is not finite at h = " + std::to_string(g.h[j]));
    acc += std::exp(g.logw[j]) * v;
  }
  return acc;
}

// All nested quantities in one pass: the log term and the telescopic
// averages of the inner function (tanh by default).
inline NestedResult nested_moments(const FieldArgument& arg, const std::vector<double>& thetas,
                                   const QuadratureSpec& spec, Inner inner = Inner::tanh) {
  return detail::evaluate<true>(detail::make_plan(arg, thetas, spec, inner));
}

// (1/theta_1) E_1 log N_1 with N_{K+1} = 2cosh(g) and
// N_a = E_{a+1}[N_{a+1}^{theta_a / theta_{a+1}}].
inline double nested_log_cosh_expect(const FieldArgument& arg, const std::vector<double>& thetas,
                                     const QuadratureSpec& spec) {
  return detail::evaluate<false>(detail::make_plan(arg, thetas, spec, Inner::none)).log_term;
}

// Telescopic average of the inner function. With square_at_level = s the
// partial average over levels s+2..K+1 is squared before the outer levels are
// averaged; s = 0 yields q_1-type quantities and s = K squares the inner
// function itself.
inline double nested_ratio_expect(const FieldArgument& arg, const std::vector<double>& thetas,
                                  Inner inner, std::optional<int> square_at_level,
                                  const QuadratureSpec& spec) {
  const NestedResult r = nested_moments(arg, thetas, spec, inner);
  if (!square_at_level) return r.mean;
  const int s = *square_at_level;
  if (s < 0 || s > static_cast<int>(thetas.size()))
    throw RangeViolation("square_at_level must lie in [0, K]");
  return r.squares[s];
}

}  // namespace rsb
