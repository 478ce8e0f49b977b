#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rsb/hopfield.hpp"
#include "rsb/sk.hpp"
#include "rsb/types.hpp"

namespace rsb {

struct SolverOptions {
  double damping = 0.5;
  double tol = 1e-10;
  int max_iter = 20000;
  bool projection = true;
  std::vector<RsbAnsatz> multistart;

  void validate() const {
    if (!(damping > 0.0 && damping <= 1.0)) throw RangeViolation("damping must lie in (0, 1]");
    if (!(tol > 0.0)) throw RangeViolation("tol must be positive");
    if (max_iter < 1) throw RangeViolation("max_iter must be positive");
  }
};

// A domain error raised by the map, with the iterate it was evaluated at.
class IterateDomainError : public DomainError {
 public:
  IterateDomainError(const std::string& what, std::string iterate_json, bool susceptibility)
      : DomainError(what), iterate_json_(std::move(iterate_json)), susceptibility_(susceptibility) {}
  const std::string& iterate_json() const { return iterate_json_; }
  bool susceptibility() const { return susceptibility_; }

 private:
  std::string iterate_json_;
  bool susceptibility_;
};

struct FixedPointTrace {
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  std::vector<double> recent_residuals;
};

namespace detail {

constexpr std::size_t kResidualWindow = 128;

inline double sup_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
  return d;
}

// Iterates x <- (1 - g) x + g P(map(x)) until sup |P(map(x)) - x| <= tol; the
// reported residual is that displacement at the returned iterate.
template <class Map, class Project, class Describe>
FixedPointTrace iterate(std::vector<double>& x, const Map& map, const Project& project,
                        const Describe& describe, const SolverOptions& opts) {
  opts.validate();
  FixedPointTrace tr;
  std::deque<double> recent;
  for (int it = 0; it < opts.max_iter; ++it) {
    std::vector<double> y;
    try {
      y = map(x);
    } catch (const SusceptibilityDivergence& e) {
      throw IterateDomainError(e.what(), describe(x), true);
    } catch (const IterateDomainError&) {
      throw;
    } catch (const DomainError& e) {
      throw IterateDomainError(e.what(), describe(x), false);
    }
    project(y);
    tr.residual = sup_distance(y, x);
    tr.iterations = it + 1;
    recent.push_back(tr.residual);
    if (recent.size() > kResidualWindow) recent.pop_front();
    if (!std::isfinite(tr.residual)) break;
    if (tr.residual <= opts.tol) {
      tr.converged = true;
      break;
    }
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = (1.0 - opts.damping) * x[i] + opts.damping * y[i];
    project(x);
  }
  tr.recent_residuals.assign(recent.begin(), recent.end());
  return tr;
}

// Pool-adjacent-violators: closest non-decreasing sequence in least squares.
inline void isotonic(double* v, std::size_t n) {
  std::vector<double> mean;
  std::vector<std::size_t> count;
  for (std::size_t i = 0; i < n; ++i) {
    mean.push_back(v[i]);
    count.push_back(1);
    while (mean.size() > 1 && mean[mean.size() - 2] > mean.back()) {
      const std::size_t c = count.back() + count[count.size() - 2];
      const double m = (mean.back() * count.back() + mean[mean.size() - 2] * count[count.size() - 2]) / c;
      mean.pop_back();
      count.pop_back();
      mean.back() = m;
      count.back() = c;
    }
  }
  std::size_t i = 0;
  for (std::size_t b = 0; b < mean.size(); ++b)
    for (std::size_t c = 0; c < count[b]; ++c) v[i++] = mean[b];
}

// State layout: [m, q_1, ..., q_{K+1}].
inline std::vector<double> flatten(const RsbAnsatz& a) {
  std::vector<double> x{a.m};
  x.insert(x.end(), a.qs.begin(), a.qs.end());
  return x;
}

inline RsbAnsatz unflatten(const std::vector<double>& x, const RsbAnsatz& shape) {
  RsbAnsatz a = shape;
  a.m = x[0];
  a.qs.assign(x.begin() + 1, x.end());
  return a;
}

inline void project_state(std::vector<double>& x) {
  if (x.empty()) return;
  x[0] = std::clamp(x[0], -1.0, 1.0);
  isotonic(x.data() + 1, x.size() - 1);
  for (std::size_t i = 1; i < x.size(); ++i) x[i] = std::clamp(x[i], 0.0, 1.0);
}

}  // namespace detail

// Damped iteration of a map on a plain vector (no projection).
inline std::pair<std::vector<double>, FixedPointTrace> damped_fixed_point(
    const std::function<std::vector<double>(const std::vector<double>&)>& map,
    std::vector<double> init, const SolverOptions& opts) {
  auto describe = [](const std::vector<double>& x) { return nlohmann::json(x).dump(); };
  auto no_project = [](std::vector<double>&) {};
  FixedPointTrace tr = detail::iterate(init, map, no_project, describe, opts);
  return {std::move(init), std::move(tr)};
}

// Damped iteration over (m, q); thetas are carried unchanged. With
// projection the q sequence is kept monotone and inside [0, 1].
inline std::pair<RsbAnsatz, FixedPointTrace> damped_fixed_point(
    const std::function<RsbAnsatz(const RsbAnsatz&)>& map, const RsbAnsatz& init,
    const SolverOptions& opts) {
  std::vector<double> x = detail::flatten(init);
  auto describe = [&](const std::vector<double>& v) {
    return nlohmann::json(detail::unflatten(v, init)).dump();
  };
  auto project = [&](std::vector<double>& v) {
    if (opts.projection) detail::project_state(v);
  };
  auto vmap = [&](const std::vector<double>& v) {
    return detail::flatten(map(detail::unflatten(v, init)));
  };
  project(x);
  FixedPointTrace tr = detail::iterate(x, vmap, project, describe, opts);
  return {detail::unflatten(x, init), std::move(tr)};
}

// Central differences of the pressure in (m, q_1, ..., q_{K+1}). A stencil
// that leaves the domain halves the step, at most 8 times. On the boundary of
// the ordered domain the derivative falls back to a one-sided second-order
// stencil, and a q within two steps of its neighbours moves together with
// that block (the derivative is then taken per member of the block).
inline std::vector<double> stationarity_check(
    const std::function<double(const RsbAnsatz&)>& pressure, const RsbAnsatz& a, double step) {
  if (!(step > 0.0)) throw RangeViolation("step must be positive");
  const std::vector<double> x = detail::flatten(a);
  auto eval = [&](const std::vector<double>& dir, double t) -> std::optional<double> {
    std::vector<double> y = x;
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += t * dir[j];
    try {
      const double f = pressure(detail::unflatten(y, a));
      if (std::isfinite(f)) return f;
    } catch (const Error&) {
    }
    return std::nullopt;
  };
  const std::vector<double> zero(x.size(), 0.0);
  const auto centre = eval(zero, 0.0);
  if (!centre) throw DomainError("pressure is not finite at the evaluation point");

  auto derivative = [&](const std::vector<double>& dir) -> std::optional<double> {
    double h = step;
    for (int attempt = 0; attempt <= 8; ++attempt, h *= 0.5) {
      const auto fp = eval(dir, h), fm = eval(dir, -h);
      if (fp && fm) return (*fp - *fm) / (2.0 * h);
    }
    if (auto f1 = eval(dir, step), f2 = eval(dir, 2.0 * step); f1 && f2)
      return (-3.0 * *centre + 4.0 * *f1 - *f2) / (2.0 * step);
    if (auto f1 = eval(dir, -step), f2 = eval(dir, -2.0 * step); f1 && f2)
      return (3.0 * *centre - 4.0 * *f1 + *f2) / (2.0 * step);
    return std::nullopt;
  };

  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> dir = zero;
    dir[i] = 1.0;
    auto d = derivative(dir);
    if (!d && i >= 1) {
      std::size_t lo = i, hi = i;
      while (lo > 1 && x[lo] - x[lo - 1] <= 2.0 * step) --lo;
      while (hi + 1 < x.size() && x[hi + 1] - x[hi] <= 2.0 * step) ++hi;
      if (hi > lo) {
        for (std::size_t j = lo; j <= hi; ++j) dir[j] = 1.0;
        d = derivative(dir);
        if (d) *d /= static_cast<double>(hi - lo + 1);
      }
    }
    if (!d)
      throw DomainError("finite-difference stencil for component " + std::to_string(i) +
                        " leaves the pressure's domain");
    grad[i] = *d;
  }
  return grad;
}

struct ThetaSearch {
  std::vector<double> thetas;
  bool degenerate = false;
  // Sign of the second difference of the objective at the optimum, per coordinate.
  std::vector<int> curvature;
};

// Coordinate-wise golden-section search for the maximizing thetas.
inline ThetaSearch extremize_theta(const std::function<double(const std::vector<double>&)>& objective,
                                   const std::vector<std::pair<double, double>>& bracket,
                                   double tol) {
  if (bracket.empty()) throw BracketViolation("bracket must have at least one component");
  for (const auto& [lo, hi] : bracket)
    if (!(lo >= kMinTheta && hi <= 0.99 && lo < hi))
      throw BracketViolation("each bracket must satisfy 0.01 <= lo < hi <= 0.99");
  if (!(tol > 0.0)) throw RangeViolation("tol must be positive");

  const std::size_t n = bracket.size();
  ThetaSearch res;
  res.thetas.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.thetas[i] = 0.5 * (bracket[i].first + bracket[i].second);

  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto eval_at = [&](std::size_t i, double v) {
    std::vector<double> t = res.thetas;
    t[i] = v;
    const double f = objective(t);
    return std::isfinite(f) ? f : -std::numeric_limits<double>::infinity();
  };

  // Flatness probe along each coordinate through the starting point.
  bool flat = true;
  for (std::size_t i = 0; i < n && flat; ++i) {
    const auto [lo, hi] = bracket[i];
    double fmin = INFINITY, fmax = -INFINITY;
    for (int s = 0; s <= 4; ++s) {
      const double f = eval_at(i, lo + (hi - lo) * s / 4.0);
      fmin = std::min(fmin, f);
      fmax = std::max(fmax, f);
    }
    flat = (fmax - fmin) <= 1e-13 * std::max(1.0, std::fabs(fmax));
  }
  if (flat) {
    res.degenerate = true;
    res.curvature.assign(n, 0);
    return res;
  }

  for (int cycle = 0; cycle < 100; ++cycle) {
    double moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double a = bracket[i].first, b = bracket[i].second;
      double c = b - invphi * (b - a), d = a + invphi * (b - a);
      double fc = eval_at(i, c), fd = eval_at(i, d);
      while (b - a > tol) {
        if (fc >= fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - invphi * (b - a);
          fc = eval_at(i, c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + invphi * (b - a);
          fd = eval_at(i, d);
        }
      }
      const double best = 0.5 * (a + b);
      moved = std::max(moved, std::fabs(best - res.thetas[i]));
      res.thetas[i] = best;
    }
    if (n == 1 || moved <= tol) break;
  }

  res.curvature.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double h = std::max(10.0 * tol, 1e-4);
    const double lo = std::max(bracket[i].first, res.thetas[i] - h);
    const double hi = std::min(bracket[i].second, res.thetas[i] + h);
    const double mid = 0.5 * (lo + hi);
    const double second = eval_at(i, lo) - 2.0 * eval_at(i, mid) + eval_at(i, hi);
    res.curvature[i] = second > 0 ? 1 : (second < 0 ? -1 : 0);
  }
  return res;
}

// Model-level solves.

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n == 1) return {hi};
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return v;
}

inline std::vector<RsbAnsatz> default_inits(int k, const std::vector<double>& thetas, Model model) {
  const auto levels = static_cast<std::size_t>(k) + 1;
  RsbAnsatz high{k, 0.999, linspace(0.5, 0.99, levels), {}, thetas};
  RsbAnsatz low{k, 0.0, linspace(0.01, 0.3, levels), {}, thetas};
  if (model == Model::hopfield) {
    high.ps.assign(levels, 0.0);
    low.ps.assign(levels, 0.0);
  }
  return {high, low};
}

// Pressure with the Hopfield conjugate overlaps eliminated through the
// closed form.
inline double model_pressure(const ModelSpec& ms, const RsbAnsatz& a, const QuadratureSpec& spec) {
  if (ms.model == Model::sk) return sk_pressure_krsb(ms.sk, a, spec).pressure;
  RsbAnsatz full = a;
  full.ps = hop_p_closed_form(ms.hop, a);
  return hop_pressure_krsb(ms.hop, full, spec);
}

inline RsbAnsatz model_map(const ModelSpec& ms, const RsbAnsatz& a, const QuadratureSpec& spec) {
  if (ms.model == Model::sk) return sk_sce_krsb(ms.sk, a, spec);
  return hop_sce_moments(ms.hop, a, spec);
}

constexpr double kStationarityStep = 1e-5;

inline SolveReport solve(const ModelSpec& ms, const RsbAnsatz& init, const SolverOptions& opts,
                         const QuadratureSpec& spec) {
  RsbAnsatz start = init;
  if (ms.model == Model::sk) start.ps.clear();
  auto map = [&](const RsbAnsatz& a) { return model_map(ms, a, spec); };
  auto [x, tr] = damped_fixed_point(map, start, opts);

  SolveReport rep;
  rep.ansatz = x;
  rep.residual = tr.residual;
  rep.iterations = tr.iterations;
  rep.converged = tr.converged;
  rep.recent_residuals = tr.recent_residuals;
  if (ms.model == Model::hopfield) rep.ansatz.ps = hop_p_closed_form(ms.hop, x);
  rep.pressure = model_pressure(ms, x, spec);
  try {
    rep.stationarity = stationarity_check(
        [&](const RsbAnsatz& a) { return model_pressure(ms, a, spec); }, x, kStationarityStep);
  } catch (const DomainError&) {
    rep.stationarity.clear();
  }
  return rep;
}

struct BranchOutcome {
  int branch = 0;
  std::optional<SolveReport> report;
  std::string error;
  bool susceptibility = false;
};

inline std::vector<BranchOutcome> solve_branches(const ModelSpec& ms, int k,
                                                 const std::vector<double>& thetas,
                                                 const SolverOptions& opts,
                                                 const QuadratureSpec& spec) {
  const std::vector<RsbAnsatz> inits =
      opts.multistart.empty() ? default_inits(k, thetas, ms.model) : opts.multistart;
  std::vector<BranchOutcome> out;
  for (std::size_t i = 0; i < inits.size(); ++i) {
    BranchOutcome b;
    b.branch = static_cast<int>(i);
    try {
      b.report = solve(ms, inits[i], opts, spec);
    } catch (const IterateDomainError& e) {
      b.error = e.what();
      b.susceptibility = e.susceptibility();
    } catch (const SusceptibilityDivergence& e) {
      b.error = e.what();
      b.susceptibility = true;
    } catch (const DomainError& e) {
      b.error = e.what();
    }
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace rsb
