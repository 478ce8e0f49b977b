#pragma once

// Verification suites shared by the `verify` subcommand and the acceptance
// runner. Each check reports a measured value against a bound.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "reference_forms.hpp"
#include "rsb/hopfield.hpp"
#include "rsb/lemma.hpp"
#include "rsb/oracle.hpp"
#include "rsb/sk.hpp"
#include "rsb/solver.hpp"

namespace rsb::suites {

struct Check {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
};

inline Check at_most(std::string name, double measured, double bound) {
  return {std::move(name), measured, bound, std::isfinite(measured) && measured <= bound};
}

inline Check at_least(std::string name, double measured, double bound) {
  return {std::move(name), measured, bound, std::isfinite(measured) && measured >= bound};
}

inline std::string format_checks(const std::vector<Check>& checks) {
  std::string out = fmt::format("{:<8}{:<58}{:>26}{:>14}\n", "status", "check", "measured", "bound");
  for (const auto& c : checks)
    out += fmt::format("{:<8}{:<58}{:>26.17g}{:>14.6g}\n", c.pass ? "PASS" : "FAIL", c.name, c.measured,
                       c.bound);
  return out;
}

inline bool all_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

inline std::vector<double> even_thetas(int k, double top = 1.0) {
  std::vector<double> t;
  for (int a = 1; a <= k; ++a) t.push_back(top * a / (k + 1));
  return t;
}

// Collapse hierarchy.

namespace detail {

inline double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
  return d;
}

// A K-level ansatz whose levels a and a+1 coincide, and the (K-1)-level
// ansatz obtained by merging them.
struct MergedPair {
  RsbAnsatz wide;
  RsbAnsatz narrow;
};

inline MergedPair merged_pair(const std::vector<double>& base, int a, double m, double theta) {
  MergedPair mp;
  const int k = static_cast<int>(base.size());
  std::vector<double> wide_q = base;
  wide_q.insert(wide_q.begin() + a, base[a]);
  std::vector<double> thetas;
  for (int i = 1; i <= k; ++i) thetas.push_back(theta * i / k);
  mp.wide = RsbAnsatz{k, m, wide_q, {}, thetas};
  std::vector<double> narrow_t = thetas;
  narrow_t.erase(narrow_t.begin() + a);
  mp.narrow = RsbAnsatz{k - 1, m, base, {}, narrow_t};
  return mp;
}

inline std::vector<double> map_vector(const RsbAnsatz& a) {
  std::vector<double> v{a.m};
  v.insert(v.end(), a.qs.begin(), a.qs.end());
  v.insert(v.end(), a.ps.begin(), a.ps.end());
  return v;
}

// The narrow map output with the merged level duplicated.
inline std::vector<double> widened(RsbAnsatz a, int level) {
  a.qs.insert(a.qs.begin() + level, a.qs[level]);
  if (!a.ps.empty()) a.ps.insert(a.ps.begin() + level, a.ps[level]);
  return map_vector(a);
}

}  // namespace detail

inline std::vector<Check> collapse(const QuadratureSpec& spec, int grid = 5) {
  const std::vector<double> betas = linspace(0.5, 2.0, grid);
  const std::vector<double> thetas = linspace(0.2, 0.8, grid);
  const SkParams skp0{1.0, 0.5, 1.0};
  const double alpha = 0.05, m = 0.3;
  std::vector<Check> out;

  for (int k = 1; k <= 3; ++k) {
    double sk_worst = 0.0, hop_worst = 0.0;
    // Hopfield overlaps sit high enough that every denominator stays positive up to beta = 2.
    const std::vector<double> sk_base = k == 1 ? std::vector<double>{0.5} : linspace(0.2, 0.8, k);
    const std::vector<double> hop_base = k == 1 ? std::vector<double>{0.85} : linspace(0.7, 0.95, k);
    for (double beta : betas)
      for (double theta : thetas)
        for (int a = 0; a < k; ++a) {
          const auto [sw, sn] = detail::merged_pair(sk_base, a, m, theta);
          SkParams sp = skp0;
          sp.beta = beta;
          sk_worst = std::max(sk_worst, std::fabs(sk_pressure_krsb(sp, sw, spec).pressure -
                                                  sk_pressure_krsb(sp, sn, spec).pressure));
          sk_worst = std::max(sk_worst, detail::sup_diff(detail::map_vector(sk_sce_krsb(sp, sw, spec)),
                                                         detail::widened(sk_sce_krsb(sp, sn, spec), a)));

          const HopfieldParams hp{beta, alpha};
          auto [wide, narrow] = detail::merged_pair(hop_base, a, m, theta);
          wide.ps = hop_p_closed_form(hp, wide);
          narrow.ps = hop_p_closed_form(hp, narrow);
          hop_worst = std::max(hop_worst, std::fabs(hop_pressure_krsb(hp, wide, spec) -
                                                    hop_pressure_krsb(hp, narrow, spec)));
          hop_worst = std::max(hop_worst, detail::sup_diff(detail::map_vector(hop_sce_moments(hp, wide, spec)),
                                                           detail::widened(hop_sce_moments(hp, narrow, spec), a)));
        }
    out.push_back(at_most(fmt::format("collapse sk k={} -> k={} (pressure, map)", k, k - 1), sk_worst, 1e-10));
    out.push_back(at_most(fmt::format("collapse hopfield k={} -> k={} (pressure, map)", k, k - 1), hop_worst, 1e-10));
  }

  // One-step ansatz with equal overlaps against the RS closed forms.
  double sk_rs = 0.0, hop_rs = 0.0;
  for (double beta : betas)
    for (double theta : thetas) {
      const double q = 0.5, hq0 = 0.85;
      const RsbAnsatz one{1, m, {q, q}, {}, {theta}};
      SkParams sp = skp0;
      sp.beta = beta;
      sk_rs = std::max(sk_rs, std::fabs(sk_pressure_krsb(sp, one, spec).pressure -
                                        reference::sk_rs(beta, sp.j0, sp.j, m, q)));
      const auto [mr, qr] = sk_sce_rs(sp, m, q, spec);
      const RsbAnsatz mapped = sk_sce_krsb(sp, one, spec);
      sk_rs = std::max({sk_rs, std::fabs(mapped.m - mr), std::fabs(mapped.qs[0] - qr), std::fabs(mapped.qs[1] - qr)});

      const HopfieldParams hp{beta, alpha};
      RsbAnsatz hone{1, m, {hq0, hq0}, {}, {theta}};
      hone.ps = hop_p_closed_form(hp, hone);
      const double p = beta * hq0 / std::pow(1.0 - beta * (1.0 - hq0), 2);
      hop_rs = std::max({hop_rs, std::fabs(hone.ps[0] - p), std::fabs(hone.ps[1] - p)});
      hop_rs = std::max(hop_rs, std::fabs(hop_pressure_krsb(hp, hone, spec) - reference::hop_rs(beta, alpha, m, hq0, p)));
      const auto [hm, hq, hpp] = hop_sce_rs(hp, m, hq0, spec);
      const RsbAnsatz hmapped = hop_sce_moments(hp, hone, spec);
      hop_rs = std::max({hop_rs, std::fabs(hmapped.m - hm), std::fabs(hmapped.qs[0] - hq),
                         std::fabs(hmapped.qs[1] - hq), std::fabs(hpp - p)});
    }
  out.push_back(at_most("collapse sk k=1 equal overlaps vs RS closed form", sk_rs, 1e-10));
  out.push_back(at_most("collapse hopfield k=1 equal overlaps vs RS closed form", hop_rs, 1e-10));
  return out;
}

// Stationarity of solver fixed points.

struct ParameterPoint {
  ModelSpec spec;
  std::string label;
};

inline std::vector<ParameterPoint> stationarity_points(Model model) {
  std::vector<ParameterPoint> pts;
  if (model == Model::sk) {
    for (double beta : {0.5, 0.8, 1.2, 1.5, 2.0})
      for (double j0 : {0.0, 1.2}) {
        ModelSpec ms;
        ms.sk = {beta, j0, 1.0};
        pts.push_back({ms, fmt::format("beta={} j0={}", beta, j0)});
      }
  } else {
    for (double beta : {0.5, 1.5, 2.0, 2.5, 3.0})
      for (double alpha : {0.01, 0.05}) {
        ModelSpec ms;
        ms.model = Model::hopfield;
        ms.hop = {beta, alpha};
        pts.push_back({ms, fmt::format("beta={} alpha={}", beta, alpha)});
      }
  }
  return pts;
}

inline std::vector<Check> stationarity(const QuadratureSpec& spec, int points = 10, int max_k = 2) {
  std::vector<Check> out;
  const SolverOptions opts;
  for (Model model : {Model::sk, Model::hopfield}) {
    auto pts = stationarity_points(model);
    pts.resize(std::min<std::size_t>(pts.size(), static_cast<std::size_t>(std::max(points, 0))));
    for (int k = 0; k <= max_k; ++k) {
      double worst = 0.0;
      int covered = 0;
      for (const auto& pt : pts) {
        bool any = false;
        for (const auto& b : solve_branches(pt.spec, k, even_thetas(k), opts, spec)) {
          if (!b.report || !b.report->converged) continue;
          any = true;
          if (b.report->stationarity.empty()) worst = INFINITY;
          for (double g : b.report->stationarity) worst = std::max(worst, std::fabs(g));
        }
        covered += any ? 1 : 0;
      }
      const std::string tag = fmt::format("{} k={}", to_string(model), k);
      out.push_back(at_most("stationarity " + tag + " max |gradient|", worst, 1e-5));
      out.push_back(at_least("stationarity " + tag + " points with a converged branch", covered,
                             static_cast<double>(pts.size())));
    }
  }
  return out;
}

// Exact enumeration against RS theory.

inline std::vector<Check> enumeration(int n_sk, int n_hop, int samples, std::uint64_t seed,
                                      const QuadratureSpec& spec) {
  std::vector<Check> out;
  const SkParams sp{0.3, 0.0, 1.0};
  const Estimate sk = enumerate_sk_pressure(n_sk, sp, samples, seed);
  const double sk_theory = std::log(2.0) + sp.beta * sp.beta / 4.0;
  out.push_back(at_most(fmt::format("enumeration sk n={} beta=0.3 |A_N - RS|", n_sk), std::fabs(sk.mean - sk_theory),
                        3.0 * sk.standard_error + 0.02));

  // One stored pattern: alpha = 1/N.
  const HopfieldParams hp{0.5, 1.0 / n_hop};
  const Estimate hop = enumerate_hopfield_pressure(n_hop, hp, samples, seed);
  ModelSpec ms;
  ms.model = Model::hopfield;
  ms.hop = hp;
  double best = -INFINITY;
  for (const auto& b : solve_branches(ms, 0, {}, SolverOptions{}, spec))
    if (b.report && b.report->converged) best = std::max(best, b.report->pressure);
  out.push_back(at_most(fmt::format("enumeration hopfield n={} P=1 beta=0.5 |A_N - RS|", n_hop),
                        std::fabs(hop.mean - best), 3.0 * hop.standard_error + 0.03));
  return out;
}

// Interpolation-derivative identities.

inline std::vector<Check> lemmas(int n, int samples, std::uint64_t seed, const LemmaOptions& opts = {}) {
  std::vector<Check> out;
  ModelSpec ms;
  ms.sk = {0.5, 0.5, 1.0};
  auto relative = [](const LemmaCheck& c) { return c.abs_diff / std::max(std::fabs(c.bracket_rhs), 1e-300); };

  InterpolationPoint rs;
  rs.t = 0.5;
  rs.x = {0.5};
  rs.w = 0.2;
  const std::vector<std::pair<const char*, LemmaSelector>> rs_vars{
      {"t", {LemmaVariable::t, 0}}, {"x", {LemmaVariable::x, 0}}, {"w", {LemmaVariable::w, 0}}};
  for (const auto& [name, sel] : rs_vars)
    out.push_back(at_most(fmt::format("lemma sk level 0 d/d{} relative difference", name),
                          relative(interpolation_derivative_check(ms, n, rs, sel, samples, seed, opts)), 1e-2));

  InterpolationPoint one = rs;
  one.level = 1;
  one.x = {0.5, 0.5};
  one.y = {0.0, 0.0};
  one.theta = 0.5;
  const std::vector<std::pair<const char*, LemmaSelector>> one_vars{{"t", {LemmaVariable::t, 0}},
                                                                    {"x1", {LemmaVariable::x, 0}},
                                                                    {"x2", {LemmaVariable::x, 1}},
                                                                    {"w", {LemmaVariable::w, 0}}};
  for (const auto& [name, sel] : one_vars)
    out.push_back(at_most(fmt::format("lemma sk level 1 d/d{} relative difference", name),
                          relative(interpolation_derivative_check(ms, n, one, sel, samples, seed, opts)), 1e-2));

  // No two-body term and no random fields: the pressure is log 2cosh(b J0 w).
  InterpolationPoint flat;
  flat.w = 0.7;
  out.push_back(at_most("lemma sk t=0 d/dw absolute difference",
                        interpolation_derivative_check(ms, n, flat, {LemmaVariable::w, 0}, 1, seed, opts).abs_diff,
                        1e-10));
  return out;
}

// Two-replica overlap histograms.

// Single-spin-flip replicas at beta = 2 need longer chains to settle into
// their valleys, so the spin-glass case runs its own sweep budget. Its width is
// compared through the spin-flip symmetrized standard deviation, since the
// chains do not cross between the q and -q valleys.
inline constexpr int kGlassSweeps = 20000;

inline std::vector<Check> histogram(int sweeps, int bins, std::uint64_t seed, int glass_sweeps = kGlassSweeps) {
  std::vector<Check> out;
  const int n_free = 400;
  const auto free_sample = make_sk_sample(n_free, {0.0, 0.0, 1.0}, seed, 0);
  const auto free_hist = overlap_histogram(free_sample, 0.0, sweeps, bins, seed);
  const auto free_m = histogram_moments(free_hist);
  const auto mode = static_cast<std::size_t>(
      std::max_element(free_hist.counts.begin(), free_hist.counts.end()) - free_hist.counts.begin());
  const bool zero_in_mode = free_hist.bin_edges[mode] <= 0.0 && 0.0 < free_hist.bin_edges[mode + 1];
  out.push_back({"histogram beta=0 mode bin contains q=0", zero_in_mode ? 1.0 : 0.0, 1.0, zero_in_mode});
  const double ratio = free_m.stddev * std::sqrt(static_cast<double>(n_free));
  out.push_back({"histogram beta=0 std * sqrt(N) in [0.8, 1.2]", ratio, 1.2, ratio >= 0.8 && ratio <= 1.2});

  const auto ferro = make_sk_sample(100, {2.0, 2.0, 0.0}, seed, 1);
  const auto ferro_hist = overlap_histogram(ferro, 2.0, sweeps, bins, seed, InitPolicy::aligned);
  const auto top = static_cast<std::size_t>(
      std::max_element(ferro_hist.counts.begin(), ferro_hist.counts.end()) - ferro_hist.counts.begin());
  out.push_back(at_least("histogram ferromagnet aligned mode bin index", static_cast<double>(top),
                         static_cast<double>(bins - 1)));

  const int n_glass = 300;
  const auto glass = make_sk_sample(n_glass, {2.0, 0.0, 1.0}, seed, 2);
  const double glass_std = symmetrized_stddev(overlap_histogram(glass, 2.0, glass_sweeps, bins, seed));
  const auto hot = make_sk_sample(n_glass, {0.0, 0.0, 1.0}, seed, 2);
  const double hot_std = symmetrized_stddev(overlap_histogram(hot, 0.0, sweeps, bins, seed));
  out.push_back(at_least("histogram sk beta=2 std / beta=0 std (symmetrized)", glass_std / hot_std, 3.0));
  return out;
}

// Curie-Weiss onset.

// True when the replica-symmetric Hopfield iteration at alpha = 0, started
// near the pattern, converges to |m| > threshold.
inline bool curie_weiss_retrieves(double beta, const QuadratureSpec& spec, double threshold = 1e-3) {
  ModelSpec ms;
  ms.model = Model::hopfield;
  ms.hop = {beta, 0.0};
  try {
    const SolveReport r = solve(ms, default_inits(0, {}, Model::hopfield).front(), SolverOptions{}, spec);
    return r.converged && std::fabs(r.ansatz.m) > threshold;
  } catch (const DomainError&) {
    return false;
  }
}

// Bisection for the smallest beta with a retrieval fixed point; lo must not
// retrieve and hi must.
inline double curie_weiss_onset(double lo, double hi, double width, const QuadratureSpec& spec) {
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    (curie_weiss_retrieves(mid, spec) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace rsb::suites
